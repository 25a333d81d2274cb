#include <immintrin.h>

#include <bit>
#include <cmath>

#include "fsavg/kernels.hpp"

namespace fsavg::kernels {

namespace {

inline double combine(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

inline __m256d abs_pd(__m256d v) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v); }

void grid_fluctuation_max(const double* loads, std::size_t stride, const double* sums,
                          std::size_t terms, std::size_t lanes, double* runmax, double* argn,
                          double n) {
  const __m256d vn = _mm256_set1_pd(n);
  std::size_t g = 0;
  for (; g + 4 <= lanes; g += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t k = 0; k < terms; ++k)
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(loads + k * stride + g),
                                             _mm256_set1_pd(sums[k])));
    const __m256d mag = abs_pd(acc);
    const __m256d best = _mm256_loadu_pd(runmax + g);
    const __m256d mask = _mm256_cmp_pd(mag, best, _CMP_GT_OQ);
    _mm256_storeu_pd(runmax + g, _mm256_blendv_pd(best, mag, mask));
    _mm256_storeu_pd(argn + g, _mm256_blendv_pd(_mm256_loadu_pd(argn + g), vn, mask));
  }
  for (; g < lanes; ++g) {
    double acc = 0.0;
    for (std::size_t k = 0; k < terms; ++k) acc = acc + loads[k * stride + g] * sums[k];
    const double mag = std::fabs(acc);
    if (mag > runmax[g]) {
      runmax[g] = mag;
      argn[g] = n;
    }
  }
}

double sparse_dot(const double* vals, const std::uint32_t* idx, const double* x,
                  std::size_t n) {
  __m256d s = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m128i vi = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx + i));
    const __m256d xv = _mm256_i32gather_pd(x, vi, 8);
    s = _mm256_add_pd(s, _mm256_mul_pd(_mm256_loadu_pd(vals + i), xv));
  }
  double total = combine(s);
  for (; i < n; ++i) total = total + vals[i] * x[idx[i]];
  return total;
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d s = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    s = _mm256_add_pd(s, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  double total = combine(s);
  for (; i < n; ++i) total = total + a[i] * b[i];
  return total;
}

double sum(const double* a, std::size_t n) {
  __m256d s = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) s = _mm256_add_pd(s, _mm256_loadu_pd(a + i));
  double total = combine(s);
  for (; i < n; ++i) total = total + a[i];
  return total;
}

double l1_distance(const double* a, const double* b, std::size_t n) {
  __m256d s = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    s = _mm256_add_pd(s, abs_pd(_mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i))));
  double total = combine(s);
  for (; i < n; ++i) total = total + std::fabs(a[i] - b[i]);
  return total;
}

void expansion_windows(const std::uint64_t* words, std::size_t first, std::size_t count,
                       double offset, double* out) {
  const auto* base = reinterpret_cast<const long long*>(words);
  const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000ll);
  const __m256i lane = _mm256_set_epi64x(3, 2, 1, 0);
  const __m256i six3 = _mm256_set1_epi64x(63);
  const __m256i sixty4 = _mm256_set1_epi64x(64);
  const __m256d voff = _mm256_set1_pd(offset);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256i shift =
        _mm256_add_epi64(_mm256_set1_epi64x(static_cast<long long>(first + i)), lane);
    const __m256i widx = _mm256_srli_epi64(shift, 6);
    const __m256i r = _mm256_and_si256(shift, six3);
    const __m256i w0 = _mm256_i64gather_epi64(base, widx, 8);
    const __m256i w1 = _mm256_i64gather_epi64(base, _mm256_add_epi64(widx, _mm256_set1_epi64x(1)), 8);
    // srlv by 64 yields zero, which covers the r == 0 case.
    const __m256i w = _mm256_or_si256(_mm256_sllv_epi64(w0, r),
                                      _mm256_srlv_epi64(w1, _mm256_sub_epi64(sixty4, r)));
    const __m256i bits = _mm256_or_si256(_mm256_srli_epi64(w, 12), one_bits);
    __m256d y = _mm256_sub_pd(_mm256_sub_pd(_mm256_castsi256_pd(bits), one), voff);
    y = _mm256_blendv_pd(y, _mm256_add_pd(y, one), _mm256_cmp_pd(y, zero, _CMP_LT_OQ));
    y = _mm256_blendv_pd(y, zero, _mm256_cmp_pd(y, one, _CMP_GE_OQ));
    _mm256_storeu_pd(out + i, y);
  }
  if (i < count) scalar_table().expansion_windows(words, first + i, count - i, offset, out + i);
}

constexpr KernelTable kAvx2{grid_fluctuation_max, sparse_dot, dot, sum, l1_distance,
                            expansion_windows};

}  // namespace

const KernelTable& avx2_table() noexcept { return kAvx2; }

}  // namespace fsavg::kernels
