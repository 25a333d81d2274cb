#include <bit>
#include <cmath>

#include "fsavg/kernels.hpp"

namespace fsavg::kernels {

namespace {

void grid_fluctuation_max(const double* loads, std::size_t stride, const double* sums,
                          std::size_t terms, std::size_t lanes, double* runmax, double* argn,
                          double n) {
  for (std::size_t g = 0; g < lanes; ++g) {
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
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int j = 0; j < 4; ++j) s[j] = s[j] + vals[i + j] * x[idx[i + j]];
  double total = (s[0] + s[1]) + (s[2] + s[3]);
  for (; i < n; ++i) total = total + vals[i] * x[idx[i]];
  return total;
}

double dot(const double* a, const double* b, std::size_t n) {
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int j = 0; j < 4; ++j) s[j] = s[j] + a[i + j] * b[i + j];
  double total = (s[0] + s[1]) + (s[2] + s[3]);
  for (; i < n; ++i) total = total + a[i] * b[i];
  return total;
}

double sum(const double* a, std::size_t n) {
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int j = 0; j < 4; ++j) s[j] = s[j] + a[i + j];
  double total = (s[0] + s[1]) + (s[2] + s[3]);
  for (; i < n; ++i) total = total + a[i];
  return total;
}

double l1_distance(const double* a, const double* b, std::size_t n) {
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int j = 0; j < 4; ++j) s[j] = s[j] + std::fabs(a[i + j] - b[i + j]);
  double total = (s[0] + s[1]) + (s[2] + s[3]);
  for (; i < n; ++i) total = total + std::fabs(a[i] - b[i]);
  return total;
}

inline std::uint64_t window(const std::uint64_t* words, std::size_t shift) {
  const std::size_t w = shift >> 6;
  const unsigned r = static_cast<unsigned>(shift & 63u);
  if (r == 0) return words[w];
  return (words[w] << r) | (words[w + 1] >> (64u - r));
}

void expansion_windows(const std::uint64_t* words, std::size_t first, std::size_t count,
                       double offset, double* out) {
  constexpr std::uint64_t kOneBits = 0x3FF0000000000000ull;
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t w = window(words, first + i);
    const double v = std::bit_cast<double>((w >> 12) | kOneBits) - 1.0;
    double y = v - offset;
    if (y < 0.0) y = y + 1.0;
    if (y >= 1.0) y = 0.0;
    out[i] = y;
  }
}

constexpr KernelTable kScalar{grid_fluctuation_max, sparse_dot, dot, sum, l1_distance,
                              expansion_windows};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace fsavg::kernels
