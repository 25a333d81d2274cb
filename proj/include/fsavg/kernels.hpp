#pragma once

// Data-parallel inner loops with a scalar reference and SIMD variants.
//
// Every variant performs the same floating-point operations in the same
// order (reductions use four interleaved partial sums combined as
// (s0 + s1) + (s2 + s3)), so results are bitwise identical across
// instruction sets. The test suite checks this equivalence directly.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace fsavg::kernels {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  /// For each lane g < lanes: value = sum_k loads[k * stride + g] * sums[k];
  /// if |value| > runmax[g], store it and set argn[g] = n.
  void (*grid_fluctuation_max)(const double* loads, std::size_t stride, const double* sums,
                               std::size_t terms, std::size_t lanes, double* runmax,
                               double* argn, double n);
  /// sum_i vals[i] * x[idx[i]]
  double (*sparse_dot)(const double* vals, const std::uint32_t* idx, const double* x,
                       std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  double (*l1_distance)(const double* a, const double* b, std::size_t n);
  /// out[i] = (W(first + i) * 2^-64 truncated to 52 bits) - offset, reduced into [0, 1),
  /// where W(s) is the 64-bit window of `words` starting after bit s (bit 0 is the
  /// most significant bit of words[0]). `words` must hold at least
  /// (first + count + 63) / 64 + 1 entries.
  void (*expansion_windows)(const std::uint64_t* words, std::size_t first, std::size_t count,
                            double offset, double* out);
};

const KernelTable& scalar_table() noexcept;
#if defined(FSAVG_HAVE_AVX2)
const KernelTable& avx2_table() noexcept;
#endif

bool supported(Isa isa) noexcept;
std::string_view name(Isa isa) noexcept;

/// ISA used by `active()`. Defaults to the best supported one; the
/// environment variable FSAVG_SIMD=scalar|avx2 overrides the default.
Isa active_isa() noexcept;
/// Force an ISA (tests, benchmarking). Throws UsageError if unsupported.
void set_isa(Isa isa);

const KernelTable& table(Isa isa);
const KernelTable& active() noexcept;

}  // namespace fsavg::kernels
