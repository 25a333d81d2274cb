#include <atomic>
#include <cstdlib>
#include <string>

#include "fsavg/error.hpp"
#include "fsavg/kernels.hpp"

namespace fsavg::kernels {

namespace {

Isa detect() noexcept {
  Isa best = Isa::Scalar;
#if defined(FSAVG_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  if (__builtin_cpu_supports("avx2")) best = Isa::Avx2;
#endif
  if (const char* env = std::getenv("FSAVG_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return Isa::Scalar;
    if (want == "avx2" && best == Isa::Avx2) return Isa::Avx2;
  }
  return best;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> ptr{&table(detect())};
  return ptr;
}

std::atomic<Isa>& current_isa() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

bool supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(FSAVG_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

std::string_view name(Isa isa) noexcept {
  return isa == Isa::Avx2 ? "avx2" : "scalar";
}

const KernelTable& table(Isa isa) {
  if (!supported(isa)) throw UsageError("instruction set not supported: " + std::string(name(isa)));
#if defined(FSAVG_HAVE_AVX2)
  if (isa == Isa::Avx2) return avx2_table();
#endif
  return scalar_table();
}

Isa active_isa() noexcept { return current_isa().load(); }

void set_isa(Isa isa) {
  const KernelTable& t = table(isa);
  current().store(&t);
  current_isa().store(isa);
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_relaxed); }

}  // namespace fsavg::kernels
