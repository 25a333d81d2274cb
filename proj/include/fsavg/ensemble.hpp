#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fsavg/density.hpp"
#include "fsavg/maps.hpp"

namespace fsavg {

enum class SamplingLaw { Lebesgue, UlamStationary, Fixed, BurnIn };

std::string to_string(SamplingLaw law);
SamplingLaw sampling_law_from_string(const std::string& s);

struct EnsembleSpec {
  SamplingLaw law = SamplingLaw::Lebesgue;
  std::size_t size = 1000;
  std::uint64_t seed = 1;
  std::vector<double> fixed;      ///< points for SamplingLaw::Fixed
  std::size_t burn_in = 1000;     ///< steps for SamplingLaw::BurnIn
};

/// Draws initial conditions; draw i uses the random stream (seed, i), so the
/// ensemble does not depend on the order in which draws happen.
class InitialSampler {
 public:
  /// `measure` is required for SamplingLaw::UlamStationary.
  InitialSampler(const FastFamily& family, double eps, EnsembleSpec spec,
                 const StationaryMeasure* measure = nullptr);

  /// Initial condition number `index` for an orbit of `steps` steps. Doubling-drift
  /// families get exact random digits for the whole orbit length.
  InitialCondition draw(std::size_t index, std::size_t steps) const;

  const EnsembleSpec& spec() const { return spec_; }

 private:
  PhasePoint lebesgue(CounterRng& rng) const;

  const FastFamily* family_;
  double eps_;
  EnsembleSpec spec_;
  std::optional<MeasureSampler> sampler_;
};

/// Calls fn(i) for i in [0, n) on up to `threads` threads (0 = hardware
/// concurrency). Work is split by index, so results written to slot i are
/// independent of the thread count. The first exception is rethrown.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace fsavg
