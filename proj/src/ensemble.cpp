#include "fsavg/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "fsavg/error.hpp"

namespace fsavg {

std::string to_string(SamplingLaw law) {
  switch (law) {
    case SamplingLaw::Lebesgue: return "lebesgue";
    case SamplingLaw::UlamStationary: return "ulam-stationary";
    case SamplingLaw::Fixed: return "fixed";
    case SamplingLaw::BurnIn: return "burn-in";
  }
  return "?";
}

SamplingLaw sampling_law_from_string(const std::string& s) {
  for (auto l : {SamplingLaw::Lebesgue, SamplingLaw::UlamStationary, SamplingLaw::Fixed,
                 SamplingLaw::BurnIn})
    if (to_string(l) == s) return l;
  throw UsageError("unknown sampling law '" + s + "'");
}

InitialSampler::InitialSampler(const FastFamily& family, double eps, EnsembleSpec spec,
                               const StationaryMeasure* measure)
    : family_(&family), eps_(eps), spec_(std::move(spec)) {
  if (spec_.size < 1) throw UsageError("ensemble size must be at least 1");
  if (spec_.law == SamplingLaw::UlamStationary) {
    if (!measure) throw UsageError("stationary sampling needs a measure");
    sampler_.emplace(*measure);
  }
  if (spec_.law == SamplingLaw::Fixed && spec_.fixed.empty())
    throw UsageError("fixed sampling needs at least one point");
}

PhasePoint InitialSampler::lebesgue(CounterRng& rng) const {
  const PhaseSpace& s = family_->phase_space();
  PhasePoint p;
  p.y = rng.uniform(s.lo, s.hi);
  if (s.kind == PhaseSpaceKind::Cylinder) p.theta = rng.uniform();
  return p;
}

InitialCondition InitialSampler::draw(std::size_t index, std::size_t steps) const {
  CounterRng rng(spec_.seed, index);
  const bool doubling = family_->kind() == FamilyKind::DoublingDrift;
  const std::size_t bits = steps + 192;
  InitialCondition ic;
  switch (spec_.law) {
    case SamplingLaw::Fixed:
      ic.point.y = spec_.fixed[index % spec_.fixed.size()];
      return ic;
    case SamplingLaw::Lebesgue:
      if (doubling) {
        ic.digits = BinaryExpansion::random(rng, bits);
        ic.point.y = ic.digits->value();
        return ic;
      }
      ic.point = lebesgue(rng);
      return ic;
    case SamplingLaw::UlamStationary:
      ic.point = (*sampler_)(rng);
      if (doubling) {
        BinaryExpansion e = BinaryExpansion::from_double(ic.point.y);
        e.randomize_tail(53, bits, rng);
        ic.point.y = e.value();
        ic.digits = std::move(e);
      }
      return ic;
    case SamplingLaw::BurnIn: {
      if (doubling) {
        // Lebesgue measure is invariant for every drift, so burning in a
        // Lebesgue draw does not change its law.
        ic.digits = BinaryExpansion::random(rng, bits);
        ic.point.y = ic.digits->value();
        return ic;
      }
      InitialCondition start;
      start.point = lebesgue(rng);
      ic.point = fast_orbit(*family_, eps_, start, spec_.burn_in).back();
      return ic;
    }
  }
  return ic;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex m;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(m);
        if (!first) first = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

}  // namespace fsavg
