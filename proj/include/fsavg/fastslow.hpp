#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fsavg/field.hpp"
#include "fsavg/maps.hpp"
#include "fsavg/ode.hpp"

namespace fsavg {

/// Slow samples x_0..x_N of one run, row-major with `dim` entries per step.
/// The continuous-time path is the staircase xhat(t) = x_[t/eps].
struct SlowPath {
  double eps = 0.0;
  int dim = 0;
  std::vector<double> x;

  std::size_t steps() const { return x.size() / static_cast<std::size_t>(dim) - 1; }
  std::span<const double> at(std::size_t n) const {
    return {x.data() + n * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  /// xhat(t) for t in [0, 1].
  std::span<const double> hat(double t) const;
};

struct FastSlowRun {
  SlowPath path;
  std::vector<PhasePoint> orbit;  ///< y_0..y_N
};

/// x_{n+1} = x_n + eps a(x_n, y_n, eps) along a precomputed fast orbit
/// (orbit.size() - 1 steps).
SlowPath iterate_slow(const SlowField& field, double eps, std::span<const PhasePoint> orbit);

/// Full coupled run with N = floor(1/eps) steps.
FastSlowRun iterate_fast_slow(const SlowField& field, const FastFamily& family, double eps,
                              const InitialCondition& y0);

/// sup_t |xhat(t) - X(t)| over the ODE grid, including left limits at the
/// jump times n*eps. The grid must contain every n*eps (see `time_grid`).
double deviation_z(const SlowPath& path, const OdePath& X);

/// Largest |x_{n+1} - x_n|.
double max_increment(const SlowPath& path);

}  // namespace fsavg
