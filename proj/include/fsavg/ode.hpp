#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fsavg/field.hpp"

namespace fsavg {

/// Autonomous vector field X -> f(X) on R^d.
using VectorField = std::function<void(std::span<const double> x, std::span<double> out)>;

/// Samples of an ODE solution: x is row-major, one row of length dim per time.
struct OdePath {
  int dim = 0;
  std::vector<double> t;
  std::vector<double> x;

  std::size_t size() const { return t.size(); }
  std::span<const double> at(std::size_t i) const {
    return {x.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

/// Number of slow steps floor(1/eps), robust to rounding of 1/eps.
std::size_t steps_for(double eps);

/// Index n with n*eps <= t < (n+1)*eps, using the same products n*eps as
/// `time_grid`, so grid points of the form n*eps land exactly on n.
std::size_t stair_index(double t, double eps);

/// Sorted union of {n*eps : 0 <= n <= floor(1/eps)}, {j*step} and {1} on [0, 1].
std::vector<double> time_grid(double eps, double step = 1e-3);

/// Classical RK4 on the given sorted grid in [0, 1]. Each grid interval is
/// split into equal substeps no longer than `max_step`.
OdePath solve_averaged_ode(const VectorField& abar, const Vec& x0, const std::vector<double>& grid,
                           double max_step = 1e-3);

}  // namespace fsavg
