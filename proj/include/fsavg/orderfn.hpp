#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "fsavg/density.hpp"
#include "fsavg/field.hpp"
#include "fsavg/maps.hpp"
#include "fsavg/stats.hpp"

namespace fsavg {

/// Finite set of slow states standing in for E = {|x - x0| <= L1}.
struct XGrid {
  int dim = 0;
  double spacing = 0.0;  ///< mesh h_x (0 for a single point)
  std::vector<double> points;  ///< row-major

  std::size_t size() const { return dim == 0 ? 0 : points.size() / static_cast<std::size_t>(dim); }
  Vec point(std::size_t g) const;
};

/// Uniform mesh on E with spacing L1 / divisions (2 * divisions + 1 points per axis).
XGrid make_xgrid(const SlowField& field, std::size_t divisions = 16);
/// The single point x0, enough for fields that do not depend on x.
XGrid single_point_grid(const SlowField& field);
/// Default grid: single point for x-independent fields, the uniform mesh otherwise.
XGrid default_xgrid(const SlowField& field, std::size_t divisions = 16);

struct OrderFunctionSample {
  double eps = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  Vec argmax_x1;
  Vec argmax_x2;
  std::size_t argmax_n1 = 0;
  std::size_t argmax_n2 = 0;
  /// Bound on how far each grid sup can sit below the sup over E (2 L h_x,
  /// zero for x-independent fields).
  double grid_gap = 0.0;

  double delta() const { return delta1 + delta2; }
  /// delta plus the grid gap of both parts.
  double relaxed() const { return delta1 + delta2 + 2.0 * grid_gap; }
};

/// y -> v_{eps,x}(y) = a(x, y, eps) - abar(x, eps).
std::function<Vec(const PhasePoint&)> centered_observable(
    const SlowField& field, const std::function<Vec(const Vec&)>& abar_eps, const Vec& x,
    double eps);

struct BirkhoffMax {
  double value = 0.0;
  std::size_t argmax = 0;
};

/// max_{1<=n<=N} |sum_{j<n} v(y_j)| (max-norm) along orbit[0..N-1].
BirkhoffMax birkhoff_max(const std::function<Vec(const PhasePoint&)>& v,
                         std::span<const PhasePoint> orbit, std::size_t N);

/// Order functions delta1, delta2 on the grid along a stored orbit with
/// N = orbit.size() - 1 steps. `means` are the basis means under nu_eps.
/// When `per_point_max` is non-null it receives, for every grid point,
/// max_n |v_{eps,x,n}| (max over components), unscaled.
OrderFunctionSample order_function(const SlowField& field, std::span<const PhasePoint> orbit,
                                   double eps, const Vec& means, const XGrid& grid,
                                   std::vector<double>* per_point_max = nullptr);

/// Convenience wrapper computing the orbit of y0 first.
OrderFunctionSample order_function(const SlowField& field, const FastFamily& family, double eps,
                                   const InitialCondition& y0, const Vec& means,
                                   const XGrid& grid);

double grid_gap_bound(const SlowField& field, const XGrid& grid);

struct MomentScalingResult {
  RateSeries ratios;  ///< abscissa eps, values r(eps)
  std::vector<double> delta_moment;  ///< Monte Carlo int delta1^(p+d)
  std::vector<double> sum_moment;    ///< sup_x Monte Carlo int max_n |v_{x,n}|^p
  double max_ratio = 0.0;
  bool bounded = false;
};

/// Ratio series r(eps) = int delta1^(p+d) / (eps^p sup_x int max_n|v_{x,n}|^p)
/// over `samples` initial conditions drawn from the measure of each eps.
/// `bounded` is true when every ratio is finite and at most `bound`.
MomentScalingResult moment_scaling_check(const SlowField& field, const FastFamily& family,
                                         const std::vector<double>& eps_list, double p,
                                         std::size_t samples, std::uint64_t seed,
                                         const MeasureOptions& measure = {},
                                         double bound = std::numeric_limits<double>::infinity());

}  // namespace fsavg
