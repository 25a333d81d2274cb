#include "fsavg/orderfn.hpp"

#include <algorithm>
#include <cmath>

#include "fsavg/ensemble.hpp"
#include "fsavg/error.hpp"
#include "fsavg/kernels.hpp"
#include "fsavg/ode.hpp"

namespace fsavg {

Vec XGrid::point(std::size_t g) const {
  const auto d = static_cast<std::size_t>(dim);
  return Vec(points.begin() + static_cast<std::ptrdiff_t>(g * d),
             points.begin() + static_cast<std::ptrdiff_t>((g + 1) * d));
}

XGrid make_xgrid(const SlowField& field, std::size_t divisions) {
  if (divisions == 0) throw UsageError("x grid needs at least one division");
  const auto d = static_cast<std::size_t>(field.dim());
  const double L1 = field.budget().L1;
  const std::size_t per_axis = 2 * divisions + 1;
  XGrid g;
  g.dim = field.dim();
  g.spacing = L1 / static_cast<double>(divisions);
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) total *= per_axis;
  g.points.resize(total * d);
  for (std::size_t p = 0; p < total; ++p) {
    std::size_t rest = p;
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t c = rest % per_axis;
      rest /= per_axis;
      g.points[p * d + i] =
          field.x0()[i] - L1 + static_cast<double>(c) * g.spacing;
    }
  }
  return g;
}

XGrid single_point_grid(const SlowField& field) {
  XGrid g;
  g.dim = field.dim();
  g.points = field.x0();
  return g;
}

XGrid default_xgrid(const SlowField& field, std::size_t divisions) {
  return field.x_independent() ? single_point_grid(field) : make_xgrid(field, divisions);
}

double grid_gap_bound(const SlowField& field, const XGrid& grid) {
  if (field.x_independent()) return 0.0;
  return 2.0 * field.L() * grid.spacing;
}

std::function<Vec(const PhasePoint&)> centered_observable(
    const SlowField& field, const std::function<Vec(const Vec&)>& abar_eps, const Vec& x,
    double eps) {
  const Vec mean = abar_eps(x);
  return [&field, mean, x, eps](const PhasePoint& y) {
    Vec v = field.eval(x, y, eps);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= mean[i];
    return v;
  };
}

BirkhoffMax birkhoff_max(const std::function<Vec(const PhasePoint&)>& v,
                         std::span<const PhasePoint> orbit, std::size_t N) {
  if (orbit.size() < N) throw UsageError("orbit shorter than the Birkhoff window");
  BirkhoffMax out;
  Vec s;
  for (std::size_t n = 1; n <= N; ++n) {
    const Vec vj = v(orbit[n - 1]);
    if (s.empty()) s.assign(vj.size(), 0.0);
    for (std::size_t i = 0; i < vj.size(); ++i) s[i] += vj[i];
    const double m = max_norm(s);
    if (m > out.value) {
      out.value = m;
      out.argmax = n;
    }
  }
  return out;
}

OrderFunctionSample order_function(const SlowField& field, std::span<const PhasePoint> orbit,
                                   double eps, const Vec& means, const XGrid& grid,
                                   std::vector<double>* per_point_max) {
  if (grid.size() == 0) throw UsageError("empty x grid");
  if (grid.dim != field.dim()) throw UsageError("x grid dimension differs from the field");
  if (orbit.empty()) throw UsageError("empty orbit");
  const std::size_t K = field.basis_size();
  if (means.size() != K) throw UsageError("basis means do not match the field");
  const auto d = static_cast<std::size_t>(field.dim());
  const std::size_t R = field.outputs();
  const std::size_t G = grid.size();
  const std::size_t lanes = G * R;
  const std::size_t N = orbit.size() - 1;

  std::vector<double> loads(K * lanes), W(R * K);
  for (std::size_t g = 0; g < G; ++g) {
    field.loadings(std::span<const double>(grid.points.data() + g * d, d), eps, W);
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t k = 0; k < K; ++k) loads[k * lanes + g * R + r] = W[r * K + k];
  }
  std::vector<double> runmax(lanes, 0.0), argn(lanes, 0.0), sums(K, 0.0), phi(K);
  const auto& kt = kernels::active();
  for (std::size_t n = 1; n <= N; ++n) {
    field.basis_values(orbit[n - 1], phi);
    for (std::size_t k = 0; k < K; ++k) sums[k] += phi[k] - means[k];
    kt.grid_fluctuation_max(loads.data(), lanes, sums.data(), K, lanes, runmax.data(),
                            argn.data(), static_cast<double>(n));
  }

  OrderFunctionSample out;
  out.eps = eps;
  out.grid_gap = grid_gap_bound(field, grid);
  double best1 = -1.0, best2 = -1.0;
  std::size_t lane1 = 0, lane2 = 0;
  for (std::size_t l = 0; l < lanes; ++l) {
    const std::size_t r = l % R;
    if (r < d) {
      if (runmax[l] > best1) { best1 = runmax[l]; lane1 = l; }
    } else {
      if (runmax[l] > best2) { best2 = runmax[l]; lane2 = l; }
    }
  }
  out.delta1 = eps * best1;
  out.delta2 = eps * best2;
  out.argmax_x1 = grid.point(lane1 / R);
  out.argmax_x2 = grid.point(lane2 / R);
  out.argmax_n1 = static_cast<std::size_t>(argn[lane1]);
  out.argmax_n2 = static_cast<std::size_t>(argn[lane2]);
  if (per_point_max) {
    per_point_max->assign(G, 0.0);
    for (std::size_t g = 0; g < G; ++g)
      for (std::size_t r = 0; r < d; ++r)
        (*per_point_max)[g] = std::max((*per_point_max)[g], runmax[g * R + r]);
  }
  return out;
}

OrderFunctionSample order_function(const SlowField& field, const FastFamily& family, double eps,
                                   const InitialCondition& y0, const Vec& means,
                                   const XGrid& grid) {
  const auto orbit = fast_orbit(family, eps, y0, steps_for(eps));
  return order_function(field, orbit, eps, means, grid);
}

MomentScalingResult moment_scaling_check(const SlowField& field, const FastFamily& family,
                                         const std::vector<double>& eps_list, double p,
                                         std::size_t samples, std::uint64_t seed,
                                         const MeasureOptions& measure, double bound) {
  if (samples < 100) throw UsageError("moment scaling needs at least 100 samples");
  if (!(p >= 1.0)) throw UsageError("moment order p must be at least 1");
  if (eps_list.empty()) throw UsageError("empty eps list");
  const XGrid grid = default_xgrid(field);
  const double d = field.dim();
  MomentScalingResult res;
  std::vector<double> ratios;
  for (double eps : eps_list) {
    const StationaryMeasure m = stationary_measure(family, eps, measure);
    const Vec means = basis_means(field, m);
    EnsembleSpec spec;
    spec.law = SamplingLaw::UlamStationary;
    spec.size = samples;
    spec.seed = seed;
    const InitialSampler sampler(family, eps, spec, &m);
    const std::size_t N = steps_for(eps);
    double dm = 0.0;
    std::vector<double> per(grid.size(), 0.0), acc(grid.size(), 0.0);
    for (std::size_t s = 0; s < samples; ++s) {
      const auto orbit = fast_orbit(family, eps, sampler.draw(s, N), N);
      const OrderFunctionSample o = order_function(field, orbit, eps, means, grid, &per);
      dm += std::pow(o.delta1, p + d);
      for (std::size_t g = 0; g < grid.size(); ++g) acc[g] += std::pow(per[g], p);
    }
    dm /= static_cast<double>(samples);
    const double sm = *std::max_element(acc.begin(), acc.end()) / static_cast<double>(samples);
    res.delta_moment.push_back(dm);
    res.sum_moment.push_back(sm);
    ratios.push_back(sm > 0.0 ? dm / (std::pow(eps, p) * sm) : 0.0);
  }
  res.max_ratio = *std::max_element(ratios.begin(), ratios.end());
  res.bounded = std::all_of(ratios.begin(), ratios.end(),
                            [&](double r) { return std::isfinite(r) && r <= bound; });
  res.ratios = rate_series_default(eps_list, std::move(ratios));
  return res;
}

}  // namespace fsavg
