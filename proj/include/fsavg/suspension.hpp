#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fsavg/density.hpp"
#include "fsavg/field.hpp"
#include "fsavg/maps.hpp"
#include "fsavg/orderfn.hpp"

namespace fsavg {

enum class RoofKind { Constant, Sine };

/// h_eps(y) = level + amplitude sin(2 pi y) + eps_slope * eps.
struct Roof {
  RoofKind kind = RoofKind::Constant;
  double level = 1.0;
  double amplitude = 0.0;
  double eps_slope = 0.0;

  static Roof constant(double level = 1.0);
  static Roof sine(double amplitude = 0.5, double level = 1.0);

  double operator()(double y, double eps) const;
  double sup(double eps_max) const;
  double inf(double eps_max) const;
  double lip() const;
  /// max(2, Lip h, sup h, 1/inf h, |dh/deps|) over eps in [0, eps_max].
  double K1(double eps_max) const;
};

std::string to_string(RoofKind kind);
RoofKind roof_kind_from_string(const std::string& s);

/// Point (y, u) of the suspension, 0 <= u < h_eps(y).
struct FlowPoint {
  PhasePoint y;
  double u = 0.0;
};

class SuspensionFlow {
 public:
  /// K2 <= 0 means "not declared"; `estimate_K2` can fill it in.
  SuspensionFlow(FastFamily base, Roof roof, double eps_max, double K2 = 0.0);

  const FastFamily& base() const { return base_; }
  const Roof& roof() const { return roof_; }
  double K1() const { return K1_; }
  double K2() const { return K2_; }
  void set_K2(double k2) { K2_ = k2; }

  /// f_t(y, u) = (y, u + t) modulo (y, h(y)) ~ (T y, 0).
  FlowPoint flow(double eps, FlowPoint p, double t, std::size_t* rollovers = nullptr) const;

 private:
  FastFamily base_;
  Roof roof_;
  double K1_;
  double K2_;
};

/// v(y, u) on the suspension.
using FlowObservable = std::function<double(const PhasePoint&, double)>;

/// int_0^t v(f_s(y, u)) ds by the composite trapezoid rule on every fiber
/// segment, split exactly at the rollover times; step at most dt.
double continuous_fluctuation_integral(const FlowObservable& v, const SuspensionFlow& fs,
                                       double eps, FlowPoint p, double t, double dt);

/// w(y) = int_0^{h(y)} v(y, u) du, same quadrature.
double induced_flow_observable(const FlowObservable& v, const SuspensionFlow& fs, double eps,
                               const PhasePoint& y, double dt = 1.0 / 64.0);

/// Sampled two-point expansion of the flow over times <= K1, and the
/// eps-perturbation ratio d(f_t^eps, f_t^0) / eps; returns max(K1, both).
double estimate_K2(const SuspensionFlow& fs, double eps, std::size_t samples, std::uint64_t seed);

/// sup |g| + sampled Lipschitz constant of g on the base phase space.
double lipschitz_norm_estimate(const std::function<double(double)>& g, const PhaseSpace& space,
                               std::size_t samples, std::uint64_t seed);

/// Basis means of the field under the flow-invariant measure
/// (base measure times Lebesgue on fibers, normalized by mean roof).
Vec flow_basis_means(const SlowField& field, const SuspensionFlow& fs, double eps,
                     const StationaryMeasure& base_measure);

/// Continuous order function at (y0, u0): sup over the grid and t <= 1/eps of
/// eps |int_0^t v_{eps,x}(f_s) ds| (and the Dv part), exact for fields that
/// read only the base point. `orbit` is the base orbit of y0, long enough.
OrderFunctionSample flow_order_function(const SlowField& field, const SuspensionFlow& fs,
                                        double eps, std::span<const PhasePoint> orbit, double u0,
                                        const Vec& flow_means, const XGrid& grid);

/// Delta_1(y) = sup_x sup_{1<=n<=1+K1/eps} eps |sum_{j<n} w_{eps,x}(y_j)|.
double induced_order_function(const SlowField& field, const SuspensionFlow& fs, double eps,
                              std::span<const PhasePoint> orbit, const Vec& flow_means,
                              const XGrid& grid);

/// Base orbit long enough for flow time 1/eps (1 + K1/eps + 1 returns).
std::vector<PhasePoint> flow_base_orbit(const SuspensionFlow& fs, double eps,
                                        const InitialCondition& y0);

struct VwComparison {
  double delta_q = 0.0;  ///< |delta_1|_{L^q(nu_eps)} estimate
  double Delta_q = 0.0;  ///< |Delta_1|_{L^q(nu'_eps)} estimate
  double additive = 0.0; ///< 4 K1 L eps
  double margin = 0.0;   ///< 99% Monte Carlo margin on both estimates
  std::size_t samples = 0;
  double rhs() const { return Delta_q + additive + margin; }
  bool holds() const { return delta_q <= rhs(); }
};

/// Monte Carlo comparison of the flow order function with the induced one.
/// Base points are drawn from `base_measure`, fibers uniformly, and the
/// flow measure is represented by roof weights.
VwComparison vw_comparison(const SlowField& field, const SuspensionFlow& fs, double eps,
                           const StationaryMeasure& base_measure, std::size_t samples, double q,
                           const XGrid& grid, std::uint64_t seed);

/// S_eps for the flow measures.
double flow_stability_S(const SlowField& field, const SuspensionFlow& fs, double eps,
                        const StationaryMeasure& m_eps, const StationaryMeasure& m_0,
                        const XGrid& grid);

struct FlowTheoremCheck {
  double z = 0.0;
  double delta = 0.0;  ///< relaxed continuous order function
  double S = 0.0;
  double bound = 0.0;  ///< 6 e^{2L} (delta + S)
  bool applicable = false;
  bool holds() const { return !applicable || z <= bound; }
};

/// Continuous-time fast-slow run dx/dt = eps a(x, y(t), eps) integrated by RK4
/// with steps <= min(1e-3 / eps, fiber segment), compared against the
/// averaged ODE; the deviation bound applies when delta <= 1/2. `trace`, when
/// given, receives rows (t, y, u, x_1..x_d) at the start of every fiber
/// segment and at t = 1, with t in rescaled time.
FlowTheoremCheck flow_theorem_check(const SlowField& field, const SuspensionFlow& fs, double eps,
                                    const InitialCondition& y0, double u0,
                                    const StationaryMeasure& m_eps, const StationaryMeasure& m_0,
                                    const XGrid& grid, double ode_step = 1e-3,
                                    std::vector<double>* trace = nullptr);

struct SsFlowCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds() const { return lhs <= rhs; }
};

/// |int v (dnu_eps - dnu_0)| against
/// 3 K2^4 ||v||_Lip eps + K1^3 |v|_inf |int h_0 (dnu'_eps - dnu'_0)| + K1 |int h_0 v (dnu'_eps - dnu'_0)|
/// for an observable reading only the base point.
SsFlowCheck ssflow_check(const std::function<double(const PhasePoint&)>& v, double v_lip_norm,
                         const SuspensionFlow& fs, double eps, const StationaryMeasure& m_eps,
                         const StationaryMeasure& m_0);

}  // namespace fsavg
