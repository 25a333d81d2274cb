#include "fsavg/suspension.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fsavg/ensemble.hpp"
#include "fsavg/error.hpp"
#include "fsavg/kernels.hpp"
#include "fsavg/ode.hpp"
#include "fsavg/rng.hpp"
#include "fsavg/stats.hpp"

namespace fsavg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double base_distance(const PhaseSpace& s, double a, double b) {
  const double d = std::fabs(a - b);
  return s.kind == PhaseSpaceKind::Circle ? std::min(d, 1.0 - d) : d;
}

// Running max of eps-free weighted fluctuation sums over a grid, one kernel
// call per increment. Increment j adds len[j] * (phi(y_j) - means).
struct LaneScan {
  const SlowField& field;
  const XGrid& grid;
  std::size_t K, R, lanes;
  std::vector<double> loads, runmax, argn, sums, phi;

  LaneScan(const SlowField& f, const XGrid& g, double eps, const Vec& means)
      : field(f), grid(g), K(f.basis_size()), R(f.outputs()), lanes(g.size() * R),
        loads(K * lanes), runmax(lanes, 0.0), argn(lanes, 0.0), sums(K, 0.0), phi(K) {
    if (g.size() == 0) throw UsageError("empty x grid");
    if (means.size() != K) throw UsageError("basis means do not match the field");
    const auto d = static_cast<std::size_t>(f.dim());
    std::vector<double> W(R * K);
    for (std::size_t p = 0; p < g.size(); ++p) {
      f.loadings(std::span<const double>(g.points.data() + p * d, d), eps, W);
      for (std::size_t r = 0; r < R; ++r)
        for (std::size_t k = 0; k < K; ++k) loads[k * lanes + p * R + r] = W[r * K + k];
    }
  }

  void add(const PhasePoint& y, double len, const Vec& means, double tag) {
    field.basis_values(y, phi);
    for (std::size_t k = 0; k < K; ++k) sums[k] += len * (phi[k] - means[k]);
    kernels::active().grid_fluctuation_max(loads.data(), lanes, sums.data(), K, lanes,
                                           runmax.data(), argn.data(), tag);
  }

  OrderFunctionSample result(double eps) const {
    const auto d = static_cast<std::size_t>(field.dim());
    OrderFunctionSample out;
    out.eps = eps;
    out.grid_gap = grid_gap_bound(field, grid);
    double b1 = -1.0, b2 = -1.0;
    std::size_t l1 = 0, l2 = 0;
    for (std::size_t l = 0; l < lanes; ++l) {
      if (l % R < d) {
        if (runmax[l] > b1) { b1 = runmax[l]; l1 = l; }
      } else if (runmax[l] > b2) {
        b2 = runmax[l];
        l2 = l;
      }
    }
    out.delta1 = eps * b1;
    out.delta2 = eps * std::max(0.0, b2);
    out.argmax_x1 = grid.point(l1 / R);
    out.argmax_x2 = grid.point(l2 / R);
    out.argmax_n1 = static_cast<std::size_t>(argn[l1]);
    out.argmax_n2 = static_cast<std::size_t>(argn[l2]);
    return out;
  }
};

}  // namespace

Roof Roof::constant(double level) {
  Roof r;
  r.kind = RoofKind::Constant;
  r.level = level;
  return r;
}

Roof Roof::sine(double amplitude, double level) {
  Roof r;
  r.kind = RoofKind::Sine;
  r.level = level;
  r.amplitude = amplitude;
  return r;
}

double Roof::operator()(double y, double eps) const {
  const double base = kind == RoofKind::Sine ? level + amplitude * std::sin(kTwoPi * y) : level;
  return base + eps_slope * eps;
}

double Roof::sup(double eps_max) const {
  return level + (kind == RoofKind::Sine ? std::fabs(amplitude) : 0.0) +
         std::max(0.0, eps_slope * eps_max);
}

double Roof::inf(double eps_max) const {
  return level - (kind == RoofKind::Sine ? std::fabs(amplitude) : 0.0) +
         std::min(0.0, eps_slope * eps_max);
}

double Roof::lip() const { return kind == RoofKind::Sine ? kTwoPi * std::fabs(amplitude) : 0.0; }

double Roof::K1(double eps_max) const {
  const double lo = inf(eps_max);
  if (!(lo > 0.0)) throw PreconditionError("roof must be bounded away from zero");
  return std::max({2.0, lip(), sup(eps_max), 1.0 / lo, std::fabs(eps_slope)});
}

std::string to_string(RoofKind kind) { return kind == RoofKind::Constant ? "constant" : "sine"; }

RoofKind roof_kind_from_string(const std::string& s) {
  if (s == "constant") return RoofKind::Constant;
  if (s == "sine") return RoofKind::Sine;
  throw UsageError("unknown roof '" + s + "'");
}

SuspensionFlow::SuspensionFlow(FastFamily base, Roof roof, double eps_max, double K2)
    : base_(std::move(base)), roof_(roof), K1_(roof_.K1(eps_max)), K2_(K2) {
  if (!base_.one_dimensional()) throw UsageError("suspensions need a one-dimensional base");
}

FlowPoint SuspensionFlow::flow(double eps, FlowPoint p, double t, std::size_t* rollovers) const {
  if (!(t >= 0.0)) throw UsageError("flow time must be nonnegative");
  const double param = base_.parameter(eps);
  double h = roof_(p.y.y, eps);
  if (!std::isfinite(h)) throw NumericError("roof is not finite", 0);
  if (!(p.u >= 0.0 && p.u < h)) throw DomainError("fiber coordinate outside [0, h(y))");
  std::size_t count = 0;
  double rem = t;
  while (p.u + rem >= h) {
    rem -= h - p.u;
    p.y = base_.step(param, p.y);
    p.u = 0.0;
    h = roof_(p.y.y, eps);
    ++count;
    if (!std::isfinite(h)) throw NumericError("roof is not finite", count);
  }
  p.u += rem;
  if (rollovers) *rollovers = count;
  return p;
}

namespace {

double trapezoid(const FlowObservable& v, const PhasePoint& y, double a, double b, double dt) {
  const double len = b - a;
  if (!(len > 0.0)) return 0.0;
  const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / dt)));
  const double h = len / static_cast<double>(m);
  double s = 0.5 * (v(y, a) + v(y, b));
  for (std::size_t i = 1; i < m; ++i) s += v(y, a + static_cast<double>(i) * h);
  return s * h;
}

}  // namespace

double continuous_fluctuation_integral(const FlowObservable& v, const SuspensionFlow& fs,
                                       double eps, FlowPoint p, double t, double dt) {
  if (!(dt > 0.0) || dt > fs.K1() / 64.0) throw UsageError("dt must lie in (0, K1/64]");
  if (!(t >= 0.0)) throw UsageError("integration time must be nonnegative");
  const double param = fs.base().parameter(eps);
  double rem = t, acc = 0.0;
  while (rem > 0.0) {
    const double h = fs.roof()(p.y.y, eps);
    const double room = h - p.u;
    if (rem >= room) {
      acc += trapezoid(v, p.y, p.u, h, dt);
      rem -= room;
      p.y = fs.base().step(param, p.y);
      p.u = 0.0;
    } else {
      acc += trapezoid(v, p.y, p.u, p.u + rem, dt);
      rem = 0.0;
    }
  }
  return acc;
}

double induced_flow_observable(const FlowObservable& v, const SuspensionFlow& fs, double eps,
                               const PhasePoint& y, double dt) {
  return trapezoid(v, y, 0.0, fs.roof()(y.y, eps), dt);
}

double estimate_K2(const SuspensionFlow& fs, double eps, std::size_t samples, std::uint64_t seed) {
  const PhaseSpace& s = fs.base().phase_space();
  CounterRng rng(seed, 0);
  double k2 = fs.K1();
  constexpr double h = 1e-9;
  for (std::size_t i = 0; i < samples; ++i) {
    FlowPoint a{{rng.uniform(s.lo, s.hi - 2 * h), 0.0}, 0.0};
    FlowPoint b = a;
    b.y.y += h;
    const double ha = fs.roof()(a.y.y, eps), hb = fs.roof()(b.y.y, eps);
    a.u = b.u = rng.uniform() * std::min(ha, hb);
    const double t = rng.uniform() * fs.K1();
    std::size_t ra = 0, rb = 0, r0 = 0;
    const FlowPoint fa = fs.flow(eps, a, t, &ra);
    const FlowPoint fb = fs.flow(eps, b, t, &rb);
    if (ra == rb) {
      const double d = base_distance(s, fa.y.y, fb.y.y) + std::fabs(fa.u - fb.u);
      k2 = std::max(k2, d / h);
    }
    if (eps > 0.0 && a.u < fs.roof()(a.y.y, 0.0)) {
      const FlowPoint f0 = fs.flow(0.0, a, t, &r0);
      if (r0 == ra) {
        const double d = base_distance(s, fa.y.y, f0.y.y) + std::fabs(fa.u - f0.u);
        k2 = std::max(k2, d / eps);
      }
    }
  }
  return k2;
}

double lipschitz_norm_estimate(const std::function<double(double)>& g, const PhaseSpace& space,
                               std::size_t samples, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  const double width = space.hi - space.lo;
  const double h = 1e-6 * width;
  double sup = 0.0, lip = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double a = space.lo + rng.uniform() * (width - h);
    const double ga = g(a), gb = g(a + h);
    sup = std::max({sup, std::fabs(ga), std::fabs(gb)});
    lip = std::max(lip, std::fabs(ga - gb) / h);
  }
  return sup + lip;
}

Vec flow_basis_means(const SlowField& field, const SuspensionFlow& fs, double eps,
                     const StationaryMeasure& base_measure) {
  const std::size_t K = field.basis_size();
  Vec out(K, 0.0);
  std::vector<double> phi(K);
  double hbar = 0.0;
  for (std::size_t i = 0; i < base_measure.weights.size(); ++i) {
    const double w = base_measure.weights[i];
    if (w == 0.0) continue;
    const PhasePoint c = base_measure.bins.center(i);
    const double h = fs.roof()(c.y, eps);
    field.basis_values(c, phi);
    for (std::size_t k = 0; k < K; ++k) out[k] += w * h * phi[k];
    hbar += w * h;
  }
  for (double& v : out) v /= hbar;
  return out;
}

std::vector<PhasePoint> flow_base_orbit(const SuspensionFlow& fs, double eps,
                                        const InitialCondition& y0) {
  const auto steps = static_cast<std::size_t>(std::ceil(1.0 + fs.K1() / eps)) + 2;
  return fast_orbit(fs.base(), eps, y0, steps);
}

OrderFunctionSample flow_order_function(const SlowField& field, const SuspensionFlow& fs,
                                        double eps, std::span<const PhasePoint> orbit, double u0,
                                        const Vec& flow_means, const XGrid& grid) {
  LaneScan scan(field, grid, eps, flow_means);
  const double T = 1.0 / eps;
  double elapsed = 0.0;
  for (std::size_t j = 0;; ++j) {
    if (j >= orbit.size()) throw UsageError("base orbit too short for flow time 1/eps");
    const double h = fs.roof()(orbit[j].y, eps);
    double len = j == 0 ? h - u0 : h;
    if (j == 0 && !(len > 0.0)) throw DomainError("fiber coordinate outside [0, h(y))");
    const bool last = elapsed + len >= T;
    if (last) len = T - elapsed;
    scan.add(orbit[j], len, flow_means, elapsed + len);
    elapsed += len;
    if (last) break;
  }
  return scan.result(eps);
}

double induced_order_function(const SlowField& field, const SuspensionFlow& fs, double eps,
                              std::span<const PhasePoint> orbit, const Vec& flow_means,
                              const XGrid& grid) {
  LaneScan scan(field, grid, eps, flow_means);
  const auto n_max = static_cast<std::size_t>(std::floor(1.0 + fs.K1() / eps));
  if (orbit.size() < n_max) throw UsageError("base orbit too short for the induced order function");
  for (std::size_t j = 0; j < n_max; ++j)
    scan.add(orbit[j], fs.roof()(orbit[j].y, eps), flow_means, static_cast<double>(j + 1));
  return scan.result(eps).delta1;
}

VwComparison vw_comparison(const SlowField& field, const SuspensionFlow& fs, double eps,
                           const StationaryMeasure& base_measure, std::size_t samples, double q,
                           const XGrid& grid, std::uint64_t seed) {
  if (samples < 100) throw UsageError("comparison needs at least 100 samples");
  if (!(q >= 1.0)) throw UsageError("q must be at least 1");
  const Vec means = flow_basis_means(field, fs, eps, base_measure);
  EnsembleSpec spec;
  spec.law = SamplingLaw::UlamStationary;
  spec.size = samples;
  spec.seed = seed;
  const InitialSampler sampler(fs.base(), eps, spec, &base_measure);
  const auto steps = static_cast<std::size_t>(std::ceil(1.0 + fs.K1() / eps)) + 2;

  std::vector<double> dq(samples), Dq(samples), wts(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const InitialCondition ic = sampler.draw(i, steps);
    const auto orbit = fast_orbit(fs.base(), eps, ic, steps);
    const double h = fs.roof()(orbit[0].y, eps);
    CounterRng fiber(seed ^ 0x9e3779b97f4a7c15ULL, i);
    const double u = fiber.uniform() * h;
    dq[i] = std::pow(flow_order_function(field, fs, eps, orbit, u, means, grid).delta1, q);
    Dq[i] = std::pow(induced_order_function(field, fs, eps, orbit, means, grid), q);
    wts[i] = h;
  }
  double wsum = 0.0, Md = 0.0, MD = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    wsum += wts[i];
    Md += wts[i] * dq[i];
    MD += Dq[i];
  }
  Md /= wsum;
  MD /= static_cast<double>(samples);
  double vd = 0.0;
  for (std::size_t i = 0; i < samples; ++i) vd += wts[i] * wts[i] * (dq[i] - Md) * (dq[i] - Md);
  const double se_d = std::sqrt(vd) / wsum;
  const double se_D = standard_error(Dq);
  auto norm_se = [q](double M, double se) {
    return M > 0.0 ? std::pow(M, 1.0 / q - 1.0) * se / q : 0.0;
  };

  VwComparison out;
  out.samples = samples;
  out.delta_q = std::pow(Md, 1.0 / q);
  out.Delta_q = std::pow(MD, 1.0 / q);
  out.additive = 4.0 * fs.K1() * field.L() * eps;
  out.margin = 2.576 * (norm_se(Md, se_d) + norm_se(MD, se_D));
  return out;
}

double flow_stability_S(const SlowField& field, const SuspensionFlow& fs, double eps,
                        const StationaryMeasure& m_eps, const StationaryMeasure& m_0,
                        const XGrid& grid) {
  if (!(m_eps.bins == m_0.bins)) throw UsageError("flow measures need the same bins");
  const Vec me = flow_basis_means(field, fs, eps, m_eps);
  const Vec m0 = flow_basis_means(field, fs, 0.0, m_0);
  Vec diff(me.size());
  for (std::size_t k = 0; k < me.size(); ++k) diff[k] = me[k] - m0[k];
  double best = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g)
    best = std::max(best, max_norm(averaged_field(field, diff, 0.0, grid.point(g))));
  return best + eps;
}

FlowTheoremCheck flow_theorem_check(const SlowField& field, const SuspensionFlow& fs, double eps,
                                    const InitialCondition& y0, double u0,
                                    const StationaryMeasure& m_eps, const StationaryMeasure& m_0,
                                    const XGrid& grid, double ode_step,
                                    std::vector<double>* trace) {
  const auto d = static_cast<std::size_t>(field.dim());
  const double L = field.L();
  const auto orbit = flow_base_orbit(fs, eps, y0);
  if (trace) trace->clear();
  auto record = [&](double t, const PhasePoint& y, double u, const Vec& x) {
    if (!trace) return;
    trace->push_back(t);
    trace->push_back(y.y);
    trace->push_back(u);
    trace->insert(trace->end(), x.begin(), x.end());
  };
  const Vec means_eps = flow_basis_means(field, fs, eps, m_eps);
  const Vec means_0 = flow_basis_means(field, fs, 0.0, m_0);

  FlowTheoremCheck out;
  out.delta = flow_order_function(field, fs, eps, orbit, u0, means_eps, grid).relaxed();
  out.S = flow_stability_S(field, fs, eps, m_eps, m_0, grid);
  out.bound = 6.0 * std::exp(2.0 * L) * (out.delta + out.S);
  out.applicable = out.delta <= 0.5;

  auto abar0 = averaged_vector_field(field, means_0, 0.0);
  Vec x = field.x0(), X = field.x0();
  Vec k1(d), k2(d), k3(d), k4(d), tmp(d);
  auto rk4 = [&](Vec& s, double h, const auto& f) {
    f(s, k1);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = s[i] + 0.5 * h * k1[i];
    f(tmp, k2);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = s[i] + 0.5 * h * k2[i];
    f(tmp, k3);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = s[i] + h * k3[i];
    f(tmp, k4);
    for (std::size_t i = 0; i < d; ++i) s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  };

  const double T = 1.0 / eps;
  double elapsed = 0.0;
  for (std::size_t j = 0;; ++j) {
    if (j >= orbit.size()) throw UsageError("base orbit too short for flow time 1/eps");
    double len = fs.roof()(orbit[j].y, eps) - (j == 0 ? u0 : 0.0);
    const bool last = elapsed + len >= T;
    if (last) len = T - elapsed;
    const double span = eps * len;
    const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span / ode_step)));
    const double h = span / static_cast<double>(m);
    const PhasePoint y = orbit[j];
    record(eps * elapsed, y, j == 0 ? u0 : 0.0, x);
    auto slow = [&](std::span<const double> s, std::span<double> o) { field.eval(s, y, eps, o); };
    auto avg = [&](std::span<const double> s, std::span<double> o) { abar0(s, o); };
    for (std::size_t s = 0; s < m; ++s) {
      rk4(x, h, slow);
      rk4(X, h, avg);
      out.z = std::max(out.z, max_norm_diff(x, X));
    }
    for (double v : x)
      if (!std::isfinite(v)) throw NumericError("continuous slow state became non-finite", j);
    elapsed += len;
    if (last) {
      record(1.0, y, (j == 0 ? u0 : 0.0) + len, x);
      break;
    }
  }
  return out;
}

SsFlowCheck ssflow_check(const std::function<double(const PhasePoint&)>& v, double v_lip_norm,
                         const SuspensionFlow& fs, double eps, const StationaryMeasure& m_eps,
                         const StationaryMeasure& m_0) {
  if (!(m_eps.bins == m_0.bins)) throw UsageError("flow measures need the same bins");
  if (!(fs.K2() > 0.0)) throw UsageError("K2 must be declared or estimated first");
  double ie = 0.0, he = 0.0, i0 = 0.0, h0s = 0.0, dh = 0.0, dvt = 0.0, vinf = 0.0;
  for (std::size_t i = 0; i < m_eps.weights.size(); ++i) {
    const PhasePoint c = m_eps.bins.center(i);
    const double val = v(c);
    const double hE = fs.roof()(c.y, eps), hZ = fs.roof()(c.y, 0.0);
    vinf = std::max(vinf, std::fabs(val));
    ie += m_eps.weights[i] * hE * val;
    he += m_eps.weights[i] * hE;
    i0 += m_0.weights[i] * hZ * val;
    h0s += m_0.weights[i] * hZ;
    const double dw = m_eps.weights[i] - m_0.weights[i];
    dh += dw * hZ;
    dvt += dw * hZ * val;
  }
  const double K1 = fs.K1(), K2 = fs.K2();
  SsFlowCheck out;
  out.lhs = std::fabs(ie / he - i0 / h0s);
  out.rhs = 3.0 * std::pow(K2, 4) * v_lip_norm * eps + K1 * K1 * K1 * vinf * std::fabs(dh) +
            K1 * std::fabs(dvt);
  return out;
}

}  // namespace fsavg
