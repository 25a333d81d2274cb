#include "fsavg/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fsavg/ensemble.hpp"
#include "fsavg/fastslow.hpp"
#include "fsavg/ode.hpp"
#include "fsavg/rng.hpp"
#include "fsavg/secondorder.hpp"
#include "fsavg/suspension.hpp"

namespace fsavg {

using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

std::string hex_of_bits(const BinaryExpansion& e, std::size_t bits) {
  if (bits == 0) return "0";
  static const char* digits = "0123456789abcdef";
  std::string out;
  const std::size_t pad = (4 - bits % 4) % 4;
  unsigned nib = 0, count = static_cast<unsigned>(pad);
  for (std::size_t pos = 1; pos <= bits; ++pos) {
    nib = (nib << 1) | (e.bit(pos) ? 1u : 0u);
    if (++count == 4) {
      if (!out.empty() || nib != 0) out += digits[nib];
      nib = 0;
      count = 0;
    }
  }
  return out.empty() ? "0" : out;
}

// floor(delta^-1/2) without trusting pow at perfect squares.
std::size_t inverse_sqrt_floor(double delta) {
  auto n = static_cast<std::size_t>(std::floor(1.0 / std::sqrt(delta)));
  while (static_cast<double>(n + 1) * static_cast<double>(n + 1) * delta <= 1.0) ++n;
  while (n > 0 && static_cast<double>(n) * static_cast<double>(n) * delta > 1.0) --n;
  return n;
}

}  // namespace

ScenarioError::ScenarioError(const std::string& what, double eps, std::size_t sample)
    : Error(what + " (eps=" + std::to_string(eps) + ", sample " + std::to_string(sample) + ")"),
      eps_(eps),
      sample_(sample) {}

Verdict::Verdict(std::string n) : name(std::move(n)), min_slack(kInf) {}

void Verdict::add(double lhs, double rhs) {
  ++checked;
  const double slack = rhs - lhs;
  if (!(lhs <= rhs)) ++violations;
  if (checked == 1 || slack < min_slack || std::isnan(slack)) {
    min_slack = slack;
    worst_lhs = lhs;
    worst_rhs = rhs;
  }
}

json Verdict::to_json() const {
  return json{{"name", name},          {"holds", holds()},     {"checked", checked},
              {"violations", violations}, {"worst_lhs", worst_lhs}, {"worst_rhs", worst_rhs},
              {"min_slack", checked ? min_slack : 0.0}};
}

bool all_hold(const std::vector<Verdict>& v) {
  return std::all_of(v.begin(), v.end(), [](const Verdict& x) { return x.holds(); });
}

json verdicts_json(const std::vector<Verdict>& v) {
  json arr = json::array();
  for (const auto& x : v) arr.push_back(x.to_json());
  return json{{"all_hold", all_hold(v)}, {"verdicts", arr}};
}

// run_scenario

ScenarioResult run_scenario(const Scenario& s, const RunOptions& opt) {
  const FastFamily& fam = s.family;
  const SlowField& field = s.field;
  const double L = field.L();
  const double L1 = field.budget().L1;
  const double e2L = std::exp(2.0 * L);
  const XGrid grid = s.xgrid();
  const std::size_t M = s.ensemble.size;

  ScenarioResult res;
  res.seed = s.ensemble.seed;
  res.q = s.q;
  Verdict dev("deviation-bound"), uni("uniform-bound"), inc("increment-bound"),
      ord("order-bound"), stab("stability-bound");
  std::vector<Verdict> lq;
  for (double q : s.q) lq.emplace_back("lq-comparison-q" + std::to_string(static_cast<int>(q)));

  const StationaryMeasure m0 = stationary_measure(fam, 0.0, s.measure);
  for (double eps : s.eps) {
    const StationaryMeasure m_eps = fam.frozen() ? m0 : stationary_measure(fam, eps, s.measure);
    const Vec means = basis_means(field, m_eps);
    const StabilityDistances sd = stability_distances(field, m_eps, m0, eps, grid.points);
    const std::size_t N = steps_for(eps);
    const auto abar = averaged_vector_field(field, means, eps);
    const OdePath X = solve_averaged_ode(abar, field.x0(), time_grid(eps, s.ode_step), s.ode_step);
    const InitialSampler sampler(fam, eps, s.ensemble, &m_eps);

    std::vector<SampleRecord> recs(M);
    parallel_for(M, opt.threads, [&](std::size_t i) {
      try {
        const InitialCondition ic = sampler.draw(i, N);
        const auto orbit = fast_orbit(fam, eps, ic, N);
        const SlowPath path = iterate_slow(field, eps, orbit);
        const OrderFunctionSample of = order_function(field, orbit, eps, means, grid);
        SampleRecord& r = recs[i];
        r.eps = eps;
        r.index = i;
        r.y0 = orbit[0].y;
        r.theta0 = orbit[0].theta;
        r.z = deviation_z(path, X);
        r.delta1 = of.delta1;
        r.delta2 = of.delta2;
        r.relaxed = of.relaxed();
        r.increment = max_increment(path);
      } catch (const ScenarioError&) {
        throw;
      } catch (const Error& e) {
        throw ScenarioError(e.what(), eps, i);
      }
    });

    EpsSummary sum;
    sum.eps = eps;
    sum.N = N;
    sum.R = sd.R;
    sum.S = sd.S;
    stab.add(sd.S, L * sd.R + eps + 1e-12);
    std::vector<double> zs(M), ds(M);
    for (std::size_t i = 0; i < M; ++i) {
      const SampleRecord& r = recs[i];
      zs[i] = r.z;
      ds[i] = r.relaxed;
      sum.z_max = std::max(sum.z_max, r.z);
      if (r.relaxed <= 0.5) {
        ++sum.small_delta;
        dev.add(r.z, 6.0 * e2L * (r.relaxed + sd.S));
      }
      uni.add(r.z, 2.0 * L + 1e-12);
      inc.add(r.increment, eps * L1 * (1.0 + 1e-12));
      ord.add(std::max(r.delta1, r.delta2), 2.0 * L + 1e-12);
    }
    for (std::size_t k = 0; k < s.q.size(); ++k) {
      sum.z_norm.push_back(lq_norm(zs, s.q[k]));
      sum.delta_norm.push_back(lq_norm(ds, s.q[k]));
      lq[k].add(sum.z_norm.back(), 12.0 * e2L * (sum.delta_norm.back() + sd.S));
    }
    res.per_eps.push_back(std::move(sum));
    res.samples.insert(res.samples.end(), recs.begin(), recs.end());
  }

  for (std::size_t k = 0; k < s.q.size(); ++k) {
    std::vector<double> e, z, d;
    for (const auto& p : res.per_eps) {
      e.push_back(p.eps);
      z.push_back(p.z_norm[k]);
      d.push_back(p.delta_norm[k]);
    }
    res.z_rates.push_back(rate_series_default(e, z));
    res.delta_rates.push_back(rate_series_default(e, d));
  }

  res.verdicts = {dev, uni, inc, ord, stab};
  res.verdicts.insert(res.verdicts.end(), lq.begin(), lq.end());

  // Optional rate target: {"rate": {"q": 2, "slope_range": [lo, hi]}}.
  const json& rate = s.section("rate");
  if (rate.contains("slope_range")) {
    const auto range = rate.at("slope_range").get<std::vector<double>>();
    if (range.size() != 2) throw ConfigError("slope_range takes [lo, hi]");
    const double q = get_or(rate, "q", s.q.front());
    const auto it = std::find(s.q.begin(), s.q.end(), q);
    if (it == s.q.end()) throw ConfigError("rate q is not in the scenario q list");
    const RateSeries& rs = res.z_rates[static_cast<std::size_t>(it - s.q.begin())];
    Verdict v("z-rate-slope");
    const double slope = rs.has_fit ? rs.fit.slope : std::numeric_limits<double>::quiet_NaN();
    v.add(std::max(range[0] - slope, slope - range[1]), 0.0);
    res.verdicts.push_back(v);
  }
  return res;
}

// Counterexample

CounterexampleRecord counterexample_run(double beta, double delta, double y0) {
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (!(y0 >= 0.0 && y0 <= 1.0)) throw DomainError("y0 must lie in [0, 1]");
  CounterexampleRecord r;
  r.beta = beta;
  r.delta = delta;
  r.y0 = y0;
  r.N = inverse_sqrt_floor(delta);
  const double db = std::pow(delta, beta);
  const double threshold = db - std::ldexp(1.0, -static_cast<int>(r.N));
  if (!(threshold > 0.0))
    throw PreconditionError("delta^beta - 2^-N = " + std::to_string(threshold) +
                            " must be positive; take delta smaller");

  // u0 = (k - 1) 2^-N is y0 + delta^beta truncated to N binary digits, so
  // eps^beta = u0 - y0 lies in [delta^beta - 2^-N, delta^beta].
  const BinaryExpansion y = BinaryExpansion::from_double(wrap_unit(y0));
  const BinaryExpansion u0 = y.plus(BinaryExpansion::from_double(db)).truncated(r.N);
  r.k_hex = hex_of_bits(u0, r.N);
  const double c = u0.plus(y.negated()).to_double();
  if (!(c > 0.0)) throw PreconditionError("constructed drift is not positive");
  r.eps = std::pow(c, 1.0 / beta);
  r.eps_ok = r.eps > 0.0 && r.eps <= delta;

  const FastFamily fam = FastFamily::doubling_drift(beta, 1.0, 1.0);
  r.drift = fam.parameter(r.eps);
  r.steps = steps_for(r.eps);
  InitialCondition ic;
  ic.digits = u0;
  ic.digits_include_drift = true;
  ic.point.y = wrap_unit(u0.to_double() - r.drift);
  const auto orbit = fast_orbit(fam, r.eps, ic, std::max(r.steps, r.N + 1));
  const double frozen_y = wrap_unit(-r.drift);
  r.frozen = true;
  for (std::size_t n = r.N; n < orbit.size(); ++n)
    if (orbit[n].y != frozen_y) r.frozen = false;
  const SlowPath path = iterate_slow(SlowField::cosine_coupling(), r.eps,
                                     std::span<const PhasePoint>(orbit.data(), r.steps + 1));
  r.x_hat_1 = path.at(r.steps)[0];
  r.bound = 1.0 - 5.0 * (std::sqrt(r.eps) + r.eps);
  return r;
}

double counterexample_random_l1(double beta, double eps, std::size_t samples, std::uint64_t seed,
                                unsigned threads) {
  if (samples < 1) throw UsageError("need at least one sample");
  const FastFamily fam = FastFamily::doubling_drift(beta, 1.0, 1.0);
  const SlowField field = SlowField::cosine_coupling();
  const StationaryMeasure m = stationary_measure(fam, eps);
  const Vec means = basis_means(field, m);
  const std::size_t N = steps_for(eps);
  const OdePath X = solve_averaged_ode(averaged_vector_field(field, means, eps), field.x0(),
                                       time_grid(eps), 1e-3);
  EnsembleSpec spec;
  spec.law = SamplingLaw::Lebesgue;
  spec.size = samples;
  spec.seed = seed;
  const InitialSampler sampler(fam, eps, spec);
  std::vector<double> z(samples);
  parallel_for(samples, threads, [&](std::size_t i) {
    const auto orbit = fast_orbit(fam, eps, sampler.draw(i, N), N);
    z[i] = deviation_z(iterate_slow(field, eps, orbit), X);
  });
  return lq_norm(z, 1.0);
}

// Second-order construction

AppendixSummary appendix_suite(const Scenario& s, const RunOptions& opt,
                               std::vector<double>* first_trace) {
  const double eps = s.eps.front();
  const StationaryMeasure m = stationary_measure(s.family, eps, s.measure);
  const Vec means = basis_means(s.field, m);
  const XGrid grid = s.xgrid();
  const InitialSampler sampler(s.family, eps, s.ensemble, &m);
  const std::size_t M = s.ensemble.size;
  const std::size_t N = steps_for(eps);
  std::vector<std::vector<InequalityVerdict>> per(M);
  std::vector<double> devs(M);
  std::vector<char> small(M);
  parallel_for(M, opt.threads, [&](std::size_t i) {
    try {
      AppendixTrace t = appendix_trace(s.field, s.family, eps, sampler.draw(i, N), means, grid,
                                       s.ode_step);
      per[i] = t.verdicts;
      devs[i] = t.deviation;
      small[i] = t.delta <= 0.5;
      if (i == 0 && first_trace) {
        first_trace->clear();
        for (std::size_t n = 0; n <= t.N; ++n) {
          first_trace->push_back(static_cast<double>(n));
          for (const auto* v : {&t.x, &t.w, &t.z}) {
            const auto row = t.row(*v, n);
            first_trace->insert(first_trace->end(), row.begin(), row.end());
          }
          first_trace->push_back(n < t.N ? t.residual[n] : 0.0);
        }
      }
    } catch (const Error& e) {
      throw ScenarioError(e.what(), eps, i);
    }
  });
  AppendixSummary out;
  out.eps = eps;
  out.orbits = M;
  for (std::size_t i = 0; i < M; ++i) {
    out.applicable += small[i] ? 1 : 0;
    out.max_deviation = std::max(out.max_deviation, devs[i]);
    for (std::size_t k = 0; k < per[i].size(); ++k) {
      if (out.verdicts.size() <= k) out.verdicts.emplace_back(per[i][k].name);
      if (per[i][k].applicable) out.verdicts[k].add(per[i][k].lhs, per[i][k].bound);
    }
  }
  return out;
}

// Densities

double arcsine_interior_l1(const StationaryMeasure& m, std::size_t skip) {
  const BinGrid& b = m.bins;
  if (b.space.lo != -1.0 || b.space.hi != 1.0 || b.ntheta != 1)
    throw UsageError("arcsine comparison needs bins on [-1, 1]");
  if (b.ny <= 2 * skip) throw UsageError("too few bins");
  double l1 = 0.0;
  for (std::size_t i = skip; i + skip < b.ny; ++i) {
    const double lo = std::clamp(b.edge(i), -1.0, 1.0), hi = std::clamp(b.edge(i + 1), -1.0, 1.0);
    const double mass = (std::asin(hi) - std::asin(lo)) / std::numbers::pi;
    l1 += std::fabs(m.weights[i] - mass);
  }
  return l1;
}

DensityReport density_suite(const Scenario& s) {
  const json& sec = s.section("density");
  DensityReport out;
  out.reference = get_or<std::string>(sec, "reference", "");
  const double tol = get_or(sec, "tolerance", out.reference == "uniform" ? 1e-10 : 0.05);
  const XGrid grid = s.xgrid();
  const double L = s.field.L();
  out.m0 = stationary_measure(s.family, 0.0, s.measure);
  Verdict stab("stability-bound"), ref("reference-density");
  for (double eps : s.eps) {
    StationaryMeasure m = s.family.frozen() ? out.m0 : stationary_measure(s.family, eps, s.measure);
    const StabilityDistances sd = stability_distances(s.field, m, out.m0, eps, grid.points);
    DensityRow row;
    row.eps = eps;
    row.R = sd.R;
    row.S = sd.S;
    stab.add(sd.S, L * sd.R + eps + 1e-12);
    if (out.reference == "uniform") {
      const auto rho = m.density();
      const double vol = m.bins.space.measure();
      for (double r : rho) row.uniform_error = std::max(row.uniform_error, std::fabs(r * vol - 1.0));
      ref.add(row.uniform_error, tol);
    } else if (out.reference == "arcsine") {
      row.reference_l1 = arcsine_interior_l1(m, get_or<std::size_t>(sec, "skip_bins", 1));
      ref.add(row.reference_l1, tol);
    } else if (!out.reference.empty()) {
      throw ConfigError("unknown reference density '" + out.reference + "'");
    }
    out.rows.push_back(row);
    out.measures.push_back(std::move(m));
  }
  out.verdicts.push_back(stab);
  if (!out.reference.empty()) out.verdicts.push_back(ref);
  if (get_or(sec, "check_trend", false)) {
    std::vector<double> e, S;
    for (const auto& r : out.rows) {
      e.push_back(r.eps);
      S.push_back(r.S);
    }
    out.S_series = rate_series(e, S, 0, e.size());
    // S decreases as eps decreases: positive log-log slope.
    Verdict trend("S-trend");
    trend.add(0.0, out.S_series.has_fit ? out.S_series.fit.slope : -kInf);
    if (trend.violations == 0 && out.S_series.fit.slope == 0.0) ++trend.violations;
    out.verdicts.push_back(trend);
  }
  return out;
}

// Inducing

TailReport induce_suite(const Scenario& s) {
  if (s.family.kind() != FamilyKind::LsvIntermittent)
    throw ConfigError("induce needs an lsv family");
  const double eps = s.eps.front();
  const json& sec = s.section("tail");
  TailReport out;
  out.a = s.family.parameter(eps);
  const auto n_max = get_or<std::size_t>(sec, "n_max", 1000);
  const std::string sampling = get_or<std::string>(sec, "sampling", "log-stratified");
  TailSampling ts;
  if (sampling == "uniform") ts = TailSampling::Uniform;
  else if (sampling == "log-stratified") ts = TailSampling::LogStratified;
  else throw ConfigError("unknown tail sampling '" + sampling + "'");
  out.tail = tail_estimate(s.family, eps, n_max, get_or<std::size_t>(sec, "samples", 100000),
                           s.ensemble.seed, ts, get_or(sec, "fit_lo", 10.0),
                           get_or<std::size_t>(sec, "min_survivors", 20));
  out.exact = lsv_survival_exact(out.a, n_max);
  out.target = -1.0 / out.a;
  Verdict slope("tail-slope");
  if (out.tail.fit.has_fit) {
    out.rel_error = std::fabs(out.tail.fit.fit.slope - out.target) / std::fabs(out.target);
  } else {
    out.rel_error = kInf;
  }
  slope.add(out.rel_error, get_or(sec, "tolerance", 0.15));
  out.verdicts.push_back(slope);

  const json& mom = s.section("moments");
  if (!mom.empty()) {
    out.have_moments = true;
    std::vector<std::size_t> ns;
    if (mom.contains("n")) {
      ns = mom.at("n").get<std::vector<std::size_t>>();
    } else {
      const auto r = get_or<std::vector<int>>(mom, "n_powers", {4, 10});
      for (int k = r.at(0); k <= r.at(1); ++k) ns.push_back(std::size_t{1} << k);
    }
    // Centered observable vanishing at the neutral fixed point, so single
    // long excursions contribute little.
    const StationaryMeasure m = stationary_measure(s.family, eps, s.measure);
    const std::string obs = get_or<std::string>(mom, "observable", "sin-centered");
    std::function<double(double)> v;
    if (obs == "sin-centered") {
      const double ms = m.expect([](const PhasePoint& p) { return std::sin(kTwoPi * p.y); });
      const double my = m.expect([](const PhasePoint& p) { return p.y; });
      const double kappa = ms / my;
      v = [kappa](double y) { return std::sin(kTwoPi * y) - kappa * y; };
    } else if (obs == "cos-centered") {
      const double mc = m.expect([](const PhasePoint& p) { return std::cos(kTwoPi * p.y); });
      v = [mc](double y) { return std::cos(kTwoPi * y) - mc; };
    } else {
      throw ConfigError("unknown observable '" + obs + "'");
    }
    out.moments = induced_moment_growth(v, s.family, eps, ns, get_or(mom, "p", 4.0),
                                        get_or<std::size_t>(mom, "samples", 10000),
                                        s.ensemble.seed + 1);
    const auto range = get_or<std::vector<double>>(mom, "slope_range", {0.4, 0.65});
    Verdict g("moment-growth");
    const double sl = out.moments.series.has_fit ? out.moments.series.fit.slope
                                                 : std::numeric_limits<double>::quiet_NaN();
    g.add(std::max(range.at(0) - sl, sl - range.at(1)), 0.0);
    out.verdicts.push_back(g);
  }
  return out;
}

// Suspension

SuspensionReport suspension_suite(const Scenario& s, const RunOptions& opt) {
  const json& sec = s.section("suspension");
  Roof roof;
  if (sec.contains("roof")) {
    const json& r = sec.at("roof");
    roof.kind = roof_kind_from_string(get_or<std::string>(r, "kind", "constant"));
    roof.level = get_or(r, "level", 1.0);
    roof.amplitude = get_or(r, "amplitude", 0.0);
    roof.eps_slope = get_or(r, "eps_slope", 0.0);
  }
  const double eps_max = s.eps.front();
  SuspensionFlow fs(s.family, roof, eps_max, get_or(sec, "K2", 0.0));
  const std::uint64_t seed = s.ensemble.seed;
  if (!(fs.K2() > 0.0)) fs.set_K2(estimate_K2(fs, eps_max, get_or<std::size_t>(sec, "K2_samples", 2000), seed));

  SuspensionReport out;
  out.K1 = fs.K1();
  out.K2 = fs.K2();

  // f_t(f_s(p)) = f_{s+t}(p).
  const auto add_n = get_or<std::size_t>(sec, "additivity_samples", 1000);
  const PhaseSpace& space = s.family.phase_space();
  for (std::size_t i = 0; i < add_n; ++i) {
    CounterRng rng(seed + 7, i);
    FlowPoint p{{rng.uniform(space.lo, space.hi), 0.0}, 0.0};
    if (!space.contains(p.y)) p.y.y = space.lo;
    p.u = rng.uniform() * roof(p.y.y, eps_max);
    const double a = rng.uniform(0.0, 4.0 * out.K1), b = rng.uniform(0.0, 4.0 * out.K1);
    const FlowPoint one = fs.flow(eps_max, p, a + b);
    const FlowPoint two = fs.flow(eps_max, fs.flow(eps_max, p, a), b);
    out.additivity_error =
        std::max(out.additivity_error, std::fabs(one.y.y - two.y.y) + std::fabs(one.u - two.u));
  }
  Verdict add("semiflow-additivity");
  add.add(out.additivity_error, get_or(sec, "additivity_tolerance", 1e-12));

  Verdict vw("flow-induced-comparison"), flow("flow-deviation-bound"), ss("flow-stability-bound");
  const XGrid grid = s.xgrid();
  const double q = get_or(sec, "q", s.q.front());
  const auto vw_n = get_or<std::size_t>(sec, "vw_samples", 1000);
  const auto flow_n = get_or<std::size_t>(sec, "flow_samples", s.ensemble.size);
  const StationaryMeasure m0 = stationary_measure(s.family, 0.0, s.measure);
  const auto base_v = [](const PhasePoint& p) { return std::cos(kTwoPi * p.y); };
  const double v_lip = lipschitz_norm_estimate([](double y) { return std::cos(kTwoPi * y); },
                                               space, 4096, seed);
  for (double eps : s.eps) {
    const StationaryMeasure m = s.family.frozen() ? m0 : stationary_measure(s.family, eps, s.measure);
    out.eps.push_back(eps);
    const VwComparison c = vw_comparison(s.field, fs, eps, m, vw_n, q, grid, seed + 11);
    out.vw_lhs.push_back(c.delta_q);
    out.vw_rhs.push_back(c.rhs());
    vw.add(c.delta_q, c.rhs());
    out.S.push_back(flow_stability_S(s.field, fs, eps, m, m0, grid));
    const SsFlowCheck sc = ssflow_check(base_v, v_lip, fs, eps, m, m0);
    ss.add(sc.lhs, sc.rhs);

    EnsembleSpec spec = s.ensemble;
    spec.size = flow_n;
    const InitialSampler sampler(s.family, eps, spec, &m);
    const auto steps = static_cast<std::size_t>(std::ceil(1.0 + fs.K1() / eps)) + 2;
    std::vector<FlowTheoremCheck> checks(flow_n);
    const bool want_trace = out.trace.empty();
    parallel_for(flow_n, opt.threads, [&](std::size_t i) {
      try {
        const InitialCondition ic = sampler.draw(i, steps);
        CounterRng rng(seed + 13, i);
        const double u0 = rng.uniform() * roof(ic.point.y, eps);
        checks[i] = flow_theorem_check(s.field, fs, eps, ic, u0, m, m0, grid, s.ode_step,
                                       (i == 0 && want_trace) ? &out.trace : nullptr);
      } catch (const Error& e) {
        throw ScenarioError(e.what(), eps, i);
      }
    });
    for (const auto& ch : checks) {
      if (!ch.applicable) continue;
      ++out.flow_checked;
      flow.add(ch.z, ch.bound);
    }
  }
  out.verdicts = {add, vw, flow, ss};
  return out;
}

// Order functions

OrderReport orderfn_suite(const Scenario& s, const RunOptions& opt) {
  OrderReport out;
  const XGrid grid = s.xgrid();
  const double L = s.field.L();
  Verdict ord("order-bound");
  for (double eps : s.eps) {
    const StationaryMeasure m = stationary_measure(s.family, eps, s.measure);
    const Vec means = basis_means(s.field, m);
    const std::size_t N = steps_for(eps);
    const InitialSampler sampler(s.family, eps, s.ensemble, &m);
    std::vector<OrderRecord> recs(s.ensemble.size);
    parallel_for(recs.size(), opt.threads, [&](std::size_t i) {
      try {
        const InitialCondition ic = sampler.draw(i, N);
        const auto orbit = fast_orbit(s.family, eps, ic, N);
        recs[i] = OrderRecord{eps, i, orbit[0].y, order_function(s.field, orbit, eps, means, grid)};
      } catch (const Error& e) {
        throw ScenarioError(e.what(), eps, i);
      }
    });
    std::vector<double> d;
    for (const auto& r : recs) {
      d.push_back(r.sample.relaxed());
      ord.add(std::max(r.sample.delta1, r.sample.delta2), 2.0 * L + 1e-12);
    }
    std::vector<double> norms;
    for (double q : s.q) norms.push_back(lq_norm(d, q));
    out.norms.push_back(norms);
    out.records.insert(out.records.end(), recs.begin(), recs.end());
  }
  out.verdicts.push_back(ord);

  const json& mom = s.section("moments");
  if (!mom.empty()) {
    out.have_moments = true;
    out.moments = moment_scaling_check(s.field, s.family, s.eps, get_or(mom, "p", 2.0),
                                       get_or<std::size_t>(mom, "samples", 200), s.ensemble.seed,
                                       s.measure, get_or(mom, "bound", kInf));
    Verdict v("moment-ratio-bound");
    v.add(out.moments.max_ratio, get_or(mom, "bound", kInf));
    out.verdicts.push_back(v);
  }
  return out;
}

}  // namespace fsavg
