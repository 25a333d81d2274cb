// fsavg command line: one subcommand per experiment family.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fsavg/density.hpp"
#include "fsavg/ensemble.hpp"
#include "fsavg/experiments.hpp"
#include "fsavg/fastslow.hpp"
#include "fsavg/output.hpp"
#include "fsavg/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fsavg;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned threads = 0;
};

Scenario load(const Common& c) {
  Scenario s = load_scenario(c.config);
  if (c.seed) s.set_seed(*c.seed);
  return s;
}

fs::path out_dir(const Common& c, const Scenario& s) {
  return c.out.empty() ? fs::path(s.output_dir) : fs::path(c.out);
}

void stamp(CsvTable& t, const Scenario& s) {
  t.meta("scenario", s.name);
  t.meta("family", s.family.describe());
  t.meta("seed", std::to_string(s.ensemble.seed));
  t.meta("rng", "philox4x32-10");
}

int finish(const fs::path& dir, const Scenario& s, const std::vector<Verdict>& v, json extra = {}) {
  json j = verdicts_json(v);
  j["scenario"] = s.name;
  j["seed"] = s.ensemble.seed;
  if (!extra.is_null()) j["details"] = std::move(extra);
  write_json(dir / "verdicts.json", j);
  for (const auto& x : v)
    std::cout << (x.holds() ? "holds   " : "VIOLATED") << "  " << x.name << "  checked=" << x.checked
              << " violations=" << x.violations << " min_slack=" << format_double(x.min_slack) << "\n";
  std::cout << "outputs in " << dir.string() << "\n";
  return all_hold(v) ? 0 : 1;
}

json rate_json(const RateSeries& r) {
  return json{{"has_fit", r.has_fit},         {"slope", r.fit.slope},
              {"intercept", r.fit.intercept}, {"r2", r.fit.r2},
              {"points", r.fit.points},       {"window", {r.window_lo, r.window_hi}}};
}

void write_summary(const fs::path& dir, const Scenario& s, const ScenarioResult& r) {
  std::vector<std::string> header{"epsilon", "N", "R", "S", "small_delta", "z_max"};
  for (double q : r.q) header.push_back("z_L" + format_double(q));
  for (double q : r.q) header.push_back("delta_L" + format_double(q));
  CsvTable t(header);
  stamp(t, s);
  for (const auto& p : r.per_eps) {
    std::vector<double> row{p.eps, static_cast<double>(p.N), p.R, p.S,
                            static_cast<double>(p.small_delta), p.z_max};
    row.insert(row.end(), p.z_norm.begin(), p.z_norm.end());
    row.insert(row.end(), p.delta_norm.begin(), p.delta_norm.end());
    t.row(row);
  }
  t.write(dir / "summary.csv");

  CsvTable rates({"q", "series", "slope", "intercept", "r2", "points", "window_lo", "window_hi"});
  stamp(rates, s);
  for (std::size_t k = 0; k < r.q.size(); ++k) {
    for (const auto& [name, rs] : {std::pair{"z", &r.z_rates[k]}, std::pair{"delta", &r.delta_rates[k]}}) {
      rates.row(std::vector<std::string>{
          format_double(r.q[k]), name, rs->has_fit ? format_double(rs->fit.slope) : "nan",
          rs->has_fit ? format_double(rs->fit.intercept) : "nan",
          rs->has_fit ? format_double(rs->fit.r2) : "nan", std::to_string(rs->fit.points),
          std::to_string(rs->window_lo), std::to_string(rs->window_hi)});
    }
  }
  rates.write(dir / "rates.csv");
}

int cmd_simulate(const Common& c, bool with_path) {
  const Scenario s = load(c);
  const fs::path dir = out_dir(c, s);
  const ScenarioResult r = run_scenario(s, {c.threads});
  write_summary(dir, s, r);
  json recs = json::array();
  for (const auto& x : r.samples) {
    double S = 0.0;
    for (const auto& p : r.per_eps)
      if (p.eps == x.eps) S = p.S;
    recs.push_back({{"epsilon", x.eps}, {"index", x.index}, {"y0", x.y0}, {"z", x.z},
                    {"delta1", x.delta1}, {"delta2", x.delta2}, {"S", S}});
  }
  write_json(dir / "samples.json", json{{"seed", r.seed}, {"records", recs}});
  if (with_path) {
    // Slow path and averaged ODE of sample 0 at the first eps.
    const double eps = s.eps.front();
    const StationaryMeasure m = stationary_measure(s.family, eps, s.measure);
    const Vec means = basis_means(s.field, m);
    const InitialSampler sampler(s.family, eps, s.ensemble, &m);
    const std::size_t N = steps_for(eps);
    const FastSlowRun run = [&] {
      const auto orbit = fast_orbit(s.family, eps, sampler.draw(0, N), N);
      return FastSlowRun{iterate_slow(s.field, eps, orbit), orbit};
    }();
    const auto grid = time_grid(eps, s.ode_step);
    const OdePath X =
        solve_averaged_ode(averaged_vector_field(s.field, means, eps), s.field.x0(), grid, s.ode_step);
    std::vector<std::string> h{"t"};
    for (int i = 0; i < s.field.dim(); ++i) h.push_back("x_" + std::to_string(i + 1));
    CsvTable path(h), ode(h);
    stamp(path, s);
    stamp(ode, s);
    path.meta("epsilon", eps);
    ode.meta("epsilon", eps);
    for (std::size_t n = 0; n <= N; ++n) {
      std::vector<double> row{static_cast<double>(n) * eps};
      const auto x = run.path.at(n);
      row.insert(row.end(), x.begin(), x.end());
      path.row(row);
    }
    for (std::size_t i = 0; i < X.size(); ++i) {
      std::vector<double> row{X.t[i]};
      const auto x = X.at(i);
      row.insert(row.end(), x.begin(), x.end());
      ode.row(row);
    }
    path.write(dir / "path.csv");
    ode.write(dir / "ode.csv");
  }
  json rates = json::array();
  for (std::size_t k = 0; k < r.q.size(); ++k)
    rates.push_back({{"q", r.q[k]}, {"z", rate_json(r.z_rates[k])}, {"delta", rate_json(r.delta_rates[k])}});
  return finish(dir, s, r.verdicts, json{{"rates", rates}});
}

int cmd_rates(const Common& c) {
  const Scenario s = load(c);
  const fs::path dir = out_dir(c, s);
  const ScenarioResult r = run_scenario(s, {c.threads});
  write_summary(dir, s, r);
  json rates = json::array();
  for (std::size_t k = 0; k < r.q.size(); ++k) {
    rates.push_back({{"q", r.q[k]}, {"z", rate_json(r.z_rates[k])}, {"delta", rate_json(r.delta_rates[k])}});
    const auto& z = r.z_rates[k];
    std::cout << "q=" << format_double(r.q[k]) << "  z slope "
              << (z.has_fit ? format_double(z.fit.slope) : std::string("n/a")) << "  (points "
              << z.window_lo << ".." << z.window_hi << ")\n";
  }
  return finish(dir, s, r.verdicts, json{{"rates", rates}});
}

int cmd_orderfn(const Common& c) {
  const Scenario s = load(c);
  const fs::path dir = out_dir(c, s);
  const OrderReport r = orderfn_suite(s, {c.threads});
  json recs = json::array();
  for (const auto& x : r.records)
    recs.push_back({{"epsilon", x.eps}, {"index", x.index}, {"y0", x.y0},
                    {"delta1", x.sample.delta1}, {"delta2", x.sample.delta2},
                    {"grid_gap", x.sample.grid_gap},
                    {"argmax_x", x.sample.argmax_x1}, {"argmax_n", x.sample.argmax_n1},
                    {"argmax_x2", x.sample.argmax_x2}, {"argmax_n2", x.sample.argmax_n2}});
  write_json(dir / "orderfn.json", json{{"seed", s.ensemble.seed}, {"records", recs}});
  CsvTable t({"epsilon", "Lq_norm_delta", "q"});
  stamp(t, s);
  for (std::size_t e = 0; e < s.eps.size(); ++e)
    for (std::size_t k = 0; k < s.q.size(); ++k) t.row(std::vector<double>{s.eps[e], r.norms[e][k], s.q[k]});
  t.write(dir / "orderfn_summary.csv");
  if (r.have_moments) {
    CsvTable m({"epsilon", "delta_moment", "sum_moment", "ratio"});
    stamp(m, s);
    for (std::size_t i = 0; i < r.moments.ratios.abscissa.size(); ++i)
      m.row(std::vector<double>{r.moments.ratios.abscissa[i], r.moments.delta_moment[i],
                                r.moments.sum_moment[i], r.moments.ratios.values[i]});
    m.write(dir / "moments.csv");
  }
  return finish(dir, s, r.verdicts);
}

int cmd_density(const Common& c, bool dump_matrix) {
  const Scenario s = load(c);
  const fs::path dir = out_dir(c, s);
  const DensityReport r = density_suite(s);
  auto write_density = [&](const StationaryMeasure& m, double eps, const std::string& name) {
    CsvTable t({"bin_center", "density"});
    stamp(t, s);
    t.meta("epsilon", eps);
    t.meta("bins", static_cast<double>(m.bins.size()));
    t.meta("source", m.source == MeasureSource::Ulam ? "ulam" : "orbit-empirical");
    t.meta("sampled", m.sampled ? "true" : "false");
    if (m.bins.ntheta > 1) t.meta("layout", "cell index = itheta * ny + iy; bin_center is the fiber coordinate");
    const auto rho = m.density();
    for (std::size_t i = 0; i < rho.size(); ++i) t.row(std::vector<double>{m.bins.center(i).y, rho[i]});
    t.write(dir / name);
  };
  write_density(r.m0, 0.0, "density_eps0.csv");
  for (std::size_t e = 0; e < r.rows.size(); ++e)
    write_density(r.measures[e], r.rows[e].eps, "density_" + std::to_string(e) + ".csv");
  CsvTable t({"epsilon", "R", "S", "uniform_error", "reference_l1"});
  stamp(t, s);
  if (!r.reference.empty()) t.meta("reference", r.reference);
  for (const auto& row : r.rows)
    t.row(std::vector<double>{row.eps, row.R, row.S, row.uniform_error, row.reference_l1});
  t.write(dir / "stability.csv");
  if (dump_matrix) {
    if (!s.family.one_dimensional() || s.measure.k > 1024)
      throw UsageError("matrix dump needs a one-dimensional family and at most 1024 bins");
    const UlamOperator op = ulam_matrix(s.family, s.eps.front(), s.measure.k);
    std::vector<std::string> h;
    for (std::size_t j = 0; j < op.size(); ++j) h.push_back("c" + std::to_string(j));
    CsvTable m(h);
    stamp(m, s);
    m.meta("epsilon", s.eps.front());
    for (std::size_t i = 0; i < op.size(); ++i) {
      std::vector<double> row(op.size(), 0.0);
      for (std::size_t p = op.row_ptr[i]; p < op.row_ptr[i + 1]; ++p) row[op.col[p]] = op.val[p];
      m.row(row);
    }
    m.write(dir / "ulam_matrix.csv");
  }
  return finish(dir, s, r.verdicts);
}

int cmd_induce(const Common& c) {
  const Scenario s = load(c);
  const fs::path dir = out_dir(c, s);
  const TailReport r = induce_suite(s);
  CsvTable t({"n", "survival", "exact", "survivors"});
  stamp(t, s);
  t.meta("a", r.a);
  t.meta("fitted_slope", r.tail.fit.has_fit ? format_double(r.tail.fit.fit.slope) : "nan");
  t.meta("target_slope", r.target);
  t.meta("fit_window", format_double(r.tail.fit_lo) + ".." + format_double(r.tail.fit_hi));
  t.meta("range_warning", r.tail.range_warning ? "true" : "false");
  t.meta("samples", static_cast<double>(r.tail.samples));
  for (std::size_t i = 0; i < r.tail.n.size(); ++i)
    t.row(std::vector<double>{r.tail.n[i], r.tail.survival[i], r.exact[i],
                              static_cast<double>(r.tail.survivors[i])});
  t.write(dir / "tail.csv");
  if (r.have_moments) {
    CsvTable m({"n", "p_norm"});
    stamp(m, s);
    m.meta("fitted_slope", r.moments.series.has_fit ? format_double(r.moments.series.fit.slope) : "nan");
    m.meta("target", r.moments.target);
    for (std::size_t i = 0; i < r.moments.series.abscissa.size(); ++i)
      m.row(std::vector<double>{r.moments.series.abscissa[i], r.moments.series.values[i]});
    m.write(dir / "moments.csv");
  }
  return finish(dir, s, r.verdicts);
}

int cmd_suspend(const Common& c) {
  const Scenario s = load(c);
  const fs::path dir = out_dir(c, s);
  const SuspensionReport r = suspension_suite(s, {c.threads});
  std::vector<std::string> h{"t", "y", "u"};
  for (int i = 0; i < s.field.dim(); ++i) h.push_back("x_" + std::to_string(i + 1));
  CsvTable tr(h);
  stamp(tr, s);
  tr.meta("epsilon", s.eps.front());
  for (std::size_t i = 0; i + h.size() <= r.trace.size(); i += h.size())
    tr.row(std::vector<double>(r.trace.begin() + static_cast<std::ptrdiff_t>(i),
                               r.trace.begin() + static_cast<std::ptrdiff_t>(i + h.size())));
  tr.write(dir / "flow_trace.csv");
  CsvTable cmp({"epsilon", "delta_q", "rhs", "S"});
  stamp(cmp, s);
  cmp.meta("K1", r.K1);
  cmp.meta("K2", r.K2);
  for (std::size_t i = 0; i < r.eps.size(); ++i)
    cmp.row(std::vector<double>{r.eps[i], r.vw_lhs[i], r.vw_rhs[i], r.S[i]});
  cmp.write(dir / "comparison.csv");
  return finish(dir, s, r.verdicts,
                json{{"K1", r.K1}, {"K2", r.K2}, {"additivity_error", r.additivity_error},
                     {"flow_orbits_checked", r.flow_checked}});
}

int cmd_appendix(const Common& c) {
  const Scenario s = load(c);
  const fs::path dir = out_dir(c, s);
  std::vector<double> trace;
  const AppendixSummary a = appendix_suite(s, {c.threads}, &trace);
  const int d = s.field.dim();
  std::vector<std::string> h{"n"};
  for (const char* name : {"x", "w", "z"})
    for (int i = 0; i < d; ++i) h.push_back(std::string(name) + "_" + std::to_string(i + 1));
  h.push_back("r");
  CsvTable t(h);
  stamp(t, s);
  t.meta("epsilon", a.eps);
  for (std::size_t i = 0; i + h.size() <= trace.size(); i += h.size())
    t.row(std::vector<double>(trace.begin() + static_cast<std::ptrdiff_t>(i),
                              trace.begin() + static_cast<std::ptrdiff_t>(i + h.size())));
  t.write(dir / "trace.csv");
  return finish(dir, s, a.verdicts,
                json{{"epsilon", a.eps}, {"orbits", a.orbits}, {"applicable", a.applicable},
                     {"max_deviation", a.max_deviation}});
}

int cmd_counterexample(const Common& c) {
  json sec = json::object();
  std::string name = "counterexample";
  std::uint64_t seed = 1;
  if (!c.config.empty()) {
    const Scenario s = load(c);
    sec = s.section("counterexample");
    name = s.name;
    seed = s.ensemble.seed;
  } else if (c.seed) {
    seed = *c.seed;
  }
  const double beta = sec.value("beta", 1.0);
  const auto deltas = sec.value("delta", std::vector<double>{1e-2, 1e-3, 1e-4});
  const auto y0s = sec.value("y0", std::vector<double>{0.1, 0.3, 0.7});
  const double random_delta = sec.value("random_delta", deltas.back());
  const auto random_samples = sec.value("random_samples", std::size_t{1000});
  const double l1_tol = sec.value("l1_threshold", 0.1);
  const fs::path dir = c.out.empty() ? fs::path(sec.value("dir", "out/" + name)) : fs::path(c.out);

  CsvTable t({"beta", "delta", "y0", "N", "k_minus_1_hex", "epsilon", "drift", "x_hat_1", "bound",
              "frozen", "random_z_L1"});
  t.meta("scenario", name);
  t.meta("seed", std::to_string(seed));
  Verdict hit("x-hat-reaches-one"), frozen("frozen-after-N"), eps_ok("eps-at-most-delta"),
      l1("random-y0-L1");
  json recs = json::array();
  for (double delta : deltas) {
    for (double y0 : y0s) {
      const CounterexampleRecord r = counterexample_run(beta, delta, y0);
      hit.add(r.bound, r.x_hat_1);
      frozen.add(r.frozen ? 0.0 : 1.0, 0.0);
      eps_ok.add(r.eps, delta);
      double zl1 = std::nan("");
      if (delta == random_delta) {
        zl1 = counterexample_random_l1(beta, r.eps, random_samples, seed, c.threads);
        l1.add(zl1, l1_tol);
      }
      t.row(std::vector<std::string>{format_double(beta), format_double(delta), format_double(y0),
                                     std::to_string(r.N), r.k_hex, format_double(r.eps),
                                     format_double(r.drift), format_double(r.x_hat_1),
                                     format_double(r.bound), r.frozen ? "1" : "0", format_double(zl1)});
      recs.push_back({{"delta", delta}, {"y0", y0}, {"N", r.N}, {"epsilon", r.eps},
                      {"x_hat_1", r.x_hat_1}, {"bound", r.bound}, {"random_z_L1", zl1}});
    }
  }
  t.write(dir / "counterexample.csv");
  const std::vector<Verdict> v{hit, frozen, eps_ok, l1};
  json j = verdicts_json(v);
  j["seed"] = seed;
  j["records"] = recs;
  write_json(dir / "verdicts.json", j);
  for (const auto& x : v)
    std::cout << (x.holds() ? "holds   " : "VIOLATED") << "  " << x.name << "  checked=" << x.checked
              << " violations=" << x.violations << "\n";
  return all_hold(v) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fast-slow averaging experiments"};
  app.require_subcommand(1);
  Common c;
  bool with_path = false, dump_matrix = false;
  auto common = [&c](CLI::App* sub, bool need_config) {
    auto* opt = sub->add_option("--config", c.config, "scenario file (JSON)");
    if (need_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", c.seed, "override the scenario seed");
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--threads", c.threads, "worker threads (0 = all cores)");
  };
  auto* sim = app.add_subcommand("simulate", "ensemble deviations, order functions and norms");
  common(sim, true);
  sim->add_flag("--path", with_path, "also write the slow path and ODE of sample 0");
  auto* ord = app.add_subcommand("orderfn", "order functions over an ensemble");
  common(ord, true);
  auto* den = app.add_subcommand("density", "invariant densities and stability distances");
  common(den, true);
  den->add_flag("--dump-matrix", dump_matrix, "write the dense Ulam matrix of the first eps");
  auto* ind = app.add_subcommand("induce", "return-time tails and induced sums");
  common(ind, true);
  auto* sus = app.add_subcommand("suspend", "suspension flows");
  common(sus, true);
  auto* app_v = app.add_subcommand("appendix-verify", "second-order estimates along orbits");
  common(app_v, true);
  auto* cex = app.add_subcommand("counterexample", "orbits that defeat pointwise averaging");
  common(cex, false);
  auto* rates = app.add_subcommand("rates", "rate fits of the deviation norms");
  common(rates, true);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sim) return cmd_simulate(c, with_path);
    if (*ord) return cmd_orderfn(c);
    if (*den) return cmd_density(c, dump_matrix);
    if (*ind) return cmd_induce(c);
    if (*sus) return cmd_suspend(c);
    if (*app_v) return cmd_appendix(c);
    if (*cex) return cmd_counterexample(c);
    if (*rates) return cmd_rates(c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
