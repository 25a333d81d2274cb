#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fsavg/experiments.hpp"
#include "fsavg/ode.hpp"
#include "fsavg/output.hpp"

using namespace fsavg;
using nlohmann::json;

namespace {

json base_config() {
  return json::parse(R"({
    "name": "unit",
    "family": {"kind": "doubling-drift", "beta": 1.0, "scale": 1.0, "eps0": 1.0},
    "field": "cosine-coupling",
    "eps": [0.03125, 0.015625, 0.0078125, 0.00390625],
    "ensemble": {"law": "lebesgue", "size": 40, "seed": 9},
    "q": [1, 2]
  })");
}

std::string samples_csv(const ScenarioResult& r) {
  CsvTable t({"eps", "index", "y0", "z", "delta1", "delta2", "relaxed"});
  t.meta("seed", static_cast<double>(r.seed));
  for (const auto& s : r.samples) t.row({s.eps, double(s.index), s.y0, s.z, s.delta1, s.delta2, s.relaxed});
  return t.str();
}

}  // namespace

TEST_CASE("scenario parsing") {
  const auto s = parse_scenario(base_config());
  CHECK(s.name == "unit");
  CHECK(s.family.kind() == FamilyKind::DoublingDrift);
  CHECK(s.eps.size() == 4);
  CHECK(s.ensemble.size == 40);
  CHECK(s.ensemble.seed == 9);
  CHECK(s.q == std::vector<double>{1.0, 2.0});
  CHECK(s.output_dir == "out/unit");

  auto j = base_config();
  j["eps"] = json{{"powers_of_two", {6, 8}}};
  CHECK(parse_scenario(j).eps == std::vector<double>{0x1p-6, 0x1p-7, 0x1p-8});
  j["family"] = json{{"kind", "lsv"}, {"schedule", {{"base", 0.5}, {"slope", 1.0}}}, {"eps0", 0.25}};
  CHECK(parse_scenario(j).family.parameter(0.125) == 0.625);
  j["family"]["schedule"] = json{{"table", {{0.0, 0.5}, {0.25, 0.6}}}};
  CHECK(parse_scenario(j).family.parameter(0.125) == doctest::Approx(0.55));

  j = base_config();
  j["field"] = json::parse(R"({"dim": 2, "x0": [0, 0.5], "terms": [
      {"component": 0, "y": "cos2pi", "coef": 1},
      {"component": 1, "y": "sin2pi", "harmonic": 2, "x": "tanh", "xvar": 0, "coef": 0.5}],
      "budget": {"L1": 1.5, "L2": 1, "L3": 1}})");
  const auto f = parse_scenario(j).field;
  CHECK(f.dim() == 2);
  CHECK(f.terms().size() == 2);
  CHECK(f.terms()[1].harmonic == 2);
  CHECK(f.budget().L1 == 1.5);

  auto s2 = parse_scenario(base_config());
  s2.set_seed(77);
  CHECK(s2.ensemble.seed == 77);
  CHECK(s2.measure.seed == 77);
  CHECK(s2.config["seed"] == 77);
}

TEST_CASE("scenario validation") {
  auto bad = [](auto mutate) {
    auto j = base_config();
    mutate(j);
    return j;
  };
  CHECK_THROWS_AS(parse_scenario(bad([](json& j) { j["eps"] = {0.01, 0.02}; })), ConfigError);
  CHECK_THROWS_AS(parse_scenario(bad([](json& j) { j["eps"] = {0.01, 0.01}; })), ConfigError);
  CHECK_THROWS_AS(parse_scenario(bad([](json& j) { j["eps"] = {1.5}; })), ConfigError);
  CHECK_THROWS_AS(parse_scenario(bad([](json& j) { j["eps"] = {0.0}; })), ConfigError);
  CHECK_THROWS_AS(parse_scenario(bad([](json& j) { j["ensemble"]["size"] = 0; })), ConfigError);
  CHECK_THROWS_AS(parse_scenario(bad([](json& j) { j["q"] = {0.5}; })), ConfigError);
  CHECK_THROWS_AS(parse_scenario(bad([](json& j) { j["family"]["kind"] = "tent"; })), UsageError);
  CHECK_THROWS_AS(parse_scenario(bad([](json& j) { j.erase("eps"); })), ConfigError);
  CHECK_THROWS_AS(load_scenario(std::string(FSAVG_SOURCE_DIR) + "/tests/data/bad_eps.json"), ConfigError);
  CHECK_THROWS(load_scenario("/nonexistent/scenario.json"));
}

TEST_CASE("rate fits") {
  const std::vector<double> e{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> lin, half, flat(4, 3.0);
  for (double x : e) {
    lin.push_back(x);
    half.push_back(std::sqrt(x));
  }
  auto r = fit_rate(e, lin);
  CHECK(r.fit.slope == doctest::Approx(1.0));
  CHECK(r.fit.r2 == doctest::Approx(1.0));
  CHECK(fit_rate(e, half).fit.slope == doctest::Approx(0.5));
  CHECK(fit_rate(e, flat).fit.slope == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(fit_rate(std::vector<double>{0.1, 0.05}, std::vector<double>{1.0, 2.0}), UsageError);

  const auto d = rate_series_default(e, half);
  CHECK(d.window_lo == 1);
  CHECK(d.window_hi == 4);
  CHECK(d.has_fit);
  std::vector<double> withzero = half;
  withzero[2] = 0.0;
  CHECK_FALSE(rate_series(e, withzero, 1, 4).has_fit);
}

TEST_CASE("y-independent coupling tracks the ODE") {
  auto j = base_config();
  j["field"] = json::parse(R"({"dim": 1, "x0": [0], "terms": [{"component": 0, "y": "one", "x": "sin", "coef": 0.8}],
                               "budget": {"L1": 1, "L2": 1, "L3": 1}})");
  const auto r = run_scenario(parse_scenario(j));
  for (const auto& e : r.per_eps)
    for (double z : e.z_norm) CHECK(z <= e.eps * 1.0 + 1e-8);
  CHECK(r.all_hold());
}

TEST_CASE("run bundle structure and verdicts") {
  const auto s = parse_scenario(base_config());
  const auto r = run_scenario(s);
  CHECK(r.seed == 9);
  REQUIRE(r.per_eps.size() == 4);
  CHECK(r.samples.size() == 4 * 40);
  CHECK(r.z_rates.size() == 2);
  for (const auto& e : r.per_eps) {
    CHECK(e.N == steps_for(e.eps));
    CHECK(e.R < 1e-9);
    CHECK(e.S == doctest::Approx(e.eps).epsilon(1e-8));
  }
  bool seen = false;
  for (const auto& v : r.verdicts) {
    INFO(v.name);
    CHECK(v.holds());
    CHECK(v.checked > 0);
    seen = seen || v.name == "deviation-bound";
  }
  CHECK(seen);

  auto one = base_config();
  one["eps"] = {0.01};
  const auto r1 = run_scenario(parse_scenario(one));
  REQUIRE(r1.per_eps.size() == 1);
  for (const auto& z : r1.z_rates) CHECK_FALSE(z.has_fit);
}

TEST_CASE("runs are reproducible") {
  auto s = parse_scenario(base_config());
  const auto a = samples_csv(run_scenario(s, {1}));
  const auto b = samples_csv(run_scenario(s, {1}));
  const auto c = samples_csv(run_scenario(s, {4}));
  CHECK(a == b);
  CHECK(a == c);
  s.set_seed(10);
  CHECK(samples_csv(run_scenario(s, {1})) != a);
}

TEST_CASE("errors carry eps and sample index") {
  const ScenarioError e("boom", 0.25, 7);
  CHECK(e.eps() == 0.25);
  CHECK(e.sample() == 7);
  CHECK(std::string(e.what()).find("boom") != std::string::npos);
}

TEST_CASE("verdict bookkeeping") {
  Verdict v("x");
  CHECK(v.holds());
  v.add(1.0, 2.0);
  v.add(1.5, 1.75);
  CHECK(v.holds());
  CHECK(v.min_slack == doctest::Approx(0.25));
  v.add(3.0, 2.0);
  v.add(std::nan(""), 1.0);
  CHECK(v.violations == 2);
  CHECK(v.checked == 4);
  CHECK_FALSE(all_hold({v}));
  CHECK(v.to_json()["violations"] == 2);
}

TEST_CASE("counterexample construction") {
  for (double delta : {1e-2, 1e-3, 1e-4}) {
    for (double y0 : {0.1, 0.3, 0.7}) {
      const auto r = counterexample_run(1.0, delta, y0);
      INFO("delta=" << delta << " y0=" << y0 << " eps=" << r.eps);
      CHECK(r.N == static_cast<std::size_t>(std::floor(1.0 / std::sqrt(delta))));
      CHECK(r.eps > 0.0);
      CHECK(r.eps <= delta);
      CHECK(r.eps_ok);
      CHECK(r.frozen);
      CHECK(r.x_hat_1 >= r.bound);
    }
  }
  CHECK(counterexample_run(1.0, 1e-4, 0.3).x_hat_1 >= 0.9);
  CHECK_THROWS_AS(counterexample_run(1.0, 0.5, 0.3), PreconditionError);
  CHECK_THROWS_AS(counterexample_run(4.0, 0.01, 0.3), PreconditionError);
  const double l1 = counterexample_random_l1(1.0, 1e-4, 1000, 3);
  CHECK(l1 <= 0.1);
  CHECK(l1 > 0.0);
}

TEST_CASE("csv output") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e-300) == "1e-300");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(-INFINITY) == "-inf");
  CsvTable t({"a", "b"});
  t.meta("seed", 5.0);
  t.meta("family", "lsv");
  t.row(std::vector<double>{1.0, 0.25});
  CHECK_THROWS_AS(t.row(std::vector<double>{1.0}), UsageError);
  CHECK(t.str() == "# seed=5\n# family=lsv\na,b\n1,0.25\n");
  const auto dir = std::filesystem::temp_directory_path() / "fsavg_csv_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  t.write(dir / "t.csv");
  std::ifstream in(dir / "t.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == t.str());
  std::filesystem::remove_all(dir.parent_path());
}
