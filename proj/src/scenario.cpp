#include "fsavg/scenario.hpp"

#include <cmath>
#include <fstream>

namespace fsavg {

using nlohmann::json;

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

const json& empty_object() {
  static const json e = json::object();
  return e;
}

}  // namespace

XGrid Scenario::xgrid() const {
  if (xgrid_single_point) return single_point_grid(field);
  return default_xgrid(field, xgrid_divisions);
}

const json& Scenario::section(const std::string& key) const {
  if (config.is_object() && config.contains(key) && config.at(key).is_object())
    return config.at(key);
  return empty_object();
}

void Scenario::set_seed(std::uint64_t seed) {
  ensemble.seed = seed;
  measure.seed = seed;
  config["seed"] = seed;
}

ParamSchedule parse_schedule(const json& j) {
  if (j.is_number()) return ParamSchedule::affine(j.get<double>());
  if (!j.is_object()) throw ConfigError("schedule must be a number or an object");
  if (j.contains("table")) {
    std::vector<std::pair<double, double>> knots;
    for (const auto& k : j.at("table")) {
      if (!k.is_array() || k.size() != 2) throw ConfigError("schedule table rows are [eps, value]");
      knots.emplace_back(k[0].get<double>(), k[1].get<double>());
    }
    return ParamSchedule::table(std::move(knots));
  }
  return ParamSchedule::affine(get_or(j, "base", 0.0), get_or(j, "slope", 0.0));
}

FastFamily parse_family(const json& j) {
  if (!j.is_object() || !j.contains("kind")) throw ConfigError("family needs a kind");
  const FamilyKind kind = family_kind_from_string(j.at("kind").get<std::string>());
  const double eps0 = get_or(j, "eps0", 1.0);
  auto schedule = [&]() {
    if (!j.contains("schedule")) throw ConfigError("family needs a schedule");
    return parse_schedule(j.at("schedule"));
  };
  switch (kind) {
    case FamilyKind::DoublingDrift:
      return FastFamily::doubling_drift(get_or(j, "beta", 1.0), get_or(j, "scale", 1.0), eps0);
    case FamilyKind::SmoothExpandingTorus: return FastFamily::smooth_expanding_torus(schedule(), eps0);
    case FamilyKind::PiecewiseExpandingInterval: return FastFamily::piecewise_expanding(schedule(), eps0);
    case FamilyKind::LsvIntermittent: return FastFamily::lsv(schedule(), eps0);
    case FamilyKind::Quadratic: return FastFamily::quadratic(schedule(), eps0);
    case FamilyKind::Viana:
      if (!j.contains("a0")) throw ConfigError("viana family needs a0");
      return FastFamily::viana(j.at("a0").get<double>(), schedule(), eps0);
  }
  throw ConfigError("unsupported family");
}

SlowField parse_field(const json& j) {
  if (j.is_string() || (j.is_object() && j.contains("catalog"))) {
    const std::string name = j.is_string() ? j.get<std::string>() : j.at("catalog").get<std::string>();
    if (name == "cosine-coupling") return SlowField::cosine_coupling();
    if (name == "modulated-cosine") return SlowField::modulated_cosine();
    throw ConfigError("unknown catalog field '" + name + "'");
  }
  if (!j.is_object() || !j.contains("terms")) throw ConfigError("field needs a catalog name or terms");
  const int dim = get_or(j, "dim", 1);
  Vec x0 = j.contains("x0") ? j.at("x0").get<Vec>() : Vec(static_cast<std::size_t>(dim), 0.0);
  std::vector<FieldTerm> terms;
  for (const auto& t : j.at("terms")) {
    FieldTerm f;
    f.component = get_or(t, "component", 0);
    f.y = yfunction_from_string(get_or<std::string>(t, "y", "one"));
    f.harmonic = get_or(t, "harmonic", 1);
    f.x = xfunction_from_string(get_or<std::string>(t, "x", "one"));
    f.xvar = get_or(t, "xvar", 0);
    f.xscale = get_or(t, "xscale", 1.0);
    f.coef = get_or(t, "coef", 1.0);
    f.eps_coef = get_or(t, "eps_coef", 0.0);
    terms.push_back(f);
  }
  LipschitzBudget b;
  if (j.contains("budget")) {
    const auto& bj = j.at("budget");
    b.L1 = get_or(bj, "L1", 1.0);
    b.L2 = get_or(bj, "L2", 1.0);
    b.L3 = get_or(bj, "L3", 1.0);
  }
  return SlowField(dim, std::move(x0), std::move(terms), b);
}

EnsembleSpec parse_ensemble(const json& j) {
  EnsembleSpec e;
  if (j.is_null()) return e;
  e.law = sampling_law_from_string(get_or<std::string>(j, "law", "lebesgue"));
  e.size = get_or<std::size_t>(j, "size", e.size);
  e.seed = get_or<std::uint64_t>(j, "seed", e.seed);
  e.burn_in = get_or<std::size_t>(j, "burn_in", e.burn_in);
  if (j.contains("fixed")) e.fixed = j.at("fixed").get<std::vector<double>>();
  if (e.law == SamplingLaw::Fixed) {
    if (e.fixed.empty()) throw ConfigError("fixed ensemble needs a list of points");
    e.size = e.fixed.size();
  }
  if (e.size < 1) throw ConfigError("ensemble size must be at least 1");
  return e;
}

std::vector<double> parse_eps_list(const json& j) {
  if (j.is_array()) return j.get<std::vector<double>>();
  if (j.is_number()) return {j.get<double>()};
  if (j.is_object() && j.contains("powers_of_two")) {
    const auto r = j.at("powers_of_two").get<std::vector<int>>();
    if (r.size() != 2 || r[0] > r[1]) throw ConfigError("powers_of_two takes [lo, hi] with lo <= hi");
    std::vector<double> out;
    for (int k = r[0]; k <= r[1]; ++k) out.push_back(std::ldexp(1.0, -k));
    return out;
  }
  throw ConfigError("eps must be a list, a number or {powers_of_two: [lo, hi]}");
}

Scenario parse_scenario(const json& j) {
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  if (!j.contains("family")) throw ConfigError("scenario needs a family");
  Scenario s(parse_family(j.at("family")),
             j.contains("field") ? parse_field(j.at("field")) : SlowField::cosine_coupling());
  s.config = j;
  s.name = get_or<std::string>(j, "name", "scenario");
  if (!j.contains("eps")) throw ConfigError("scenario needs an eps list");
  s.eps = parse_eps_list(j.at("eps"));
  if (s.eps.empty()) throw ConfigError("eps list is empty");
  for (std::size_t i = 0; i < s.eps.size(); ++i) {
    const double e = s.eps[i];
    if (!(e > 0.0 && e < s.family.eps0()))
      throw ConfigError("eps values must lie in (0, eps0)");
    if (i > 0 && !(e < s.eps[i - 1])) throw ConfigError("eps values must be strictly decreasing");
  }
  s.ensemble = parse_ensemble(j.value("ensemble", json()));
  if (j.contains("q")) {
    s.q = j.at("q").is_array() ? j.at("q").get<std::vector<double>>()
                               : std::vector<double>{j.at("q").get<double>()};
    for (double q : s.q)
      if (!(q >= 1.0)) throw ConfigError("norm exponents q must be at least 1");
  }
  const json& xg = s.section("xgrid");
  s.xgrid_divisions = get_or<std::size_t>(xg, "divisions", 16);
  s.xgrid_single_point = get_or(xg, "single_point", false);
  if (s.xgrid_divisions < 1) throw ConfigError("xgrid divisions must be positive");
  const json& d = s.section("density");
  s.measure.k = get_or<std::size_t>(d, "bins", s.measure.k);
  s.measure.orbit_length = get_or<std::size_t>(d, "orbit_length", s.measure.orbit_length);
  s.measure.burn_in = get_or<std::size_t>(d, "burn_in", s.measure.burn_in);
  s.measure.force_ulam = get_or(d, "force_ulam", false);
  s.measure.tol = get_or(d, "tol", s.measure.tol);
  s.measure.max_iter = get_or<std::size_t>(d, "max_iter", s.measure.max_iter);
  s.measure.seed = s.ensemble.seed;
  s.ode_step = get_or(j, "ode_step", 1e-3);
  if (!(s.ode_step > 0.0)) throw ConfigError("ode_step must be positive");
  s.output_dir = get_or<std::string>(s.section("output"), "dir", "out/" + s.name);
  if (j.contains("seed")) s.set_seed(j.at("seed").get<std::uint64_t>());
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open scenario file " + path.string());
  json j;
  try {
    j = json::parse(f, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    return parse_scenario(j);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace fsavg
