#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fsavg/density.hpp"
#include "fsavg/ensemble.hpp"
#include "fsavg/error.hpp"
#include "fsavg/field.hpp"
#include "fsavg/maps.hpp"
#include "fsavg/orderfn.hpp"

namespace fsavg {

/// Raised for malformed or inconsistent scenario files.
class ConfigError : public UsageError {
 public:
  using UsageError::UsageError;
};

/// One experiment: a fast family, a slow field, an eps list and an ensemble.
/// Sections that only some subcommands read (tail, moments, appendix, ...)
/// stay in `config` and are looked up with `section`.
struct Scenario {
  Scenario(FastFamily f, SlowField s) : family(std::move(f)), field(std::move(s)) {}

  std::string name;
  nlohmann::json config;
  FastFamily family;
  SlowField field;
  std::vector<double> eps;
  EnsembleSpec ensemble;
  std::vector<double> q{2.0};
  std::size_t xgrid_divisions = 16;
  bool xgrid_single_point = false;
  MeasureOptions measure;
  double ode_step = 1e-3;
  std::string output_dir = "out";

  XGrid xgrid() const;
  /// The named section, or an empty object.
  const nlohmann::json& section(const std::string& key) const;
  void set_seed(std::uint64_t seed);
};

ParamSchedule parse_schedule(const nlohmann::json& j);
FastFamily parse_family(const nlohmann::json& j);
SlowField parse_field(const nlohmann::json& j);
EnsembleSpec parse_ensemble(const nlohmann::json& j);
/// Either a list of values or {"powers_of_two": [lo, hi]} for 2^-lo .. 2^-hi.
std::vector<double> parse_eps_list(const nlohmann::json& j);

Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace fsavg
