#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "fsavg/density.hpp"
#include "fsavg/error.hpp"
#include "fsavg/inducing.hpp"
#include "fsavg/orderfn.hpp"
#include "fsavg/scenario.hpp"
#include "fsavg/stats.hpp"

namespace fsavg {

/// An error raised while processing one sample of one eps.
class ScenarioError : public Error {
 public:
  ScenarioError(const std::string& what, double eps, std::size_t sample);
  double eps() const noexcept { return eps_; }
  std::size_t sample() const noexcept { return sample_; }

 private:
  double eps_;
  std::size_t sample_;
};

/// Outcome of one asserted inequality, aggregated over a run.
struct Verdict {
  std::string name;
  std::size_t checked = 0;
  std::size_t violations = 0;
  double worst_lhs = 0.0;  ///< lhs at the smallest slack
  double worst_rhs = 0.0;
  double min_slack = 0.0;  ///< smallest rhs - lhs seen (inf when nothing checked)

  explicit Verdict(std::string n = {});
  void add(double lhs, double rhs);
  bool holds() const { return violations == 0; }
  nlohmann::json to_json() const;
};

bool all_hold(const std::vector<Verdict>& v);
nlohmann::json verdicts_json(const std::vector<Verdict>& v);

struct RunOptions {
  unsigned threads = 0;
};

struct SampleRecord {
  double eps = 0.0;
  std::size_t index = 0;
  double y0 = 0.0;
  double theta0 = 0.0;
  double z = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double relaxed = 0.0;
  double increment = 0.0;
};

struct EpsSummary {
  double eps = 0.0;
  std::size_t N = 0;
  double R = 0.0;
  double S = 0.0;
  std::vector<double> z_norm;      ///< per q
  std::vector<double> delta_norm;  ///< per q, relaxed order function
  std::size_t small_delta = 0;     ///< samples with relaxed delta <= 1/2
  double z_max = 0.0;
};

struct ScenarioResult {
  std::uint64_t seed = 0;
  std::vector<double> q;
  std::vector<EpsSummary> per_eps;
  std::vector<SampleRecord> samples;  ///< eps-major, index order
  std::vector<RateSeries> z_rates;    ///< per q, abscissa eps
  std::vector<RateSeries> delta_rates;
  std::vector<Verdict> verdicts;

  bool all_hold() const { return fsavg::all_hold(verdicts); }
};

/// Samples the ensemble for every eps, runs the fast-slow system and the
/// order function, and attaches stability distances, L^q norms and rate fits.
/// Asserted: the pathwise deviation bound on orbits with delta <= 1/2, the
/// uniform bound z <= 2L, the slow increment bound, the L^q comparison and
/// S <= L R + eps.
ScenarioResult run_scenario(const Scenario& s, const RunOptions& opt = {});

struct CounterexampleRecord {
  double beta = 0.0;
  double delta = 0.0;
  double y0 = 0.0;
  std::size_t N = 0;       ///< floor(delta^-1/2)
  std::string k_hex;       ///< k - 1 in hexadecimal (it can exceed 64 bits)
  double eps = 0.0;
  double drift = 0.0;      ///< eps^beta
  std::size_t steps = 0;
  double x_hat_1 = 0.0;
  double bound = 0.0;      ///< 1 - 5 (eps^1/2 + eps)
  bool frozen = false;     ///< y_n = -eps^beta mod 1 for every n >= N
  bool eps_ok = false;     ///< 0 < eps <= delta

  bool holds() const { return frozen && eps_ok && x_hat_1 >= bound; }
};

/// Builds the eps for which the orbit of y0 lands on the fixed point of the
/// drifted doubling map after N steps and runs a = cos(2 pi y), x0 = 0.
/// Throws PreconditionError unless delta^beta - 2^-N > 0.
CounterexampleRecord counterexample_run(double beta, double delta, double y0);

/// |z|_{L^1} over Lebesgue-random y0 for the same system and eps.
double counterexample_random_l1(double beta, double eps, std::size_t samples, std::uint64_t seed,
                                unsigned threads = 0);

struct AppendixSummary {
  double eps = 0.0;
  std::size_t orbits = 0;
  std::size_t applicable = 0;  ///< orbits with delta <= 1/2
  std::vector<Verdict> verdicts;
  double max_deviation = 0.0;
};

/// Second-order construction bounds over the scenario ensemble at its first eps.
AppendixSummary appendix_suite(const Scenario& s, const RunOptions& opt = {},
                               std::vector<double>* first_trace = nullptr);

struct DensityRow {
  double eps = 0.0;
  double R = 0.0;
  double S = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
  double uniform_error = 0.0;   ///< max |rho - 1| (uniform reference)
  double reference_l1 = 0.0;    ///< interior L^1 distance to the reference density
};

struct DensityReport {
  std::string reference;  ///< "", "uniform" or "arcsine"
  std::vector<DensityRow> rows;
  std::vector<StationaryMeasure> measures;  ///< per eps
  StationaryMeasure m0;
  RateSeries S_series;
  std::vector<Verdict> verdicts;
};

/// Invariant densities for every eps and for eps = 0, with R, S, S <= L R + eps,
/// the optional closed-form comparison and the S trend.
DensityReport density_suite(const Scenario& s);

/// Interior L^1 distance between bin probabilities on [-1, 1] and the density
/// 1 / (pi sqrt(1 - y^2)), skipping `skip` bins at each end.
double arcsine_interior_l1(const StationaryMeasure& m, std::size_t skip = 1);

struct TailReport {
  TailEstimate tail;
  double a = 0.0;
  double target = 0.0;   ///< -1/a
  double rel_error = 0.0;
  std::vector<double> exact;  ///< exact survival at n
  bool have_moments = false;
  MomentGrowth moments;
  std::vector<Verdict> verdicts;
};

/// Return-time tail of an LSV family at its first eps and, when configured,
/// the growth of induced Birkhoff sums.
TailReport induce_suite(const Scenario& s);

struct SuspensionReport {
  double K1 = 0.0;
  double K2 = 0.0;
  double additivity_error = 0.0;
  std::vector<double> eps;
  std::vector<double> vw_lhs, vw_rhs;
  std::vector<double> S;
  std::size_t flow_checked = 0;
  std::vector<double> trace;  ///< rows (t, y, u, x...) of the first orbit at the first eps
  std::vector<Verdict> verdicts;
};

/// Semiflow additivity, the flow/induced order function comparison and the
/// continuous-time deviation bound.
SuspensionReport suspension_suite(const Scenario& s, const RunOptions& opt = {});

struct OrderRecord {
  double eps = 0.0;
  std::size_t index = 0;
  double y0 = 0.0;
  OrderFunctionSample sample;
};

struct OrderReport {
  std::vector<OrderRecord> records;
  std::vector<std::vector<double>> norms;  ///< per eps, per q (relaxed delta)
  bool have_moments = false;
  MomentScalingResult moments;
  std::vector<Verdict> verdicts;
};

/// Order functions over the ensemble; optional moment scaling.
OrderReport orderfn_suite(const Scenario& s, const RunOptions& opt = {});

}  // namespace fsavg
