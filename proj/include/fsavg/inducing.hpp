#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "fsavg/maps.hpp"
#include "fsavg/stats.hpp"

namespace fsavg {

/// One excursion from Y = [1/2, 1] back to Y.
struct ReturnSample {
  double y = 0.0;
  std::size_t tau = 0;
  double Fy = 0.0;
  std::vector<double> excursion;  ///< y, T y, ..., T^{tau-1} y when requested
};

constexpr std::size_t kDefaultReturnCap = 10000000;

/// First return of y in Y under an LSV family. Throws TruncationError when
/// no return happens within `cap` steps.
ReturnSample first_return(const FastFamily& family, double eps, double y,
                          std::size_t cap = kDefaultReturnCap, bool keep_orbit = false);

/// How Y is sampled for tail estimates. LogStratified mixes the uniform law
/// with a log-uniform law for y - 1/2 and reweights, which resolves the
/// tail far below 1/samples.
enum class TailSampling { Uniform, LogStratified };

struct TailEstimate {
  std::vector<double> n;         ///< 1..n_max
  std::vector<double> survival;  ///< estimate of m(tau > n) (m uniform on Y)
  std::vector<std::size_t> survivors;  ///< raw sample counts with tau > n
  std::size_t samples = 0;
  std::size_t truncated = 0;     ///< excursions still running at n_max
  RateSeries fit;                ///< log-log fit over [fit_lo, fit_hi]
  double fit_lo = 0.0;
  double fit_hi = 0.0;
  bool range_warning = false;    ///< too few survivors to fit up to n_max
};

/// Empirical survival function of tau on Y with a log-log slope fit over
/// n in [fit_lo, n_max]; the fit window is cut back to the largest n with at
/// least `min_survivors` raw survivors (and `range_warning` set) if needed.
TailEstimate tail_estimate(const FastFamily& family, double eps, std::size_t n_max,
                           std::size_t samples, std::uint64_t seed,
                           TailSampling sampling = TailSampling::Uniform, double fit_lo = 10.0,
                           std::size_t min_survivors = 20);

/// Exact survival x_n = m(tau > n): x_1 = 1/2 and x_{n+1} is the left-branch
/// preimage of x_n.
std::vector<double> lsv_survival_exact(double a, std::size_t n_max);

/// V(y) = sum over the excursion of v.
double induced_observable(const std::function<double(double)>& v, const FastFamily& family,
                          double eps, double y, std::size_t cap = kDefaultReturnCap);

struct MomentGrowth {
  RateSeries series;      ///< abscissa n, values |max_{j<=n} |V_j||_p
  double target = 0.0;    ///< max(1/2, 1/p)
  std::size_t samples = 0;
};

/// Monte Carlo L^p norms of the running max of induced Birkhoff sums
/// V_j = sum of V over the first j returns, starting from uniform points of Y.
MomentGrowth induced_moment_growth(const std::function<double(double)>& v,
                                   const FastFamily& family, double eps,
                                   const std::vector<std::size_t>& n_list, double p,
                                   std::size_t samples, std::uint64_t seed,
                                   std::size_t cap = kDefaultReturnCap);

/// Smallest |F y - F y'| / |y - y'| over sampled pairs in one partition
/// element {tau = n} of Y.
double min_return_expansion(const FastFamily& family, double eps, std::size_t pairs,
                            std::uint64_t seed);

/// Monte Carlo int tau^p over uniform points of Y (tau capped at `cap`).
double return_time_moment(const FastFamily& family, double eps, double p, std::size_t samples,
                          std::uint64_t seed, std::size_t cap = kDefaultReturnCap);

}  // namespace fsavg
