#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fsavg {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// (abscissa, statistic) pairs with a least-squares fit of log(statistic)
/// against log(abscissa) over the points with index in [window_lo, window_hi)
/// and positive statistic.
struct RateSeries {
  std::vector<double> abscissa;
  std::vector<double> values;
  std::size_t window_lo = 0;
  std::size_t window_hi = 0;
  bool has_fit = false;
  LinearFit fit;
};

/// Ordinary least squares of y on x. Throws UsageError for fewer than 2 points.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

/// Log-log fit over all points. Needs at least 3 points, all positive.
RateSeries fit_rate(std::span<const double> abscissa, std::span<const double> values);

/// Log-log fit restricted to a window; leaves has_fit false when fewer than
/// 3 positive points remain instead of throwing.
RateSeries rate_series(std::vector<double> abscissa, std::vector<double> values,
                       std::size_t window_lo, std::size_t window_hi);

/// Window dropping the largest abscissa (pre-asymptotic) when at least 4 points exist.
RateSeries rate_series_default(std::vector<double> abscissa, std::vector<double> values);

/// (mean |s|^q)^(1/q), optionally with weights.
double lq_norm(std::span<const double> s, double q);
double lq_norm(std::span<const double> s, std::span<const double> w, double q);

/// Standard error of the mean of s.
double standard_error(std::span<const double> s);

}  // namespace fsavg
