#include "fsavg/stats.hpp"

#include <algorithm>
#include <cmath>

#include "fsavg/error.hpp"

namespace fsavg {

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UsageError("fit inputs differ in length");
  const std::size_t n = x.size();
  if (n < 2) throw UsageError("least squares needs at least 2 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw UsageError("least squares needs distinct abscissae");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  f.points = n;
  return f;
}

namespace {

bool fit_window(RateSeries& s) {
  std::vector<double> lx, ly;
  for (std::size_t i = s.window_lo; i < s.window_hi && i < s.values.size(); ++i) {
    if (s.values[i] > 0.0 && s.abscissa[i] > 0.0) {
      lx.push_back(std::log(s.abscissa[i]));
      ly.push_back(std::log(s.values[i]));
    }
  }
  if (lx.size() < 3) return false;
  s.fit = least_squares(lx, ly);
  s.has_fit = true;
  return true;
}

}  // namespace

RateSeries fit_rate(std::span<const double> abscissa, std::span<const double> values) {
  if (abscissa.size() != values.size()) throw UsageError("rate inputs differ in length");
  if (values.size() < 3) throw UsageError("rate fit needs at least 3 points");
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!(values[i] > 0.0) || !(abscissa[i] > 0.0))
      throw UsageError("rate fit needs positive points");
  RateSeries s;
  s.abscissa.assign(abscissa.begin(), abscissa.end());
  s.values.assign(values.begin(), values.end());
  s.window_hi = values.size();
  fit_window(s);
  return s;
}

RateSeries rate_series(std::vector<double> abscissa, std::vector<double> values,
                       std::size_t window_lo, std::size_t window_hi) {
  if (abscissa.size() != values.size()) throw UsageError("rate inputs differ in length");
  RateSeries s;
  s.abscissa = std::move(abscissa);
  s.values = std::move(values);
  s.window_lo = std::min(window_lo, s.values.size());
  s.window_hi = std::min(window_hi, s.values.size());
  fit_window(s);
  return s;
}

RateSeries rate_series_default(std::vector<double> abscissa, std::vector<double> values) {
  std::size_t lo = 0, hi = values.size();
  if (values.size() >= 4) {
    const auto it = std::max_element(abscissa.begin(), abscissa.end());
    const auto largest = static_cast<std::size_t>(it - abscissa.begin());
    if (largest == 0) lo = 1;
    else if (largest == values.size() - 1) hi = values.size() - 1;
  }
  return rate_series(std::move(abscissa), std::move(values), lo, hi);
}

double lq_norm(std::span<const double> s, double q) {
  if (s.empty()) throw UsageError("norm of an empty sample");
  if (!(q > 0.0)) throw UsageError("q must be positive");
  double acc = 0.0;
  for (double v : s) acc += std::pow(std::fabs(v), q);
  return std::pow(acc / static_cast<double>(s.size()), 1.0 / q);
}

double lq_norm(std::span<const double> s, std::span<const double> w, double q) {
  if (s.empty() || s.size() != w.size()) throw UsageError("weighted norm needs matching inputs");
  if (!(q > 0.0)) throw UsageError("q must be positive");
  double acc = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    acc += w[i] * std::pow(std::fabs(s[i]), q);
    wsum += w[i];
  }
  if (!(wsum > 0.0)) throw UsageError("weights sum to zero");
  return std::pow(acc / wsum, 1.0 / q);
}

double standard_error(std::span<const double> s) {
  if (s.size() < 2) return 0.0;
  double m = 0.0;
  for (double v : s) m += v;
  m /= static_cast<double>(s.size());
  double var = 0.0;
  for (double v : s) var += (v - m) * (v - m);
  var /= static_cast<double>(s.size() - 1);
  return std::sqrt(var / static_cast<double>(s.size()));
}

}  // namespace fsavg
