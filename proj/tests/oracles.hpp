#pragma once

// Straightforward reference computations used as test oracles. They share no
// code with the library beyond plain types.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace oracle {

inline double circle_distance(double a, double b) {
  const double d = std::fabs(a - b);
  return std::min(d, 1.0 - d);
}

/// Exact orbit of y -> 2y + c mod 1 for y0 = p / D and c = s / D (integers,
/// D < 2^62), returned as doubles.
inline std::vector<double> doubling_rational_orbit(std::uint64_t p, std::uint64_t s,
                                                   std::uint64_t D, std::size_t steps) {
  std::vector<double> out;
  unsigned __int128 y = p;
  for (std::size_t n = 0; n <= steps; ++n) {
    out.push_back(static_cast<double>(static_cast<long double>(y) / static_cast<long double>(D)));
    y = (2 * y + s) % D;
  }
  return out;
}

/// Euler sums x_{n+1} = x_n + eps cos(2 pi y_n) from x_0 = 0.
inline std::vector<double> cosine_slow_path(const std::vector<double>& ys, double eps) {
  std::vector<double> x{0.0};
  for (std::size_t n = 0; n + 1 < ys.size(); ++n)
    x.push_back(x.back() + eps * std::cos(2.0 * std::numbers::pi * ys[n]));
  return x;
}

/// Probability of [lo, hi] under the density 1 / (pi sqrt(1 - y^2)) on [-1, 1].
inline double arcsine_mass(double lo, double hi) {
  return (std::asin(hi) - std::asin(lo)) / std::numbers::pi;
}

/// Left branch of the intermittent map, written out directly.
inline double lsv_left(double a, double y) { return y * (1.0 + std::pow(2.0 * y, a)); }

/// Bisection preimage of z under the left branch on [0, 1/2].
inline double lsv_left_preimage(double a, double z) {
  double lo = 0.0, hi = 0.5;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (lsv_left(a, mid) < z ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracle
