#include "fsavg/ode.hpp"

#include <algorithm>
#include <cmath>

#include "fsavg/error.hpp"

namespace fsavg {

std::size_t steps_for(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("eps must be positive");
  auto n = static_cast<std::size_t>(std::floor(1.0 / eps));
  while (static_cast<double>(n + 1) * eps <= 1.0) ++n;
  while (n > 0 && static_cast<double>(n) * eps > 1.0) --n;
  return n;
}

std::size_t stair_index(double t, double eps) {
  if (t <= 0.0) return 0;
  auto n = static_cast<std::size_t>(std::floor(t / eps));
  while (static_cast<double>(n + 1) * eps <= t) ++n;
  while (n > 0 && static_cast<double>(n) * eps > t) --n;
  return n;
}

std::vector<double> time_grid(double eps, double step) {
  if (!(step > 0.0)) throw UsageError("time step must be positive");
  const std::size_t n_slow = steps_for(eps);
  const auto n_fine = static_cast<std::size_t>(std::ceil(1.0 / step - 1e-9));
  std::vector<double> grid;
  grid.reserve(n_slow + n_fine + 2);
  for (std::size_t n = 0; n <= n_slow; ++n) grid.push_back(static_cast<double>(n) * eps);
  for (std::size_t j = 1; j < n_fine; ++j) grid.push_back(static_cast<double>(j) * step);
  grid.push_back(1.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

OdePath solve_averaged_ode(const VectorField& abar, const Vec& x0, const std::vector<double>& grid,
                           double max_step) {
  if (grid.empty()) throw UsageError("empty time grid");
  if (!(max_step > 0.0)) throw UsageError("ODE step must be positive");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] >= grid[i - 1])) throw UsageError("time grid must be sorted");

  const std::size_t d = x0.size();
  OdePath out;
  out.dim = static_cast<int>(d);
  out.t = grid;
  out.x.resize(grid.size() * d);
  Vec x = x0, k1(d), k2(d), k3(d), k4(d), tmp(d);
  std::copy(x.begin(), x.end(), out.x.begin());

  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double span = grid[i] - grid[i - 1];
    const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span / max_step)));
    const double h = span / static_cast<double>(m);
    for (std::size_t s = 0; s < m && h > 0.0; ++s) {
      abar(x, k1);
      for (std::size_t j = 0; j < d; ++j) tmp[j] = x[j] + 0.5 * h * k1[j];
      abar(tmp, k2);
      for (std::size_t j = 0; j < d; ++j) tmp[j] = x[j] + 0.5 * h * k2[j];
      abar(tmp, k3);
      for (std::size_t j = 0; j < d; ++j) tmp[j] = x[j] + h * k3[j];
      abar(tmp, k4);
      for (std::size_t j = 0; j < d; ++j)
        x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    for (double v : x)
      if (!std::isfinite(v)) throw NumericError("averaged ODE state became non-finite", i);
    std::copy(x.begin(), x.end(), out.x.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  return out;
}

}  // namespace fsavg
