#include "fsavg/fastslow.hpp"

#include <algorithm>
#include <cmath>

#include "fsavg/error.hpp"

namespace fsavg {

std::span<const double> SlowPath::hat(double t) const {
  return at(std::min(stair_index(t, eps), steps()));
}

SlowPath iterate_slow(const SlowField& field, double eps, std::span<const PhasePoint> orbit) {
  if (orbit.empty()) throw UsageError("empty fast orbit");
  const auto d = static_cast<std::size_t>(field.dim());
  const std::size_t N = orbit.size() - 1;
  SlowPath path;
  path.eps = eps;
  path.dim = field.dim();
  path.x.resize((N + 1) * d);
  std::copy(field.x0().begin(), field.x0().end(), path.x.begin());
  Vec a(d);
  for (std::size_t n = 0; n < N; ++n) {
    const double* xn = path.x.data() + n * d;
    double* next = path.x.data() + (n + 1) * d;
    field.eval(std::span<const double>(xn, d), orbit[n], eps, a);
    for (std::size_t i = 0; i < d; ++i) {
      next[i] = xn[i] + eps * a[i];
      if (!std::isfinite(next[i])) throw NumericError("slow state became non-finite", n + 1);
    }
  }
  return path;
}

FastSlowRun iterate_fast_slow(const SlowField& field, const FastFamily& family, double eps,
                              const InitialCondition& y0) {
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  FastSlowRun run;
  run.orbit = fast_orbit(family, eps, y0, steps_for(eps));
  run.path = iterate_slow(field, eps, run.orbit);
  return run;
}

double deviation_z(const SlowPath& path, const OdePath& X) {
  if (X.size() == 0) throw UsageError("empty ODE path");
  if (X.dim != path.dim) throw UsageError("ODE and slow path dimensions differ");
  const std::size_t N = path.steps();
  double z = 0.0;
  std::size_t prev = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const std::size_t n = std::min(stair_index(X.t[i], path.eps), N);
    if (i > 0 && n != prev) {
      if (n != prev + 1 || static_cast<double>(n) * path.eps != X.t[i])
        throw UsageError("time grid misses a jump time of the slow staircase");
      z = std::max(z, max_norm_diff(path.at(prev), X.at(i)));
    }
    z = std::max(z, max_norm_diff(path.at(n), X.at(i)));
    prev = n;
  }
  return z;
}

double max_increment(const SlowPath& path) {
  double m = 0.0;
  for (std::size_t n = 0; n < path.steps(); ++n)
    m = std::max(m, max_norm_diff(path.at(n + 1), path.at(n)));
  return m;
}

}  // namespace fsavg
