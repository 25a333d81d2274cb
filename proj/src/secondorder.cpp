#include "fsavg/secondorder.hpp"

#include <algorithm>
#include <cmath>

#include "fsavg/density.hpp"
#include "fsavg/error.hpp"

namespace fsavg {

FluctuationSums::FluctuationSums(const SlowField& field, std::span<const PhasePoint> orbit,
                                 const Vec& means)
    : K_(field.basis_size()), N_(orbit.empty() ? 0 : orbit.size() - 1) {
  if (orbit.empty()) throw UsageError("empty orbit");
  if (means.size() != K_) throw UsageError("basis means do not match the field");
  c_.assign((N_ + 1) * K_, 0.0);
  std::vector<double> phi(K_);
  for (std::size_t n = 1; n <= N_; ++n) {
    field.basis_values(orbit[n - 1], phi);
    for (std::size_t k = 0; k < K_; ++k)
      c_[n * K_ + k] = c_[(n - 1) * K_ + k] + (phi[k] - means[k]);
  }
}

UValue u_function(const SlowField& field, const FluctuationSums& sums, double eps, double delta,
                  const Vec& x, std::size_t n) {
  if (n > sums.steps()) throw UsageError("u evaluated beyond the orbit");
  const auto d = static_cast<std::size_t>(field.dim());
  UValue out;
  out.u.assign(d, 0.0);
  if (delta == 0.0) {
    out.degenerate = true;
    return out;
  }
  if (n == 0) return out;
  const std::size_t K = field.basis_size();
  std::vector<double> W(field.outputs() * K);
  field.loadings(x, eps, W);
  const auto c = sums.at(n);
  for (std::size_t i = 0; i < d; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) s += W[i * K + k] * c[k];
    out.u[i] = eps / delta * s;
  }
  return out;
}

Vec u_function_direct(const SlowField& field, std::span<const PhasePoint> orbit, const Vec& means,
                      double eps, double delta, const Vec& x, std::size_t n) {
  const auto d = static_cast<std::size_t>(field.dim());
  Vec u(d, 0.0);
  if (delta == 0.0 || n == 0) return u;
  const Vec abar = averaged_field(field, means, eps, x);
  for (std::size_t j = 0; j < n; ++j) {
    const Vec a = field.eval(x, orbit[j], eps);
    for (std::size_t i = 0; i < d; ++i) u[i] += a[i] - abar[i];
  }
  for (double& v : u) v *= eps / delta;
  return u;
}

std::vector<double> euler_sequence(const VectorField& abar, const Vec& x0, double eps,
                                   std::size_t N) {
  const std::size_t d = x0.size();
  std::vector<double> z((N + 1) * d);
  std::copy(x0.begin(), x0.end(), z.begin());
  Vec f(d);
  for (std::size_t n = 0; n < N; ++n) {
    abar(std::span<const double>(z.data() + n * d, d), f);
    for (std::size_t i = 0; i < d; ++i) {
      z[(n + 1) * d + i] = z[n * d + i] + eps * f[i];
      if (!std::isfinite(z[(n + 1) * d + i])) throw NumericError("Euler state became non-finite", n + 1);
    }
  }
  return z;
}

GronwallVerdict discrete_gronwall_check(std::span<const double> b, double C, double D,
                                        double rel_tol) {
  GronwallVerdict v;
  v.precondition = true;
  v.conclusion = true;
  double partial = 0.0;
  for (std::size_t n = 0; n < b.size(); ++n) {
    const double rhs = C + D * partial;
    if (!(b[n] >= 0.0) || b[n] > rhs + rel_tol * std::fabs(rhs)) {
      if (v.precondition) v.first_precondition_failure = n;
      v.precondition = false;
    }
    const double bound = C * std::pow(D + 1.0, static_cast<double>(n));
    if (b[n] > bound + rel_tol * std::fabs(bound)) {
      if (v.conclusion) v.first_conclusion_failure = n;
      v.conclusion = false;
    }
    partial += b[n];
  }
  return v;
}

bool AppendixTrace::all_hold() const {
  return std::all_of(verdicts.begin(), verdicts.end(),
                     [](const InequalityVerdict& v) { return v.holds(); });
}

AppendixTrace appendix_trace(const SlowField& field, const FastFamily& family, double eps,
                             const InitialCondition& y0, const Vec& means, const XGrid& grid,
                             double ode_step) {
  const auto d = static_cast<std::size_t>(field.dim());
  const double L = field.L();
  AppendixTrace t;
  t.eps = eps;
  t.dim = field.dim();
  t.N = steps_for(eps);
  const std::size_t N = t.N;
  t.orbit = fast_orbit(family, eps, y0, N);
  const SlowPath path = iterate_slow(field, eps, t.orbit);
  t.x = path.x;
  t.order = order_function(field, t.orbit, eps, means, grid);
  t.delta = t.order.relaxed();
  const bool small = t.delta <= 0.5;

  const FluctuationSums sums(field, t.orbit, means);
  const auto abar = averaged_vector_field(field, means, eps);
  t.w.assign((N + 1) * d, 0.0);
  std::copy(field.x0().begin(), field.x0().end(), t.w.begin());
  // The sup of |u| equals 1 by construction; allow for rounding.
  t.u_bound = 1.0 + (t.delta > 0.0 ? t.order.grid_gap / t.delta : 0.0) + 1e-12;
  for (std::size_t n = 1; n <= N; ++n) {
    const Vec prev(t.w.begin() + static_cast<std::ptrdiff_t>((n - 1) * d),
                   t.w.begin() + static_cast<std::ptrdiff_t>(n * d));
    const UValue u = u_function(field, sums, eps, t.delta, prev, n);
    t.u_degenerate = t.u_degenerate || u.degenerate;
    if (max_norm_diff(prev, field.x0()) <= field.budget().L1) t.u_max = std::max(t.u_max, max_norm(u.u));
    for (std::size_t i = 0; i < d; ++i) t.w[n * d + i] = t.x[n * d + i] - t.delta * u.u[i];
  }

  Vec f(d);
  Vec drift(d, 0.0);
  double lem_w = 0.0, step = 0.0;
  t.residual.assign(N, 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    abar(t.row(t.w, n), f);
    double r = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      r = std::max(r, std::fabs(t.w[(n + 1) * d + i] - t.w[n * d + i] - eps * f[i]));
      drift[i] += eps * f[i];
    }
    t.residual[n] = r;
    step = std::max(step, r);
    for (std::size_t i = 0; i < d; ++i)
      lem_w = std::max(lem_w, std::fabs(t.w[(n + 1) * d + i] - t.w[i] - drift[i]));
  }

  t.z = euler_sequence(abar, field.x0(), eps, N);
  double xz = 0.0;
  for (std::size_t n = 0; n <= N; ++n) xz = std::max(xz, max_norm_diff(t.row(t.x, n), t.row(t.z, n)));

  const OdePath X = solve_averaged_ode(abar, field.x0(), time_grid(eps, ode_step), ode_step);
  t.X.assign((N + 1) * d, 0.0);
  for (std::size_t i = 0; i < X.size(); ++i) {
    const std::size_t n = stair_index(X.t[i], eps);
    if (n <= N && static_cast<double>(n) * eps == X.t[i])
      std::copy(X.at(i).begin(), X.at(i).end(), t.X.begin() + static_cast<std::ptrdiff_t>(n * d));
  }
  double ga5 = 0.0;
  for (std::size_t n = 0; n <= N; ++n) ga5 = std::max(ga5, max_norm_diff(t.row(t.X, n), t.row(t.z, n)));
  t.deviation = deviation_z(path, X);

  const double e2L = std::exp(2.0 * L);
  t.verdicts = {
      {"u-bound", t.u_max, t.u_bound, true},
      {"corrected-drift", lem_w, 4.0 * L * t.delta, small},
      {"corrected-step", step, 4.0 * L * eps * t.delta, small},
      {"euler-gap", xz, 5.0 * t.delta * e2L, small},
      {"euler-ode", ga5, L * L * std::exp(L) * eps + 1e-8, true},
      {"second-order-deviation", t.deviation, 5.0 * e2L * (t.delta + eps), small},
  };
  return t;
}

}  // namespace fsavg
