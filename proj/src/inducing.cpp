#include "fsavg/inducing.hpp"

#include <algorithm>
#include <cmath>

#include "fsavg/error.hpp"
#include "fsavg/rng.hpp"

namespace fsavg {

namespace {

constexpr std::size_t kPartialKeep = 1024;

void require_lsv(const FastFamily& family) {
  if (family.kind() != FamilyKind::LsvIntermittent)
    throw UsageError("inducing is available for LSV families only");
}

void require_in_y(double y) {
  if (!(y >= 0.5 && y <= 1.0)) throw DomainError("point outside Y = [1/2, 1]");
}

// Return time capped at cap + 1 ("still outside Y after cap steps").
std::size_t capped_tau(const FastFamily& family, double param, double y, std::size_t cap,
                       double* Fy = nullptr) {
  PhasePoint p{y, 0.0};
  for (std::size_t n = 1; n <= cap; ++n) {
    p = family.step(param, p);
    if (p.y >= 0.5) {
      if (Fy) *Fy = p.y;
      return n;
    }
  }
  return cap + 1;
}

long double lsv_long(long double a, long double y) {
  if (y <= 0.5L) return y + y * std::pow(2.0L * y, a);
  return 2.0L * y - 1.0L;
}

}  // namespace

ReturnSample first_return(const FastFamily& family, double eps, double y, std::size_t cap,
                          bool keep_orbit) {
  require_lsv(family);
  family.check_eps(eps);
  require_in_y(y);
  if (cap < 1) throw UsageError("return cap must be at least 1");
  const double param = family.parameter(eps);
  ReturnSample s;
  s.y = y;
  std::vector<double> orbit;
  PhasePoint p{y, 0.0};
  for (std::size_t n = 1;; ++n) {
    if (keep_orbit || orbit.size() < kPartialKeep) orbit.push_back(p.y);
    p = family.step(param, p);
    if (p.y >= 0.5) {
      s.tau = n;
      s.Fy = p.y;
      break;
    }
    if (n >= cap) throw TruncationError("excursion exceeded the return cap", std::move(orbit));
  }
  if (keep_orbit) s.excursion = std::move(orbit);
  return s;
}

std::vector<double> lsv_survival_exact(double a, std::size_t n_max) {
  if (!(a > 0.0 && a < 1.0)) throw DomainError("LSV parameter must lie in (0, 1)");
  std::vector<double> x(n_max);
  if (n_max == 0) return x;
  x[0] = 0.5;
  for (std::size_t n = 1; n < n_max; ++n) {
    const double target = x[n - 1];
    double lo = 0.0, hi = target;
    for (int it = 0; it < 2000; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (!(mid > lo && mid < hi)) break;
      if (lsv_apply(a, mid) < target)
        lo = mid;
      else
        hi = mid;
    }
    x[n] = 0.5 * (lo + hi);
  }
  return x;
}

TailEstimate tail_estimate(const FastFamily& family, double eps, std::size_t n_max,
                           std::size_t samples, std::uint64_t seed, TailSampling sampling,
                           double fit_lo, std::size_t min_survivors) {
  require_lsv(family);
  family.check_eps(eps);
  if (samples < 10000) throw UsageError("tail estimates need at least 10^4 samples");
  if (n_max < 2) throw UsageError("n_max must be at least 2");
  const double param = family.parameter(eps);
  constexpr double s_min = 1e-12;
  const double log_span = std::log(0.5 / s_min);

  std::vector<double> wsum(n_max + 2, 0.0);
  std::vector<std::size_t> count(n_max + 2, 0);
  for (std::size_t i = 0; i < samples; ++i) {
    CounterRng rng(seed, i);
    double y, w = 1.0;
    if (sampling == TailSampling::Uniform) {
      y = 0.5 + 0.5 * rng.uniform();
    } else {
      const bool log_branch = rng.uniform() < 0.5;
      const double u = rng.uniform();
      const double s = log_branch ? s_min * std::exp(u * log_span) : 0.5 * u;
      y = 0.5 + s;
      const double q = 0.5 * 2.0 + (s >= s_min ? 0.5 / (s * log_span) : 0.0);
      w = 2.0 / q;
    }
    if (y > 1.0) y = 1.0;
    const std::size_t tau = capped_tau(family, param, y, n_max);
    wsum[tau] += w;
    count[tau] += 1;
  }

  TailEstimate t;
  t.samples = samples;
  t.truncated = count[n_max + 1];
  t.n.resize(n_max);
  t.survival.resize(n_max);
  t.survivors.resize(n_max);
  double wtail = wsum[n_max + 1];
  std::size_t ctail = count[n_max + 1];
  for (std::size_t n = n_max; n >= 1; --n) {
    // tau > n  <=>  tau in {n+1, ..., n_max, n_max+1}
    t.n[n - 1] = static_cast<double>(n);
    t.survival[n - 1] = wtail / static_cast<double>(samples);
    t.survivors[n - 1] = ctail;
    wtail += wsum[n];
    ctail += count[n];
  }

  std::size_t hi = n_max;
  while (hi >= 1 && t.survivors[hi - 1] < min_survivors) --hi;
  t.range_warning = hi < n_max;
  t.fit_lo = fit_lo;
  t.fit_hi = static_cast<double>(hi);
  std::vector<double> fx, fy;
  if (static_cast<double>(hi) > fit_lo) {
    const double l0 = std::log(fit_lo), l1 = std::log(static_cast<double>(hi));
    std::size_t last = 0;
    for (int j = 0; j <= 40; ++j) {
      const auto n = static_cast<std::size_t>(std::lround(std::exp(l0 + (l1 - l0) * j / 40.0)));
      if (n == last || n < 1 || n > hi) continue;
      last = n;
      fx.push_back(static_cast<double>(n));
      fy.push_back(t.survival[n - 1]);
    }
  }
  const std::size_t m = fx.size();
  t.fit = rate_series(std::move(fx), std::move(fy), 0, m);
  return t;
}

double induced_observable(const std::function<double(double)>& v, const FastFamily& family,
                          double eps, double y, std::size_t cap) {
  const ReturnSample s = first_return(family, eps, y, cap, true);
  double V = 0.0;
  for (double p : s.excursion) V += v(p);
  return V;
}

MomentGrowth induced_moment_growth(const std::function<double(double)>& v,
                                   const FastFamily& family, double eps,
                                   const std::vector<std::size_t>& n_list, double p,
                                   std::size_t samples, std::uint64_t seed, std::size_t cap) {
  require_lsv(family);
  family.check_eps(eps);
  if (samples < 100) throw UsageError("moment growth needs at least 100 samples");
  if (!(p > 1.0)) throw UsageError("moment order p must exceed 1");
  if (n_list.empty()) throw UsageError("empty n list");
  for (std::size_t i = 0; i < n_list.size(); ++i)
    if (n_list[i] < 1 || (i > 0 && n_list[i] <= n_list[i - 1]))
      throw UsageError("n list must be positive and increasing");
  const double param = family.parameter(eps);
  const std::size_t n_max = n_list.back();
  std::vector<double> acc(n_list.size(), 0.0);
  for (std::size_t i = 0; i < samples; ++i) {
    CounterRng rng(seed, i);
    PhasePoint q{0.5 + 0.5 * rng.uniform(), 0.0};
    if (q.y > 1.0) q.y = 1.0;
    double Vsum = 0.0, M = 0.0;
    std::size_t next = 0;
    for (std::size_t j = 1; j <= n_max; ++j) {
      std::size_t steps = 0;
      do {
        Vsum += v(q.y);
        q = family.step(param, q);
        if (++steps > cap) throw TruncationError("excursion exceeded the return cap", {});
      } while (q.y < 0.5);
      M = std::max(M, std::fabs(Vsum));
      if (j == n_list[next]) {
        acc[next] += std::pow(M, p);
        ++next;
      }
    }
  }
  std::vector<double> xs, norms;
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    xs.push_back(static_cast<double>(n_list[k]));
    norms.push_back(std::pow(acc[k] / static_cast<double>(samples), 1.0 / p));
  }
  MomentGrowth g;
  g.samples = samples;
  g.target = std::max(0.5, 1.0 / p);
  const std::size_t m = xs.size();
  g.series = rate_series(std::move(xs), std::move(norms), 0, m);
  return g;
}

double min_return_expansion(const FastFamily& family, double eps, std::size_t pairs,
                            std::uint64_t seed) {
  require_lsv(family);
  family.check_eps(eps);
  const long double a = family.parameter(eps);
  auto tau_and_F = [&](long double y, long double& F) {
    std::size_t n = 0;
    do {
      y = lsv_long(a, y);
      ++n;
    } while (y < 0.5L && n < 1000000);
    F = y;
    return n;
  };
  double best = std::numeric_limits<double>::infinity();
  CounterRng rng(seed, 0);
  for (std::size_t i = 0; i < pairs; ++i) {
    const long double y = 0.5L + 0.5L * static_cast<long double>(rng.uniform());
    long double Fy = 0.0L;
    const std::size_t tau = tau_and_F(y, Fy);
    for (long double h = 1e-8L; h > 1e-15L; h *= 0.125L) {
      const long double y2 = y + h <= 1.0L ? y + h : y - h;
      long double Fy2 = 0.0L;
      if (tau_and_F(y2, Fy2) != tau) continue;
      best = std::min(best, static_cast<double>(std::fabs(Fy2 - Fy) / std::fabs(y2 - y)));
      break;
    }
  }
  return best;
}

double return_time_moment(const FastFamily& family, double eps, double p, std::size_t samples,
                          std::uint64_t seed, std::size_t cap) {
  require_lsv(family);
  family.check_eps(eps);
  if (samples == 0) throw UsageError("no samples");
  const double param = family.parameter(eps);
  double acc = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    CounterRng rng(seed, i);
    const double y = std::min(1.0, 0.5 + 0.5 * rng.uniform());
    const auto tau = static_cast<double>(std::min(capped_tau(family, param, y, cap), cap));
    acc += std::pow(tau, p);
  }
  return acc / static_cast<double>(samples);
}

}  // namespace fsavg
