#include "fsavg/maps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fsavg/error.hpp"
#include "fsavg/kernels.hpp"

namespace fsavg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double lsv_unchecked(double a, double y) {
  if (y <= 0.5) return std::min(1.0, y + y * std::pow(2.0 * y, a));
  return 2.0 * y - 1.0;
}

double torus_lift(double b, double y) { return 2.0 * y + b * std::sin(kTwoPi * y) / kTwoPi; }

double tent_unchecked(double h, double x) {
  const double v = x <= 0.0 ? -1.0 + (h + 1.0) * (x + 1.0) : h - (h + 1.0) * x;
  return std::clamp(v, -1.0, 1.0);
}

}  // namespace

bool PhaseSpace::contains(const PhasePoint& p) const {
  switch (kind) {
    case PhaseSpaceKind::Circle:
      return p.y >= 0.0 && p.y < 1.0;
    case PhaseSpaceKind::Cylinder:
      return p.theta >= 0.0 && p.theta < 1.0 && p.y >= lo && p.y <= hi;
    case PhaseSpaceKind::UnitInterval:
    case PhaseSpaceKind::SymmetricInterval:
      return p.y >= lo && p.y <= hi;
  }
  return false;
}

double wrap_unit(double y) {
  const double r = y - std::floor(y);
  return r >= 1.0 ? 0.0 : r;
}

std::string to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::DoublingDrift: return "doubling-drift";
    case FamilyKind::SmoothExpandingTorus: return "smooth-expanding-torus";
    case FamilyKind::PiecewiseExpandingInterval: return "piecewise-expanding-interval";
    case FamilyKind::LsvIntermittent: return "lsv-intermittent";
    case FamilyKind::Quadratic: return "quadratic";
    case FamilyKind::Viana: return "viana";
  }
  return "unknown";
}

FamilyKind family_kind_from_string(const std::string& s) {
  for (auto k : {FamilyKind::DoublingDrift, FamilyKind::SmoothExpandingTorus,
                 FamilyKind::PiecewiseExpandingInterval, FamilyKind::LsvIntermittent,
                 FamilyKind::Quadratic, FamilyKind::Viana})
    if (to_string(k) == s) return k;
  if (s == "lsv") return FamilyKind::LsvIntermittent;
  throw UsageError("unknown family kind '" + s + "'");
}

// ParamSchedule

ParamSchedule ParamSchedule::affine(double base, double slope) {
  ParamSchedule s;
  s.base_ = base;
  s.slope_ = slope;
  return s;
}

ParamSchedule ParamSchedule::table(std::vector<std::pair<double, double>> knots) {
  if (knots.empty()) throw UsageError("parameter table needs at least one knot");
  if (knots.front().first != 0.0) throw UsageError("parameter table must start at eps = 0");
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i].first > knots[i - 1].first))
      throw UsageError("parameter table eps values must increase strictly");
  ParamSchedule s;
  s.base_ = knots.front().second;
  s.knots_ = std::move(knots);
  return s;
}

double ParamSchedule::at(double eps) const {
  if (knots_.empty()) return base_ + slope_ * eps;
  if (eps <= knots_.front().first) return knots_.front().second;
  if (eps >= knots_.back().first) return knots_.back().second;
  auto it = std::upper_bound(knots_.begin(), knots_.end(), eps,
                             [](double e, const auto& k) { return e < k.first; });
  const auto& [e1, v1] = *it;
  const auto& [e0, v0] = *(it - 1);
  return v0 + (v1 - v0) * (eps - e0) / (e1 - e0);
}

bool ParamSchedule::constant() const {
  if (knots_.empty()) return slope_ == 0.0;
  return std::all_of(knots_.begin(), knots_.end(),
                     [&](const auto& k) { return k.second == knots_.front().second; });
}

std::pair<double, double> ParamSchedule::range(double eps_max) const {
  if (knots_.empty()) {
    const double end = slope_ == 0.0 ? base_ : base_ + slope_ * eps_max;
    return {std::min(base_, end), std::max(base_, end)};
  }
  double lo = knots_.front().second, hi = lo;
  for (const auto& [e, v] : knots_) {
    if (e > eps_max) break;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double end = at(eps_max);
  return {std::min(lo, end), std::max(hi, end)};
}

// Branch

double Branch::image_lo() const { return std::min(map(lo), map(hi)); }
double Branch::image_hi() const { return std::max(map(lo), map(hi)); }

double Branch::preimage(double z) const {
  if (inverse) return std::clamp(inverse(z), lo, hi);
  double a = lo, b = hi;
  // Invariant: the preimage lies in [a, b].
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (a + b);
    if (!(mid > a && mid < b)) break;
    const double f = map(mid);
    if ((f < z) == increasing)
      a = mid;
    else
      b = mid;
  }
  return 0.5 * (a + b);
}

// Individual maps

double lsv_apply(double a, double y) {
  if (!(a > 0.0 && a < 1.0)) throw DomainError("intermittent map parameter must lie in (0, 1)");
  if (!(y >= 0.0 && y <= 1.0)) throw DomainError("intermittent map point must lie in [0, 1]");
  return lsv_unchecked(a, y);
}

double doubling_drift_apply(double beta, double eps, double y) {
  if (!(beta > 0.0)) throw DomainError("drift exponent must be positive");
  if (!(eps >= 0.0)) throw DomainError("eps must be nonnegative");
  if (!(y >= 0.0 && y < 1.0)) throw DomainError("circle point must lie in [0, 1)");
  return wrap_unit(2.0 * y + std::pow(eps, beta));
}

double quadratic_apply(double a, double x) {
  if (!(a >= -2.0 && a <= 2.0)) throw DomainError("quadratic parameter must lie in [-2, 2]");
  if (!(x >= -1.0 && x <= 1.0)) throw DomainError("quadratic map point must lie in [-1, 1]");
  return 1.0 - a * x * x;
}

PhasePoint viana_apply(double a0, double a, PhasePoint p) {
  if (!(p.theta >= 0.0 && p.theta < 1.0)) throw DomainError("circle coordinate must lie in [0, 1)");
  return {a0 + a * std::sin(kTwoPi * p.theta) - p.y * p.y, wrap_unit(16.0 * p.theta)};
}

// FastFamily

FastFamily FastFamily::doubling_drift(double beta, double scale, double eps0) {
  if (!(beta > 0.0)) throw DomainError("drift exponent must be positive");
  if (!(eps0 > 0.0)) throw DomainError("eps0 must be positive");
  FastFamily f;
  f.kind_ = FamilyKind::DoublingDrift;
  f.space_ = {PhaseSpaceKind::Circle, 0.0, 1.0};
  f.beta_ = beta;
  f.scale_ = scale;
  f.eps0_ = eps0;
  return f;
}

FastFamily FastFamily::smooth_expanding_torus(ParamSchedule b, double eps0) {
  const auto [lo, hi] = b.range(eps0);
  if (!(std::max(std::fabs(lo), std::fabs(hi)) < 1.0))
    throw DomainError("expanding circle family needs |b_eps| < 1 on [0, eps0)");
  FastFamily f;
  f.kind_ = FamilyKind::SmoothExpandingTorus;
  f.space_ = {PhaseSpaceKind::Circle, 0.0, 1.0};
  f.schedule_ = std::move(b);
  f.eps0_ = eps0;
  return f;
}

FastFamily FastFamily::piecewise_expanding(ParamSchedule height, double eps0) {
  const auto [lo, hi] = height.range(eps0);
  if (!(lo > 0.0 && hi <= 1.0)) throw DomainError("tent height must lie in (0, 1] on [0, eps0)");
  FastFamily f;
  f.kind_ = FamilyKind::PiecewiseExpandingInterval;
  f.space_ = {PhaseSpaceKind::SymmetricInterval, -1.0, 1.0};
  f.schedule_ = std::move(height);
  f.eps0_ = eps0;
  return f;
}

FastFamily FastFamily::lsv(ParamSchedule a, double eps0) {
  const auto [lo, hi] = a.range(eps0);
  if (!(lo > 0.0 && hi < 1.0))
    throw DomainError("intermittent family needs a_eps in (0, 1) on [0, eps0)");
  FastFamily f;
  f.kind_ = FamilyKind::LsvIntermittent;
  f.space_ = {PhaseSpaceKind::UnitInterval, 0.0, 1.0};
  f.schedule_ = std::move(a);
  f.eps0_ = eps0;
  return f;
}

FastFamily FastFamily::quadratic(ParamSchedule a, double eps0) {
  const auto [lo, hi] = a.range(eps0);
  if (!(lo >= 0.0 && hi <= 2.0))
    throw DomainError("quadratic family needs a_eps in [0, 2] on [0, eps0)");
  FastFamily f;
  f.kind_ = FamilyKind::Quadratic;
  f.space_ = {PhaseSpaceKind::SymmetricInterval, -1.0, 1.0};
  f.schedule_ = std::move(a);
  f.eps0_ = eps0;
  return f;
}

FastFamily FastFamily::viana(double a0, ParamSchedule a, double eps0) {
  const auto [lo, hi] = a.range(eps0);
  const double amp = std::max(std::fabs(lo), std::fabs(hi));
  const double top = a0 + amp;
  const double bottom = a0 - amp - top * top;
  if (!(top > 0.0 && std::fabs(bottom) <= top))
    throw DomainError("Viana parameters admit no invariant fiber interval");
  FastFamily f;
  f.kind_ = FamilyKind::Viana;
  f.space_ = {PhaseSpaceKind::Cylinder, bottom, top};
  f.schedule_ = std::move(a);
  f.eps0_ = eps0;
  f.a0_ = a0;
  return f;
}

double FastFamily::parameter(double eps) const {
  if (kind_ == FamilyKind::DoublingDrift) {
    if (scale_ == 0.0 || eps == 0.0) return 0.0;
    return wrap_unit(scale_ * std::pow(eps, beta_));
  }
  return schedule_.at(eps);
}

bool FastFamily::frozen() const {
  if (kind_ == FamilyKind::DoublingDrift) return scale_ == 0.0;
  return schedule_.constant();
}

void FastFamily::check_eps(double eps) const {
  if (!(eps >= 0.0 && eps < eps0_))
    throw DomainError("eps = " + std::to_string(eps) + " outside [0, eps0) for " + describe());
}

PhasePoint FastFamily::step(double param, PhasePoint p) const {
  switch (kind_) {
    case FamilyKind::DoublingDrift:
      return {wrap_unit(2.0 * p.y + param), 0.0};
    case FamilyKind::SmoothExpandingTorus:
      return {wrap_unit(torus_lift(param, p.y)), 0.0};
    case FamilyKind::PiecewiseExpandingInterval:
      return {tent_unchecked(param, p.y), 0.0};
    case FamilyKind::LsvIntermittent:
      return {lsv_unchecked(param, p.y), 0.0};
    case FamilyKind::Quadratic:
      return {std::clamp(1.0 - param * p.y * p.y, -1.0, 1.0), 0.0};
    case FamilyKind::Viana:
      return {a0_ + param * std::sin(kTwoPi * p.theta) - p.y * p.y, wrap_unit(16.0 * p.theta)};
  }
  return p;
}

PhasePoint FastFamily::apply(double eps, PhasePoint p) const {
  check_eps(eps);
  if (!space_.contains(p)) throw DomainError("point outside the phase space of " + describe());
  return step(parameter(eps), p);
}

std::vector<Branch> FastFamily::branches(double eps) const {
  check_eps(eps);
  const double q = parameter(eps);
  std::vector<Branch> out;
  switch (kind_) {
    case FamilyKind::DoublingDrift: {
      const double y1 = (1.0 - q) / 2.0;
      const double y2 = 1.0 - q / 2.0;
      out.push_back({0.0, y1, true, [q](double y) { return std::min(1.0, 2.0 * y + q); },
                     [q](double z) { return (z - q) / 2.0; }});
      out.push_back({y1, y2, true,
                     [q](double y) { return std::clamp(2.0 * y + q - 1.0, 0.0, 1.0); },
                     [q](double z) { return (z + 1.0 - q) / 2.0; }});
      if (q > 0.0)
        out.push_back({y2, 1.0, true,
                       [q](double y) { return std::clamp(2.0 * y + q - 2.0, 0.0, 1.0); },
                       [q](double z) { return (z + 2.0 - q) / 2.0; }});
      break;
    }
    case FamilyKind::SmoothExpandingTorus:
      out.push_back({0.0, 0.5, true,
                     [q](double y) { return std::clamp(torus_lift(q, y), 0.0, 1.0); }, {}});
      out.push_back({0.5, 1.0, true,
                     [q](double y) { return std::clamp(torus_lift(q, y) - 1.0, 0.0, 1.0); }, {}});
      break;
    case FamilyKind::PiecewiseExpandingInterval:
      out.push_back({-1.0, 0.0, true, [q](double x) { return tent_unchecked(q, x); },
                     [q](double z) { return (z + 1.0) / (q + 1.0) - 1.0; }});
      out.push_back({0.0, 1.0, false, [q](double x) { return tent_unchecked(q, x); },
                     [q](double z) { return (q - z) / (q + 1.0); }});
      break;
    case FamilyKind::LsvIntermittent:
      out.push_back({0.0, 0.5, true, [q](double y) { return lsv_unchecked(q, y); }, {}});
      out.push_back({0.5, 1.0, true, [](double y) { return 2.0 * y - 1.0; },
                     [](double z) { return (z + 1.0) / 2.0; }});
      break;
    case FamilyKind::Quadratic: {
      auto f = [q](double x) { return std::clamp(1.0 - q * x * x, -1.0, 1.0); };
      if (q == 0.0) {
        out.push_back({-1.0, 1.0, true, f, [](double) { return 0.0; }});
      } else {
        out.push_back({-1.0, 0.0, true, f,
                       [q](double z) { return -std::sqrt(std::max(0.0, (1.0 - z) / q)); }});
        out.push_back({0.0, 1.0, false, f,
                       [q](double z) { return std::sqrt(std::max(0.0, (1.0 - z) / q)); }});
      }
      break;
    }
    case FamilyKind::Viana:
      throw UsageError("Viana maps have no one-dimensional branch structure");
  }
  return out;
}

std::string FastFamily::describe() const {
  std::ostringstream os;
  os << to_string(kind_);
  if (kind_ == FamilyKind::DoublingDrift)
    os << "(beta=" << beta_ << ", scale=" << scale_ << ")";
  else if (kind_ == FamilyKind::Viana)
    os << "(a0=" << a0_ << ", a=" << schedule_.base() << "+" << schedule_.slope() << "*eps)";
  else
    os << "(p=" << schedule_.base() << "+" << schedule_.slope() << "*eps)";
  return os.str();
}

std::vector<PhasePoint> fast_orbit(const FastFamily& family, double eps,
                                   const InitialCondition& ic, std::size_t steps) {
  family.check_eps(eps);
  if (!family.phase_space().contains(ic.point))
    throw DomainError("initial point outside the phase space of " + family.describe());
  std::vector<PhasePoint> orbit(steps + 1);
  const double param = family.parameter(eps);

  if (family.kind() == FamilyKind::DoublingDrift) {
    // With u = y + c, the drift map is conjugate to pure doubling of u, so
    // y_n = frac(2^n u) - c (mod 1) is read from the digits of u.
    BinaryExpansion u;
    if (ic.digits && ic.digits_include_drift) {
      u = *ic.digits;
    } else {
      const BinaryExpansion y_digits =
          ic.digits ? *ic.digits : BinaryExpansion::from_double(ic.point.y);
      u = y_digits.plus(BinaryExpansion::from_double(param));
    }
    u.reserve_bits(steps + 128);
    std::vector<double> ys(steps + 1);
    kernels::active().expansion_windows(u.words(), 0, steps + 1, param, ys.data());
    for (std::size_t n = 0; n <= steps; ++n) orbit[n].y = ys[n];
    return orbit;
  }

  orbit[0] = ic.point;
  for (std::size_t n = 0; n < steps; ++n) orbit[n + 1] = family.step(param, orbit[n]);
  return orbit;
}

}  // namespace fsavg
