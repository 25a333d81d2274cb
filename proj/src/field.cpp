#include "fsavg/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fsavg/error.hpp"
#include "fsavg/rng.hpp"

namespace fsavg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double psi(XFunction f, double s, double v) {
  switch (f) {
    case XFunction::One: return 1.0;
    case XFunction::Sin: return std::sin(s * v);
    case XFunction::Cos: return std::cos(s * v);
    case XFunction::Tanh: return std::tanh(s * v);
  }
  return 0.0;
}

double dpsi(XFunction f, double s, double v) {
  switch (f) {
    case XFunction::One: return 0.0;
    case XFunction::Sin: return s * std::cos(s * v);
    case XFunction::Cos: return -s * std::sin(s * v);
    case XFunction::Tanh: {
      const double t = std::tanh(s * v);
      return s * (1.0 - t * t);
    }
  }
  return 0.0;
}

double phi(YFunction f, int m, const PhasePoint& p) {
  switch (f) {
    case YFunction::One: return 1.0;
    case YFunction::Cos: return std::cos(kTwoPi * m * p.y);
    case YFunction::Sin: return std::sin(kTwoPi * m * p.y);
    case YFunction::Identity: return p.y;
    case YFunction::Square: return p.y * p.y;
    case YFunction::ThetaCos: return std::cos(kTwoPi * m * p.theta);
    case YFunction::ThetaSin: return std::sin(kTwoPi * m * p.theta);
  }
  return 0.0;
}

bool uses_harmonic(YFunction f) {
  return f == YFunction::Cos || f == YFunction::Sin || f == YFunction::ThetaCos ||
         f == YFunction::ThetaSin;
}

}  // namespace

double max_norm(std::span<const double> v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::fabs(e));
  return m;
}

double max_norm_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

std::string to_string(YFunction f) {
  switch (f) {
    case YFunction::One: return "one";
    case YFunction::Cos: return "cos2pi";
    case YFunction::Sin: return "sin2pi";
    case YFunction::Identity: return "identity";
    case YFunction::Square: return "square";
    case YFunction::ThetaCos: return "theta-cos2pi";
    case YFunction::ThetaSin: return "theta-sin2pi";
  }
  return "?";
}

std::string to_string(XFunction f) {
  switch (f) {
    case XFunction::One: return "one";
    case XFunction::Sin: return "sin";
    case XFunction::Cos: return "cos";
    case XFunction::Tanh: return "tanh";
  }
  return "?";
}

YFunction yfunction_from_string(const std::string& s) {
  for (auto f : {YFunction::One, YFunction::Cos, YFunction::Sin, YFunction::Identity,
                 YFunction::Square, YFunction::ThetaCos, YFunction::ThetaSin})
    if (to_string(f) == s) return f;
  throw UsageError("unknown fast-variable function '" + s + "'");
}

XFunction xfunction_from_string(const std::string& s) {
  for (auto f : {XFunction::One, XFunction::Sin, XFunction::Cos, XFunction::Tanh})
    if (to_string(f) == s) return f;
  throw UsageError("unknown slow-variable function '" + s + "'");
}

double LipschitzBudget::L() const { return std::max({L1, L2, L3}); }

SlowField::SlowField(int dim, Vec x0, std::vector<FieldTerm> terms, LipschitzBudget budget)
    : dim_(dim), x0_(std::move(x0)), terms_(std::move(terms)), budget_(budget) {
  if (dim_ < 1 || dim_ > 3) throw UsageError("slow dimension must be 1, 2 or 3");
  if (static_cast<int>(x0_.size()) != dim_) throw UsageError("x0 has the wrong dimension");
  if (budget_.L1 < 1.0 || budget_.L2 < 1.0 || budget_.L3 < 1.0)
    throw UsageError("Lipschitz constants L1, L2, L3 must be at least 1");
  for (const auto& t : terms_) {
    if (t.component < 0 || t.component >= dim_ || t.xvar < 0 || t.xvar >= dim_)
      throw UsageError("field term refers to a coordinate outside the slow dimension");
    if (uses_harmonic(t.y) && t.harmonic < 1) throw UsageError("harmonic must be positive");
    const BasisKey key{t.y, uses_harmonic(t.y) ? t.harmonic : 1};
    auto it = std::find(basis_.begin(), basis_.end(), key);
    if (it == basis_.end()) {
      basis_.push_back(key);
      it = basis_.end() - 1;
    }
    term_basis_.push_back(static_cast<std::size_t>(it - basis_.begin()));
  }
}

SlowField SlowField::cosine_coupling() {
  return SlowField(1, {0.0}, {FieldTerm{0, YFunction::Cos, 1, XFunction::One, 0, 1.0, 1.0, 0.0}},
                   {1.0, 1.0, 1.0});
}

SlowField SlowField::modulated_cosine() {
  return SlowField(1, {0.0},
                   {FieldTerm{0, YFunction::One, 1, XFunction::Cos, 0, 1.0, 0.5, 0.0},
                    FieldTerm{0, YFunction::Cos, 1, XFunction::Cos, 0, 1.0, 0.5, 0.0}},
                   {1.0, 1.0, 1.0});
}

bool SlowField::x_independent() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const FieldTerm& t) { return t.x == XFunction::One; });
}

bool SlowField::y_independent() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const FieldTerm& t) { return t.y == YFunction::One; });
}

double SlowField::basis(std::size_t k, const PhasePoint& p) const {
  return phi(basis_[k].f, basis_[k].m, p);
}

void SlowField::basis_values(const PhasePoint& p, std::span<double> out) const {
  for (std::size_t k = 0; k < basis_.size(); ++k) out[k] = phi(basis_[k].f, basis_[k].m, p);
}

void SlowField::loadings(std::span<const double> x, double eps, std::span<double> out) const {
  const std::size_t K = basis_.size();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    const FieldTerm& term = terms_[t];
    const double c = term.coef + term.eps_coef * eps;
    const double xv = x[static_cast<std::size_t>(term.xvar)];
    const auto i = static_cast<std::size_t>(term.component);
    const auto j = static_cast<std::size_t>(term.xvar);
    const std::size_t k = term_basis_[t];
    out[i * K + k] += c * psi(term.x, term.xscale, xv);
    if (term.x != XFunction::One) {
      const std::size_t r = static_cast<std::size_t>(dim_) + i * static_cast<std::size_t>(dim_) + j;
      out[r * K + k] += c * dpsi(term.x, term.xscale, xv);
    }
  }
}

void SlowField::eval(std::span<const double> x, const PhasePoint& y, double eps,
                     std::span<double> out) const {
  std::fill(out.begin(), out.begin() + dim_, 0.0);
  for (const auto& t : terms_)
    out[static_cast<std::size_t>(t.component)] +=
        (t.coef + t.eps_coef * eps) * phi(t.y, t.harmonic, y) *
        psi(t.x, t.xscale, x[static_cast<std::size_t>(t.xvar)]);
}

Vec SlowField::eval(const Vec& x, const PhasePoint& y, double eps) const {
  Vec out(static_cast<std::size_t>(dim_));
  eval(std::span<const double>(x), y, eps, std::span<double>(out));
  return out;
}

void SlowField::jacobian(std::span<const double> x, const PhasePoint& y, double eps,
                         std::span<double> out) const {
  std::fill(out.begin(), out.begin() + dim_ * dim_, 0.0);
  for (const auto& t : terms_) {
    if (t.x == XFunction::One) continue;
    const auto i = static_cast<std::size_t>(t.component);
    const auto j = static_cast<std::size_t>(t.xvar);
    out[i * static_cast<std::size_t>(dim_) + j] +=
        (t.coef + t.eps_coef * eps) * phi(t.y, t.harmonic, y) * dpsi(t.x, t.xscale, x[j]);
  }
}

Vec SlowField::jacobian(const Vec& x, const PhasePoint& y, double eps) const {
  Vec out(static_cast<std::size_t>(dim_ * dim_));
  jacobian(std::span<const double>(x), y, eps, std::span<double>(out));
  return out;
}

BudgetReport verify_budget(const SlowField& field, const FastFamily& family, double eps_max,
                           std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw UsageError("budget verification needs samples");
  const auto d = static_cast<std::size_t>(field.dim());
  const LipschitzBudget& b = field.budget();
  const PhaseSpace& space = family.phase_space();
  CounterRng rng(seed, 0);
  BudgetReport rep;

  auto draw_y = [&]() {
    PhasePoint p;
    if (space.kind == PhaseSpaceKind::Circle) {
      p.y = rng.uniform();
    } else {
      p.y = rng.uniform(space.lo, space.hi);
      if (space.kind == PhaseSpaceKind::Cylinder) p.theta = rng.uniform();
    }
    return p;
  };
  auto draw_x = [&](double radius) {
    Vec x(d);
    for (std::size_t i = 0; i < d; ++i) x[i] = field.x0()[i] + rng.uniform(-radius, radius);
    return x;
  };

  Vec a1(d), a2(d), a0(d), j1(d * d), j2(d * d), fd(d * d), xp, xm;
  for (std::size_t s = 0; s < samples; ++s) {
    const PhasePoint y = draw_y();
    const double eps = eps_max * (1.0 - rng.uniform());

    // Global bounds on a: sample well outside E as well.
    Vec x = draw_x(4.0 * b.L1);
    Vec x2 = x;
    for (std::size_t i = 0; i < d; ++i) x2[i] += rng.uniform(-b.L1, b.L1);
    field.eval(x, y, eps, a1);
    field.eval(x2, y, eps, a2);
    rep.sup_a = std::max(rep.sup_a, max_norm(a1));
    const double dx = max_norm_diff(x, x2);
    if (dx > 0.0) rep.lip_a = std::max(rep.lip_a, max_norm_diff(a1, a2) / dx);

    // Bounds on E = {|x - x0| <= L1}.
    x = draw_x(b.L1);
    x2 = draw_x(b.L1);
    field.jacobian(x, y, eps, j1);
    field.jacobian(x2, y, eps, j2);
    rep.sup_da = std::max(rep.sup_da, max_norm(j1));
    const double dxe = max_norm_diff(x, x2);
    if (dxe > 0.0) rep.lip_da = std::max(rep.lip_da, max_norm_diff(j1, j2) / dxe);

    field.eval(x, y, eps, a1);
    field.eval(x, y, 0.0, a0);
    rep.eps_slope = std::max(rep.eps_slope, max_norm_diff(a1, a0) / eps);

    constexpr double h = 1e-5;
    for (std::size_t j = 0; j < d; ++j) {
      xp = x;
      xm = x;
      xp[j] += h;
      xm[j] -= h;
      field.eval(xp, y, eps, a1);
      field.eval(xm, y, eps, a2);
      for (std::size_t i = 0; i < d; ++i) fd[i * d + j] = (a1[i] - a2[i]) / (2.0 * h);
    }
    rep.jacobian_error = std::max(rep.jacobian_error, max_norm_diff(j1, fd));
  }
  constexpr double slack = 1.0 + 1e-12;
  rep.l1_ok = std::max(rep.sup_a, rep.lip_a) <= b.L1 * slack;
  rep.l2_ok = std::max(rep.sup_da, rep.lip_da) <= b.L2 * slack;
  rep.l3_ok = rep.eps_slope <= b.L3 * slack;
  rep.jacobian_ok = rep.jacobian_error <= 1e-6 * std::max(1.0, b.L2);
  return rep;
}

}  // namespace fsavg
