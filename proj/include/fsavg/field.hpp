#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fsavg/maps.hpp"

namespace fsavg {

using Vec = std::vector<double>;

/// Max-norm on R^d.
double max_norm(std::span<const double> v);
double max_norm_diff(std::span<const double> a, std::span<const double> b);

/// Fast-variable factor of a field term.
enum class YFunction {
  One,       ///< 1
  Cos,       ///< cos(2 pi m y)
  Sin,       ///< sin(2 pi m y)
  Identity,  ///< y
  Square,    ///< y^2
  ThetaCos,  ///< cos(2 pi m theta), cylinder only
  ThetaSin   ///< sin(2 pi m theta), cylinder only
};

/// Slow-variable factor of a field term, applied to s * x_j.
enum class XFunction { One, Sin, Cos, Tanh };

std::string to_string(YFunction f);
std::string to_string(XFunction f);
YFunction yfunction_from_string(const std::string& s);
XFunction xfunction_from_string(const std::string& s);

/// (coef + eps_coef * eps) * phi(y) * psi(s * x_j), added to component `component`.
struct FieldTerm {
  int component = 0;
  YFunction y = YFunction::One;
  int harmonic = 1;
  XFunction x = XFunction::One;
  int xvar = 0;
  double xscale = 1.0;
  double coef = 1.0;
  double eps_coef = 0.0;
};

/// Lipschitz budget declared by the author of a field (all >= 1).
struct LipschitzBudget {
  double L1 = 1.0;
  double L2 = 1.0;
  double L3 = 1.0;
  double L() const;
};

/// Slow vector field a(x, y, eps) built from catalog terms.
///
/// Every component is a finite sum of products phi_k(y) * psi(x), so
///   a_i(x, y, eps)     = sum_k W_i,k(x, eps) phi_k(y)
///   (Da)_ij(x, y, eps) = sum_k W_(d+i*d+j),k(x, eps) phi_k(y)
/// with a small set of distinct basis functions phi_k. `loadings` returns W.
class SlowField {
 public:
  SlowField(int dim, Vec x0, std::vector<FieldTerm> terms, LipschitzBudget budget);

  /// a = cos(2 pi y), d = 1, x0 = 0.
  static SlowField cosine_coupling();
  /// a = 1/2 cos(x) (1 + cos(2 pi y)), d = 1, x0 = 0: x-dependent with mean 1/2 cos(x).
  static SlowField modulated_cosine();

  int dim() const { return dim_; }
  const Vec& x0() const { return x0_; }
  const std::vector<FieldTerm>& terms() const { return terms_; }
  const LipschitzBudget& budget() const { return budget_; }
  double L() const { return budget_.L(); }

  /// True when no term depends on x.
  bool x_independent() const;
  /// True when no term depends on y.
  bool y_independent() const;

  std::size_t basis_size() const { return basis_.size(); }
  std::size_t outputs() const { return static_cast<std::size_t>(dim_ + dim_ * dim_); }
  double basis(std::size_t k, const PhasePoint& p) const;
  void basis_values(const PhasePoint& p, std::span<double> out) const;
  /// W laid out as out[r * basis_size() + k], r < outputs().
  void loadings(std::span<const double> x, double eps, std::span<double> out) const;

  void eval(std::span<const double> x, const PhasePoint& y, double eps, std::span<double> out) const;
  Vec eval(const Vec& x, const PhasePoint& y, double eps) const;
  /// Row-major d x d Jacobian in x.
  void jacobian(std::span<const double> x, const PhasePoint& y, double eps,
                std::span<double> out) const;
  Vec jacobian(const Vec& x, const PhasePoint& y, double eps) const;

 private:
  struct BasisKey {
    YFunction f;
    int m;
    friend bool operator==(const BasisKey&, const BasisKey&) = default;
  };

  int dim_;
  Vec x0_;
  std::vector<FieldTerm> terms_;
  LipschitzBudget budget_;
  std::vector<BasisKey> basis_;
  std::vector<std::size_t> term_basis_;
};

/// Sampled evidence for a declared Lipschitz budget.
struct BudgetReport {
  double sup_a = 0.0;           ///< sup |a|
  double lip_a = 0.0;           ///< largest difference quotient of a in x
  double sup_da = 0.0;          ///< sup |Da| on E
  double lip_da = 0.0;          ///< largest difference quotient of Da on E
  double eps_slope = 0.0;       ///< sup |a(x,y,eps) - a(x,y,0)| / eps on E
  double jacobian_error = 0.0;  ///< largest |Da - finite-difference Jacobian|
  bool l1_ok = false;
  bool l2_ok = false;
  bool l3_ok = false;
  bool jacobian_ok = false;
  bool ok() const { return l1_ok && l2_ok && l3_ok && jacobian_ok; }
};

/// Checks the declared budget by sampling x in a box around E, y uniformly on
/// the family's phase space and eps in (0, eps_max].
BudgetReport verify_budget(const SlowField& field, const FastFamily& family, double eps_max,
                           std::size_t samples, std::uint64_t seed);

}  // namespace fsavg
