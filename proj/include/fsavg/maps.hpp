#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fsavg/expansion.hpp"

namespace fsavg {

/// Point of a fast phase space. Interval and circle families use `y` only;
/// the cylinder S^1 x I stores the circle coordinate in `theta` and the
/// fiber coordinate in `y`.
struct PhasePoint {
  double y = 0.0;
  double theta = 0.0;

  friend bool operator==(const PhasePoint&, const PhasePoint&) = default;
};

enum class PhaseSpaceKind { UnitInterval, SymmetricInterval, Circle, Cylinder };

struct PhaseSpace {
  PhaseSpaceKind kind = PhaseSpaceKind::UnitInterval;
  double lo = 0.0;  ///< interval (or cylinder fiber) lower end
  double hi = 1.0;  ///< interval (or cylinder fiber) upper end

  bool contains(const PhasePoint& p) const;
  int dim() const { return kind == PhaseSpaceKind::Cylinder ? 2 : 1; }
  /// Lebesgue measure of the whole space.
  double measure() const { return hi - lo; }
};

/// y - floor(y), with results that round to 1 mapped to 0.
double wrap_unit(double y);

enum class FamilyKind {
  DoublingDrift,
  SmoothExpandingTorus,
  PiecewiseExpandingInterval,
  LsvIntermittent,
  Quadratic,
  Viana
};

std::string to_string(FamilyKind kind);
FamilyKind family_kind_from_string(const std::string& s);

/// eps -> parameter. Either affine (base + slope * eps) or piecewise linear
/// through a table of (eps, value) knots sorted by eps, the first at eps = 0.
class ParamSchedule {
 public:
  ParamSchedule() = default;
  static ParamSchedule affine(double base, double slope = 0.0);
  static ParamSchedule table(std::vector<std::pair<double, double>> knots);

  double at(double eps) const;
  bool constant() const;
  /// Smallest and largest value over eps in [0, eps_max].
  std::pair<double, double> range(double eps_max) const;

  double base() const { return base_; }
  double slope() const { return slope_; }
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

 private:
  double base_ = 0.0;
  double slope_ = 0.0;
  std::vector<std::pair<double, double>> knots_;
};

/// Monotone piece of a one-dimensional map. `map` sends [lo, hi] onto
/// [min(map(lo), map(hi)), max(...)] inside the phase interval.
struct Branch {
  double lo = 0.0;
  double hi = 0.0;
  bool increasing = true;
  std::function<double(double)> map;
  /// Optional closed-form inverse; bisection is used when absent.
  std::function<double(double)> inverse;

  double image_lo() const;
  double image_hi() const;
  /// Preimage of z within [lo, hi] (z must lie in the branch image).
  double preimage(double z) const;
};

// Individual maps.

/// Intermittent map: y(1 + (2y)^a) on [0, 1/2], 2y - 1 on (1/2, 1].
double lsv_apply(double a, double y);
/// frac(2y + eps^beta).
double doubling_drift_apply(double beta, double eps, double y);
/// 1 - a x^2.
double quadratic_apply(double a, double x);
/// (16 theta mod 1, a0 + a sin(2 pi theta) - y^2).
PhasePoint viana_apply(double a0, double a, PhasePoint p);

/// A parameterized family eps -> T_eps of fast maps.
class FastFamily {
 public:
  /// T_eps y = 2y + scale * eps^beta mod 1. scale = 0 gives the frozen doubling map.
  static FastFamily doubling_drift(double beta, double scale = 1.0, double eps0 = 1.0);
  /// T_eps y = 2y + b_eps sin(2 pi y) / (2 pi) mod 1, requires |b_eps| < 1.
  static FastFamily smooth_expanding_torus(ParamSchedule b, double eps0);
  /// Tent on [-1, 1] with T(+-1) = -1 and peak T(0) = h_eps in (0, 1].
  static FastFamily piecewise_expanding(ParamSchedule height, double eps0);
  /// Intermittent maps with a_eps in (0, 1).
  static FastFamily lsv(ParamSchedule a, double eps0);
  /// Quadratic maps 1 - a_eps x^2 on [-1, 1], a_eps in [0, 2].
  static FastFamily quadratic(ParamSchedule a, double eps0);
  /// Viana maps on S^1 x I; I is the smallest invariant fiber interval
  /// [a0 - A - (a0 + A)^2, a0 + A] with A = sup |a_eps|.
  static FastFamily viana(double a0, ParamSchedule a, double eps0);

  FamilyKind kind() const { return kind_; }
  const PhaseSpace& phase_space() const { return space_; }
  double eps0() const { return eps0_; }
  const ParamSchedule& schedule() const { return schedule_; }
  double beta() const { return beta_; }
  double drift_scale() const { return scale_; }
  double viana_a0() const { return a0_; }

  /// The eps-dependent parameter: drift mod 1 for doubling-drift, a_eps,
  /// b_eps, h_eps otherwise.
  double parameter(double eps) const;
  /// True when T_eps does not depend on eps.
  bool frozen() const;
  bool one_dimensional() const { return space_.dim() == 1; }

  /// Throws DomainError unless 0 <= eps < eps0.
  void check_eps(double eps) const;
  /// One step of T_eps with domain checks.
  PhasePoint apply(double eps, PhasePoint p) const;
  /// Unchecked step, for inner loops.
  PhasePoint step(double param, PhasePoint p) const;

  /// Monotone branch decomposition of T_eps (one-dimensional kinds only).
  std::vector<Branch> branches(double eps) const;

  std::string describe() const;

 private:
  FamilyKind kind_ = FamilyKind::DoublingDrift;
  PhaseSpace space_;
  ParamSchedule schedule_;
  double eps0_ = 1.0;
  double beta_ = 1.0;
  double scale_ = 1.0;
  double a0_ = 0.0;
};

/// Initial condition of a fast orbit. For doubling-drift families `digits`
/// optionally holds the exact binary expansion of y (beyond double precision);
/// without it the double `point.y` is expanded exactly.
struct InitialCondition {
  PhasePoint point;
  std::optional<BinaryExpansion> digits;
  /// The digits are those of u = y + drift (mod 1) rather than of y.
  bool digits_include_drift = false;
};

/// y_0 .. y_steps of T_eps starting at `ic`.
std::vector<PhasePoint> fast_orbit(const FastFamily& family, double eps,
                                   const InitialCondition& ic, std::size_t steps);

}  // namespace fsavg
