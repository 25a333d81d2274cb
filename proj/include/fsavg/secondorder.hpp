#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fsavg/fastslow.hpp"
#include "fsavg/field.hpp"
#include "fsavg/ode.hpp"
#include "fsavg/orderfn.hpp"

namespace fsavg {

/// Centered Birkhoff sums C_k(n) = sum_{j<n} (phi_k(y_j) - mean_k) of the
/// field's basis functions, for n = 0..N. With them
///   u(x, n) = (eps / delta) sum_k W_k(x) C_k(n)
/// costs O(K) for any x, on or off a grid.
class FluctuationSums {
 public:
  FluctuationSums(const SlowField& field, std::span<const PhasePoint> orbit, const Vec& means);

  std::size_t steps() const { return N_; }
  std::span<const double> at(std::size_t n) const { return {c_.data() + n * K_, K_}; }

 private:
  std::size_t K_;
  std::size_t N_;
  std::vector<double> c_;
};

struct UValue {
  Vec u;
  bool degenerate = false;  ///< delta == 0, u defined as 0
};

/// u(x, n) = (eps / delta) sum_{j<n} (a(x, y_j, eps) - abar(x, eps)); u(x, 0) = 0.
UValue u_function(const SlowField& field, const FluctuationSums& sums, double eps, double delta,
                  const Vec& x, std::size_t n);

/// Straightforward O(n) evaluation of the same quantity, without basis sums.
Vec u_function_direct(const SlowField& field, std::span<const PhasePoint> orbit, const Vec& means,
                      double eps, double delta, const Vec& x, std::size_t n);

/// z_{n+1} = z_n + eps abar(z_n), n < N. Row-major (N+1) x d.
std::vector<double> euler_sequence(const VectorField& abar, const Vec& x0, double eps,
                                   std::size_t N);

struct GronwallVerdict {
  bool precondition = false;  ///< b_n >= 0 and b_n <= C + D sum_{m<n} b_m
  bool conclusion = false;    ///< b_n <= C (D+1)^n
  std::size_t first_precondition_failure = 0;
  std::size_t first_conclusion_failure = 0;
};

/// Checks b_n <= C (D + 1)^n, with a relative tolerance for rounding.
GronwallVerdict discrete_gronwall_check(std::span<const double> b, double C, double D,
                                        double rel_tol = 1e-12);

struct InequalityVerdict {
  std::string name;
  double lhs = 0.0;    ///< largest left-hand side over the trace
  double bound = 0.0;
  bool applicable = true;  ///< hypothesis (delta <= 1/2) met
  bool holds() const { return !applicable || lhs <= bound; }
  double slack() const { return bound - lhs; }
};

struct AppendixTrace {
  double eps = 0.0;
  int dim = 0;
  std::size_t N = 0;
  std::vector<PhasePoint> orbit;
  std::vector<double> x, w, z, X;  ///< row-major (N+1) x d; X = ODE at n*eps
  std::vector<double> residual;    ///< r_n = |w_{n+1} - w_n - eps abar(w_n)|, n < N
  OrderFunctionSample order;
  double delta = 0.0;              ///< relaxed order function used in every bound
  bool u_degenerate = false;
  double u_max = 0.0;              ///< max |u(w_{n-1}, n)| over w_{n-1} in E
  double u_bound = 0.0;            ///< 1 + grid gap allowance
  double deviation = 0.0;          ///< sup_t |xhat(t) - X(t)|
  std::vector<InequalityVerdict> verdicts;

  bool all_hold() const;
  std::span<const double> row(const std::vector<double>& v, std::size_t n) const {
    return {v.data() + n * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

/// Builds x, w, z and X along one orbit and evaluates the quantitative lemmas.
/// `means` are basis means of the (frozen) fast measure.
AppendixTrace appendix_trace(const SlowField& field, const FastFamily& family, double eps,
                             const InitialCondition& y0, const Vec& means, const XGrid& grid,
                             double ode_step = 1e-3);

}  // namespace fsavg
