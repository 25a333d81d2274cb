#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fsavg/field.hpp"
#include "fsavg/maps.hpp"
#include "fsavg/rng.hpp"

namespace fsavg {

/// Uniform bins on a phase space: `ny` bins along y, times `ntheta` along
/// the circle coordinate for cylinders (ntheta = 1 otherwise).
/// Cell index i = itheta * ny + iy.
struct BinGrid {
  PhaseSpace space;
  std::size_t ny = 0;
  std::size_t ntheta = 1;

  std::size_t size() const { return ny * ntheta; }
  double width() const { return (space.hi - space.lo) / static_cast<double>(ny); }
  double cell_measure() const { return width() / static_cast<double>(ntheta); }
  double edge(std::size_t iy) const;
  PhasePoint center(std::size_t i) const;
  std::size_t locate_y(double y) const;
  std::size_t locate(const PhasePoint& p) const;

  friend bool operator==(const BinGrid& a, const BinGrid& b) {
    return a.space.kind == b.space.kind && a.space.lo == b.space.lo && a.space.hi == b.space.hi &&
           a.ny == b.ny && a.ntheta == b.ntheta;
  }
};

BinGrid make_bins(const PhaseSpace& space, std::size_t k);

/// Row-stochastic Ulam matrix, stored in CSR with a CSC copy for the
/// left multiplications of the power iteration.
struct UlamOperator {
  double eps = 0.0;
  BinGrid bins;
  std::vector<std::size_t> row_ptr;
  std::vector<std::uint32_t> col;
  std::vector<double> val;
  std::vector<std::size_t> col_ptr;
  std::vector<std::uint32_t> row;
  std::vector<double> cval;
  bool sampled = false;  ///< entries estimated by sampling instead of exact preimages
  std::vector<double> stationary;
  std::size_t iterations = 0;
  double residual = 0.0;

  std::size_t size() const { return bins.size(); }
  double entry(std::size_t i, std::size_t j) const;
  double row_sum(std::size_t i) const;
  /// out = p * P
  void left_multiply(std::span<const double> p, std::span<double> out) const;
};

/// Ulam matrix of T_eps with k bins (k x k cells for cylinders). One-dimensional
/// families use exact branch preimages; otherwise `samples_per_cell` stratified
/// points per cell are pushed forward and `sampled` is set.
UlamOperator ulam_matrix(const FastFamily& family, double eps, std::size_t k,
                         std::size_t samples_per_cell = 256);

/// Same from an explicit branch decomposition of a one-dimensional map.
UlamOperator ulam_matrix(const std::vector<Branch>& branches, const PhaseSpace& space,
                         std::size_t k);

/// Left stationary vector by power iteration; stores it in `op`.
/// Throws IterationLimitError when the L1 step residual stays above `tol`.
void solve_stationary(UlamOperator& op, double tol = 1e-12, std::size_t max_iter = 100000);

/// Piecewise-constant density (stationary probability / cell measure).
std::vector<double> invariant_density(UlamOperator& op, double tol = 1e-12,
                                      std::size_t max_iter = 100000);

enum class MeasureSource { Ulam, OrbitEmpirical };

/// Bin probabilities of an (approximate) invariant measure.
struct StationaryMeasure {
  BinGrid bins;
  std::vector<double> weights;
  MeasureSource source = MeasureSource::Ulam;
  bool sampled = false;

  std::vector<double> density() const;
  /// Midpoint-rule integral of f.
  template <class F>
  double expect(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
      if (weights[i] != 0.0) s += weights[i] * f(bins.center(i));
    return s;
  }
};

/// Inverse-CDF sampler over the bins, uniform inside a bin.
class MeasureSampler {
 public:
  explicit MeasureSampler(const StationaryMeasure& m);
  PhasePoint operator()(CounterRng& rng) const;

 private:
  BinGrid bins_;
  std::vector<double> cdf_;
};

struct MeasureOptions {
  std::size_t k = 4096;          ///< bins per axis (Viana: cells per axis, default 64 applies)
  std::size_t orbit_length = 2000000;
  std::size_t burn_in = 10000;
  std::uint64_t seed = 1;
  bool force_ulam = false;       ///< quadratic family uses the orbit measure unless set
  double tol = 1e-12;
  std::size_t max_iter = 100000;
};

/// Invariant measure of T_eps: Ulam for every family except quadratic, which
/// uses the empirical measure of one long orbit (after burn-in).
StationaryMeasure stationary_measure(const FastFamily& family, double eps,
                                     const MeasureOptions& opt = {});
StationaryMeasure measure_from_operator(UlamOperator& op);

/// Integrals of the field's basis functions against the measure.
Vec basis_means(const SlowField& field, const StationaryMeasure& m);

/// abar(x, eps) and D abar(x, eps) from precomputed basis means.
Vec averaged_field(const SlowField& field, const Vec& means, double eps, const Vec& x);
Vec averaged_jacobian(const SlowField& field, const Vec& means, double eps, const Vec& x);
Vec averaged_field(const SlowField& field, const StationaryMeasure& m, double eps, const Vec& x);

/// X -> abar(X, eps) as an ODE right-hand side.
std::function<void(std::span<const double>, std::span<double>)> averaged_vector_field(
    const SlowField& field, const Vec& means, double eps);

struct StabilityDistances {
  double R = 0.0;
  double S = 0.0;
  Vec argmax_x;
};

/// R = sum |w_eps - w_0| and S = max over the x points of
/// |int a(x, ., 0) (dnu_eps - dnu_0)| + eps. `xs` is row-major, dim entries per point.
StabilityDistances stability_distances(const SlowField& field, const StationaryMeasure& m_eps,
                                       const StationaryMeasure& m_0, double eps,
                                       std::span<const double> xs);

}  // namespace fsavg
