#include "fsavg/density.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "fsavg/error.hpp"
#include "fsavg/kernels.hpp"

namespace fsavg {

double BinGrid::edge(std::size_t iy) const {
  if (iy == ny) return space.hi;
  return space.lo + static_cast<double>(iy) * width();
}

PhasePoint BinGrid::center(std::size_t i) const {
  const std::size_t iy = i % ny;
  const std::size_t it = i / ny;
  PhasePoint p;
  p.y = space.lo + (static_cast<double>(iy) + 0.5) * width();
  if (ntheta > 1) p.theta = (static_cast<double>(it) + 0.5) / static_cast<double>(ntheta);
  return p;
}

std::size_t BinGrid::locate_y(double y) const {
  const double r = (y - space.lo) / width();
  if (!(r > 0.0)) return 0;
  return std::min(ny - 1, static_cast<std::size_t>(r));
}

std::size_t BinGrid::locate(const PhasePoint& p) const {
  std::size_t it = 0;
  if (ntheta > 1)
    it = std::min(ntheta - 1, static_cast<std::size_t>(std::max(0.0, p.theta) *
                                                       static_cast<double>(ntheta)));
  return it * ny + locate_y(p.y);
}

BinGrid make_bins(const PhaseSpace& space, std::size_t k) {
  if (k < 2) throw UsageError("Ulam discretization needs at least 2 bins");
  BinGrid b;
  b.space = space;
  b.ny = k;
  b.ntheta = space.kind == PhaseSpaceKind::Cylinder ? k : 1;
  return b;
}

double UlamOperator::entry(std::size_t i, std::size_t j) const {
  for (std::size_t e = row_ptr[i]; e < row_ptr[i + 1]; ++e)
    if (col[e] == j) return val[e];
  return 0.0;
}

double UlamOperator::row_sum(std::size_t i) const {
  double s = 0.0;
  for (std::size_t e = row_ptr[i]; e < row_ptr[i + 1]; ++e) s += val[e];
  return s;
}

void UlamOperator::left_multiply(std::span<const double> p, std::span<double> out) const {
  const auto& kt = kernels::active();
  for (std::size_t j = 0; j < size(); ++j)
    out[j] = kt.sparse_dot(cval.data() + col_ptr[j], row.data() + col_ptr[j], p.data(),
                           col_ptr[j + 1] - col_ptr[j]);
}

namespace {

using Triplet = std::tuple<std::uint32_t, std::uint32_t, double>;

void assemble(UlamOperator& op, std::vector<Triplet> t) {
  const std::size_t n = op.bins.size();
  std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  op.row_ptr.assign(n + 1, 0);
  op.col.clear();
  op.val.clear();
  for (std::size_t e = 0; e < t.size();) {
    const auto [i, j, w] = t[e];
    double acc = 0.0;
    while (e < t.size() && std::get<0>(t[e]) == i && std::get<1>(t[e]) == j) acc += std::get<2>(t[e++]);
    if (acc <= 0.0) continue;
    op.col.push_back(j);
    op.val.push_back(acc);
    op.row_ptr[i + 1]++;
  }
  for (std::size_t i = 0; i < n; ++i) op.row_ptr[i + 1] += op.row_ptr[i];
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t e = op.row_ptr[i]; e < op.row_ptr[i + 1]; ++e) s += op.val[e];
    if (!(s > 0.0)) throw UsageError("Ulam matrix has an empty row; branches do not cover the bins");
    for (std::size_t e = op.row_ptr[i]; e < op.row_ptr[i + 1]; ++e) op.val[e] /= s;
  }
  // Transpose.
  op.col_ptr.assign(n + 1, 0);
  for (auto j : op.col) op.col_ptr[j + 1]++;
  for (std::size_t j = 0; j < n; ++j) op.col_ptr[j + 1] += op.col_ptr[j];
  op.row.resize(op.col.size());
  op.cval.resize(op.col.size());
  std::vector<std::size_t> fill(op.col_ptr.begin(), op.col_ptr.end() - 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t e = op.row_ptr[i]; e < op.row_ptr[i + 1]; ++e) {
      const std::size_t slot = fill[op.col[e]]++;
      op.row[slot] = static_cast<std::uint32_t>(i);
      op.cval[slot] = op.val[e];
    }
}

}  // namespace

UlamOperator ulam_matrix(const std::vector<Branch>& branches, const PhaseSpace& space,
                         std::size_t k) {
  if (space.kind == PhaseSpaceKind::Cylinder)
    throw UsageError("branch partition needs a one-dimensional phase space");
  UlamOperator op;
  op.bins = make_bins(space, k);
  const BinGrid& bins = op.bins;
  std::vector<Triplet> trip;
  trip.reserve(4 * k);
  std::vector<double> pts;
  for (const Branch& b : branches) {
    const double lo = std::max(b.lo, space.lo);
    const double hi = std::min(b.hi, space.hi);
    if (!(hi > lo)) continue;
    pts.clear();
    pts.push_back(lo);
    pts.push_back(hi);
    for (std::size_t e = 1; e < k; ++e) {
      const double x = bins.edge(e);
      if (x > lo && x < hi) pts.push_back(x);
    }
    const double ilo = b.image_lo();
    const double ihi = b.image_hi();
    for (std::size_t e = 1; e < k; ++e) {
      const double z = bins.edge(e);
      if (z > ilo && z < ihi) {
        const double p = b.preimage(z);
        if (p > lo && p < hi) pts.push_back(p);
      }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    for (std::size_t m = 0; m + 1 < pts.size(); ++m) {
      const double len = pts[m + 1] - pts[m];
      if (!(len > 0.0)) continue;
      const double mid = 0.5 * (pts[m] + pts[m + 1]);
      trip.emplace_back(static_cast<std::uint32_t>(bins.locate_y(mid)),
                        static_cast<std::uint32_t>(bins.locate_y(b.map(mid))), len);
    }
  }
  assemble(op, std::move(trip));
  return op;
}

UlamOperator ulam_matrix(const FastFamily& family, double eps, std::size_t k,
                         std::size_t samples_per_cell) {
  family.check_eps(eps);
  if (family.one_dimensional()) {
    UlamOperator op = ulam_matrix(family.branches(eps), family.phase_space(), k);
    op.eps = eps;
    return op;
  }
  if (samples_per_cell < 256) throw UsageError("sampled Ulam matrices need >= 256 points per cell");
  UlamOperator op;
  op.eps = eps;
  op.sampled = true;
  op.bins = make_bins(family.phase_space(), k);
  const BinGrid& bins = op.bins;
  const auto s = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(samples_per_cell))));
  const double param = family.parameter(eps);
  const double w = 1.0 / static_cast<double>(s * s);
  std::vector<Triplet> trip;
  trip.reserve(bins.size() * 16);
  std::vector<std::pair<std::uint32_t, double>> local;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const std::size_t iy = i % bins.ny;
    const std::size_t it = i / bins.ny;
    local.clear();
    for (std::size_t a = 0; a < s; ++a)
      for (std::size_t c = 0; c < s; ++c) {
        PhasePoint p;
        p.theta = (static_cast<double>(it) + (static_cast<double>(a) + 0.5) / static_cast<double>(s)) /
                  static_cast<double>(bins.ntheta);
        p.y = bins.edge(iy) + (static_cast<double>(c) + 0.5) / static_cast<double>(s) * bins.width();
        local.emplace_back(static_cast<std::uint32_t>(bins.locate(family.step(param, p))), w);
      }
    for (const auto& [j, wt] : local) trip.emplace_back(static_cast<std::uint32_t>(i), j, wt);
  }
  assemble(op, std::move(trip));
  return op;
}

void solve_stationary(UlamOperator& op, double tol, std::size_t max_iter) {
  const std::size_t n = op.size();
  const auto& kt = kernels::active();
  std::vector<double> p(n, 1.0 / static_cast<double>(n)), q(n);
  double res = 0.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    op.left_multiply(p, q);
    const double s = kt.sum(q.data(), n);
    for (double& v : q) v /= s;
    res = kt.l1_distance(p.data(), q.data(), n);
    p.swap(q);
    if (res < tol) {
      op.stationary = std::move(p);
      op.iterations = it;
      op.residual = res;
      return;
    }
  }
  throw IterationLimitError("power iteration did not reach the tolerance", max_iter, res);
}

std::vector<double> invariant_density(UlamOperator& op, double tol, std::size_t max_iter) {
  if (op.stationary.empty()) solve_stationary(op, tol, max_iter);
  std::vector<double> rho(op.stationary);
  const double cm = op.bins.cell_measure();
  for (double& v : rho) v /= cm;
  return rho;
}

std::vector<double> StationaryMeasure::density() const {
  std::vector<double> rho(weights);
  const double cm = bins.cell_measure();
  for (double& v : rho) v /= cm;
  return rho;
}

MeasureSampler::MeasureSampler(const StationaryMeasure& m) : bins_(m.bins), cdf_(m.weights.size()) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.weights.size(); ++i) {
    acc += m.weights[i];
    cdf_[i] = acc;
  }
  if (!(acc > 0.0)) throw UsageError("cannot sample a zero measure");
  for (double& c : cdf_) c /= acc;
}

PhasePoint MeasureSampler::operator()(CounterRng& rng) const {
  const double u = rng.uniform();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  const auto i = static_cast<std::size_t>(it - cdf_.begin());
  const std::size_t iy = i % bins_.ny;
  const std::size_t ith = i / bins_.ny;
  PhasePoint p;
  p.y = bins_.edge(iy) + rng.uniform() * bins_.width();
  if (bins_.space.kind == PhaseSpaceKind::Circle && p.y >= 1.0) p.y = 0.0;
  if (bins_.ntheta > 1)
    p.theta = (static_cast<double>(ith) + rng.uniform()) / static_cast<double>(bins_.ntheta);
  return p;
}

StationaryMeasure measure_from_operator(UlamOperator& op) {
  if (op.stationary.empty()) solve_stationary(op);
  StationaryMeasure m;
  m.bins = op.bins;
  m.weights = op.stationary;
  m.source = MeasureSource::Ulam;
  m.sampled = op.sampled;
  return m;
}

StationaryMeasure stationary_measure(const FastFamily& family, double eps, const MeasureOptions& opt) {
  if (family.kind() == FamilyKind::Quadratic && !opt.force_ulam) {
    family.check_eps(eps);
    StationaryMeasure m;
    m.bins = make_bins(family.phase_space(), opt.k);
    m.source = MeasureSource::OrbitEmpirical;
    m.weights.assign(m.bins.size(), 0.0);
    CounterRng rng(opt.seed, 0);
    const double param = family.parameter(eps);
    PhasePoint p{rng.uniform(-0.9, 0.9), 0.0};
    for (std::size_t n = 0; n < opt.burn_in; ++n) p = family.step(param, p);
    for (std::size_t n = 0; n < opt.orbit_length; ++n) {
      m.weights[m.bins.locate(p)] += 1.0;
      p = family.step(param, p);
    }
    for (double& w : m.weights) w /= static_cast<double>(opt.orbit_length);
    return m;
  }
  const std::size_t k =
      family.kind() == FamilyKind::Viana ? std::min<std::size_t>(opt.k, 64) : opt.k;
  UlamOperator op = ulam_matrix(family, eps, k);
  solve_stationary(op, opt.tol, opt.max_iter);
  return measure_from_operator(op);
}

Vec basis_means(const SlowField& field, const StationaryMeasure& m) {
  Vec out(field.basis_size(), 0.0);
  std::vector<double> phi(field.basis_size());
  for (std::size_t i = 0; i < m.weights.size(); ++i) {
    if (m.weights[i] == 0.0) continue;
    field.basis_values(m.bins.center(i), phi);
    for (std::size_t k = 0; k < phi.size(); ++k) out[k] += m.weights[i] * phi[k];
  }
  return out;
}

namespace {

Vec contract(const SlowField& field, const Vec& means, double eps, const Vec& x, std::size_t row0,
             std::size_t rows) {
  const std::size_t K = field.basis_size();
  std::vector<double> W(field.outputs() * K);
  field.loadings(x, eps, W);
  Vec out(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t k = 0; k < K; ++k) out[r] += W[(row0 + r) * K + k] * means[k];
  return out;
}

}  // namespace

Vec averaged_field(const SlowField& field, const Vec& means, double eps, const Vec& x) {
  const auto d = static_cast<std::size_t>(field.dim());
  return contract(field, means, eps, x, 0, d);
}

Vec averaged_jacobian(const SlowField& field, const Vec& means, double eps, const Vec& x) {
  const auto d = static_cast<std::size_t>(field.dim());
  return contract(field, means, eps, x, d, d * d);
}

Vec averaged_field(const SlowField& field, const StationaryMeasure& m, double eps, const Vec& x) {
  return averaged_field(field, basis_means(field, m), eps, x);
}

std::function<void(std::span<const double>, std::span<double>)> averaged_vector_field(
    const SlowField& field, const Vec& means, double eps) {
  const std::size_t K = field.basis_size();
  const auto d = static_cast<std::size_t>(field.dim());
  return [&field, means, eps, K, d, W = std::vector<double>(field.outputs() * K)](
             std::span<const double> x, std::span<double> out) mutable {
    field.loadings(x, eps, W);
    for (std::size_t r = 0; r < d; ++r) {
      double s = 0.0;
      for (std::size_t k = 0; k < K; ++k) s += W[r * K + k] * means[k];
      out[r] = s;
    }
  };
}

StabilityDistances stability_distances(const SlowField& field, const StationaryMeasure& m_eps,
                                       const StationaryMeasure& m_0, double eps,
                                       std::span<const double> xs) {
  if (!(m_eps.bins == m_0.bins) || m_eps.weights.size() != m_0.weights.size())
    throw UsageError("stability distances need measures on the same bins");
  const auto d = static_cast<std::size_t>(field.dim());
  if (xs.empty() || xs.size() % d != 0) throw UsageError("empty or ragged x grid");
  StabilityDistances out;
  out.R = kernels::active().l1_distance(m_eps.weights.data(), m_0.weights.data(),
                                        m_eps.weights.size());
  const Vec me = basis_means(field, m_eps);
  const Vec m0 = basis_means(field, m_0);
  Vec diff(me.size());
  for (std::size_t k = 0; k < me.size(); ++k) diff[k] = me[k] - m0[k];
  double best = -1.0;
  for (std::size_t g = 0; g < xs.size() / d; ++g) {
    const Vec x(xs.begin() + static_cast<std::ptrdiff_t>(g * d),
                xs.begin() + static_cast<std::ptrdiff_t>((g + 1) * d));
    const double v = max_norm(averaged_field(field, diff, 0.0, x));
    if (v > best) {
      best = v;
      out.argmax_x = x;
    }
  }
  out.S = best + eps;
  return out;
}

}  // namespace fsavg
