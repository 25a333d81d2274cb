#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fsavg/density.hpp"
#include "fsavg/secondorder.hpp"
#include "oracles.hpp"

using namespace fsavg;

namespace {

const FastFamily kFrozen = FastFamily::doubling_drift(1.0, 0.0, 1.0);

Vec uniform_means(const SlowField& field) {
  MeasureOptions opt;
  opt.k = 1024;
  return basis_means(field, stationary_measure(kFrozen, 0.0, opt));
}

InitialCondition random_start(std::uint64_t stream, std::size_t bits) {
  CounterRng rng(31, stream);
  InitialCondition ic;
  ic.digits = BinaryExpansion::random(rng, bits);
  ic.point.y = ic.digits->value();
  return ic;
}

VectorField linear(double k) {
  return [k](std::span<const double> x, std::span<double> out) { out[0] = k * x[0]; };
}

}  // namespace

TEST_CASE("u vanishes at n = 0 and for y-independent fields") {
  const auto cc = SlowField::cosine_coupling();
  const auto orbit = fast_orbit(kFrozen, 0.0, random_start(0, 400), 256);
  const FluctuationSums sums(cc, orbit, uniform_means(cc));
  const auto u0 = u_function(cc, sums, 0x1p-8, 0.3, {0.0}, 0);
  CHECK(u0.u[0] == 0.0);
  CHECK_FALSE(u0.degenerate);

  const SlowField xo(1, {0.0}, {FieldTerm{0, YFunction::One, 1, XFunction::Sin, 0, 1.0, 1.0, 0.0}},
                     {1.0, 1.0, 1.0});
  const FluctuationSums xs(xo, orbit, uniform_means(xo));
  for (std::size_t n : {0u, 1u, 100u, 256u}) {
    const auto u = u_function(xo, xs, 0x1p-8, 0.0, {0.2}, n);
    CHECK(u.degenerate);
    CHECK(u.u[0] == 0.0);
  }
  CHECK_THROWS(u_function(cc, sums, 0x1p-8, 0.3, {0.0}, 257));
}

TEST_CASE("prefix sums agree with direct and rational summation") {
  const auto field = SlowField::modulated_cosine();
  const Vec means = uniform_means(field);
  const double eps = 0x1p-8, delta = 0.25;
  const auto orbit = fast_orbit(kFrozen, 0.0, random_start(1, 400), 256);
  const FluctuationSums sums(field, orbit, means);
  for (double x : {-0.8, 0.0, 0.45}) {
    for (std::size_t n : {1u, 17u, 256u}) {
      const auto fast = u_function(field, sums, eps, delta, {x}, n).u[0];
      const auto slow = u_function_direct(field, orbit, means, eps, delta, {x}, n)[0];
      CHECK(fast == doctest::Approx(slow).epsilon(1e-10));
    }
  }

  // cos coupling on a rational orbit: u = (eps / delta) sum cos(2 pi y_j).
  const std::uint64_t D = 59049ull << 24, p = 31415926535ull;
  InitialCondition ic;
  ic.point.y = static_cast<double>(p) / static_cast<double>(D);
  ic.digits = BinaryExpansion::from_rational(p, D, 400);
  const auto cc = SlowField::cosine_coupling();
  const auto ro = fast_orbit(kFrozen, 0.0, ic, 256);
  const FluctuationSums rs(cc, ro, uniform_means(cc));
  const auto ys = oracle::doubling_rational_orbit(p, 0, D, 256);
  double s = 0.0;
  for (std::size_t n = 0; n < 256; ++n) {
    s += std::cos(2.0 * std::numbers::pi * ys[n]);
    CHECK(u_function(cc, rs, eps, delta, {0.0}, n + 1).u[0] == doctest::Approx(eps / delta * s).epsilon(1e-9));
  }
}

TEST_CASE("Euler sequences in closed form") {
  const double eps = 0.01;
  auto z = euler_sequence(linear(0.0), {0.7}, eps, 100);
  for (double v : z) CHECK(v == 0.7);
  z = euler_sequence(linear(1.0), {1.0}, eps, 100);
  for (std::size_t n = 0; n <= 100; ++n) CHECK(z[n] == doctest::Approx(std::pow(1.0 + eps, n)).epsilon(1e-13));
  const VectorField c = [](std::span<const double>, std::span<double> out) {
    out[0] = -0.5;
    out[1] = 2.0;
  };
  z = euler_sequence(c, {1.0, 0.0}, eps, 100);
  for (std::size_t n = 0; n <= 100; ++n) {
    CHECK(z[2 * n] == doctest::Approx(1.0 - 0.5 * n * eps).epsilon(1e-13));
    CHECK(z[2 * n + 1] == doctest::Approx(2.0 * n * eps).epsilon(1e-13));
  }
}

TEST_CASE("discrete Gronwall") {
  std::vector<double> b(50, 0.0);
  auto v = discrete_gronwall_check(b, 0.0, 3.0);
  CHECK(v.precondition);
  CHECK(v.conclusion);

  const double C = 0.3, D = 0.7;
  double partial = 0.0;
  for (std::size_t n = 0; n < b.size(); ++n) {
    b[n] = C + D * partial;
    partial += b[n];
    CHECK(b[n] == doctest::Approx(C * std::pow(D + 1.0, n)).epsilon(1e-12));
  }
  v = discrete_gronwall_check(b, C, D);
  CHECK(v.precondition);
  CHECK(v.conclusion);

  std::fill(b.begin(), b.end(), 2.0);
  v = discrete_gronwall_check(b, 2.0, 0.0);
  CHECK(v.precondition);
  CHECK(v.conclusion);

  b[7] = 2.5;
  v = discrete_gronwall_check(b, 2.0, 0.0);
  CHECK_FALSE(v.precondition);
  CHECK(v.first_precondition_failure == 7);
  CHECK_FALSE(v.conclusion);
  CHECK(v.first_conclusion_failure == 7);

  b.assign(5, -1.0);
  v = discrete_gronwall_check(b, 1.0, 1.0);
  CHECK_FALSE(v.precondition);
  CHECK(v.conclusion);
}

TEST_CASE("appendix construction along random doubling orbits") {
  const double eps = 0x1p-8;
  for (const auto& field : {SlowField::cosine_coupling(), SlowField::modulated_cosine()}) {
    const Vec means = uniform_means(field);
    const XGrid grid = default_xgrid(field, 16);
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto t = appendix_trace(field, kFrozen, eps, random_start(100 + s, 400), means, grid);
      const std::size_t d = 1;
      REQUIRE(t.N == 256);
      REQUIRE(t.x.size() == (t.N + 1) * d);
      REQUIRE(t.w.size() == t.x.size());
      REQUIRE(t.z.size() == t.x.size());
      CHECK(t.w[0] == t.x[0]);
      CHECK(t.z[0] == t.x[0]);
      CHECK(t.u_max <= t.u_bound);
      double wx = 0.0;
      for (std::size_t n = 0; n <= t.N; ++n) wx = std::max(wx, std::fabs(t.w[n] - t.x[n]));
      CHECK(wx <= t.delta * t.u_bound);
      for (const auto& v : t.verdicts) {
        INFO(v.name << " lhs=" << v.lhs << " bound=" << v.bound);
        CHECK(v.holds());
      }
      CHECK(t.all_hold());
    }
  }
}

TEST_CASE("y-independent fields give w = x") {
  const SlowField xo(1, {0.0}, {FieldTerm{0, YFunction::One, 1, XFunction::Sin, 0, 1.0, 1.0, 0.0}},
                     {1.0, 1.0, 1.0});
  const auto t = appendix_trace(xo, kFrozen, 0x1p-7, random_start(7, 300), uniform_means(xo),
                                make_xgrid(xo, 4));
  CHECK(t.u_max < 1e-12);
  for (std::size_t n = 0; n <= t.N; ++n) CHECK(t.w[n] == t.x[n]);
}
