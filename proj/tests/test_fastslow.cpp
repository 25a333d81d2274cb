#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fsavg/error.hpp"
#include "fsavg/fastslow.hpp"
#include "fsavg/stats.hpp"
#include "oracles.hpp"

using namespace fsavg;

namespace {

SlowField constant_field(const Vec& c) {
  std::vector<FieldTerm> terms;
  for (std::size_t i = 0; i < c.size(); ++i) {
    FieldTerm t;
    t.component = static_cast<int>(i);
    t.coef = c[i];
    terms.push_back(t);
  }
  return SlowField(static_cast<int>(c.size()), Vec(c.size(), 0.0), terms, {2.0, 1.0, 1.0});
}

OdePath ode(const VectorField& f, const Vec& x0, double eps) {
  return solve_averaged_ode(f, x0, time_grid(eps), 1e-3);
}

VectorField zero_field() {
  return [](std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
}

InitialCondition rational_start(std::uint64_t p, std::uint64_t D, std::size_t bits) {
  InitialCondition ic;
  ic.point.y = static_cast<double>(p) / static_cast<double>(D);
  ic.digits = BinaryExpansion::from_rational(p, D, bits);
  return ic;
}

}  // namespace

TEST_CASE("constant field telescopes") {
  const Vec c{0.5, -1.25};
  const auto field = constant_field(c);
  const auto fam = FastFamily::lsv(ParamSchedule::affine(0.5), 1.0);
  for (double eps : {0.1, 0.03125, 0.001}) {
    InitialCondition ic;
    ic.point.y = 0.3;
    const auto run = iterate_fast_slow(field, fam, eps, ic);
    const std::size_t N = run.path.steps();
    CHECK(N == steps_for(eps));
    CHECK(run.orbit.size() == N + 1);
    CHECK(run.path.x.size() == (N + 1) * 2);
    for (std::size_t n = 0; n <= N; n += std::max<std::size_t>(1, N / 17)) {
      CHECK(run.path.at(n)[0] == doctest::Approx(n * eps * c[0]).epsilon(1e-12));
      CHECK(run.path.at(n)[1] == doctest::Approx(n * eps * c[1]).epsilon(1e-12));
    }
  }
}

TEST_CASE("sample count is floor(1/eps) + 1") {
  CHECK(steps_for(0.1) == 10);
  CHECK(steps_for(0.01) == 100);
  CHECK(steps_for(0x1p-10) == 1024);
  CHECK(steps_for(0.3) == 3);
  CHECK(steps_for(1.0 / 3.0) == 3);
  CHECK(steps_for(0.7) == 1);
}

TEST_CASE("doubling fixed point drives x to one") {
  const auto field = SlowField::cosine_coupling();
  const auto fam = FastFamily::doubling_drift(1.0, 0.0, 1.0);
  InitialCondition ic;
  const auto run = iterate_fast_slow(field, fam, 0.01, ic);
  REQUIRE(run.path.steps() == 100);
  CHECK(run.path.at(100)[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("RK4 matches closed forms") {
  const Vec one{1.0};
  const auto grid = time_grid(0.01);
  auto lin = [](double k) {
    return VectorField([k](std::span<const double> x, std::span<double> out) { out[0] = k * x[0]; });
  };
  auto X = solve_averaged_ode(lin(1.0), one, grid);
  CHECK(std::fabs(X.at(X.size() - 1)[0] - std::exp(1.0)) < 1e-8);
  X = solve_averaged_ode(lin(-2.0), one, grid);
  CHECK(std::fabs(X.at(X.size() - 1)[0] - std::exp(-2.0)) < 1e-8);
  X = solve_averaged_ode(zero_field(), {0.25, -3.0}, grid);
  for (std::size_t i = 0; i < X.size(); ++i) {
    CHECK(X.at(i)[0] == 0.25);
    CHECK(X.at(i)[1] == -3.0);
  }
  CHECK(X.t.front() == 0.0);
  CHECK(X.t.back() == 1.0);
}

TEST_CASE("time grid contains every jump time") {
  for (double eps : {0.3, 0.01, 0x1p-9, 0.0007}) {
    const auto g = time_grid(eps, 1e-3);
    CHECK(std::is_sorted(g.begin(), g.end()));
    for (std::size_t n = 0; n <= steps_for(eps); ++n) {
      const double t = static_cast<double>(n) * eps;
      CHECK(std::binary_search(g.begin(), g.end(), t));
      CHECK(stair_index(t, eps) == n);
    }
  }
}

TEST_CASE("deviation of a staircase against its line") {
  const Vec c{0.75};
  const auto field = constant_field(c);
  const auto fam = FastFamily::doubling_drift(1.0, 0.0, 1.0);
  for (double eps : {0.1, 0.013, 0x1p-8}) {
    InitialCondition ic;
    ic.point.y = 0.2;
    const auto run = iterate_fast_slow(field, fam, eps, ic);
    const VectorField f = [&](std::span<const double>, std::span<double> out) { out[0] = c[0]; };
    const double z = deviation_z(run.path, ode(f, field.x0(), eps));
    CHECK(z <= eps * c[0] * (1.0 + 1e-9));
    CHECK(z >= 0.5 * eps * c[0]);
  }
  InitialCondition ic;
  ic.point.y = 0.2;
  const auto run = iterate_fast_slow(constant_field({0.0}), fam, 0.01, ic);
  CHECK(deviation_z(run.path, ode(zero_field(), {0.0}, 0.01)) == 0.0);
}

TEST_CASE("deviation on a doubling orbit agrees with a rational reference") {
  // Frozen doubling, cos coupling: the mean field vanishes, so X is constant
  // and z is the largest |x_n| (left limits repeat earlier samples).
  const std::uint64_t D = 59049ull << 24;
  const double eps = 0x1p-10;
  const auto fam = FastFamily::doubling_drift(1.0, 0.0, 1.0);
  const auto field = SlowField::cosine_coupling();
  for (std::uint64_t p : {1ull, 123456789ull, 987654321012ull}) {
    const auto run = iterate_fast_slow(field, fam, eps, rational_start(p, D, 1200));
    const auto ys = oracle::doubling_rational_orbit(p, 0, D, 1024);
    const auto xs = oracle::cosine_slow_path(ys, eps);
    double ref = 0.0;
    for (double x : xs) ref = std::max(ref, std::fabs(x));
    const double z = deviation_z(run.path, ode(zero_field(), field.x0(), eps));
    CHECK(z == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("slow increments stay within eps L1") {
  const auto fam = FastFamily::lsv(ParamSchedule::affine(0.3, 1.0), 0.5);
  for (const auto& field : {SlowField::cosine_coupling(), SlowField::modulated_cosine()}) {
    for (double eps : {0.1, 0.01, 0.001}) {
      for (double y0 : {0.05, 0.4, 0.77}) {
        InitialCondition ic;
        ic.point.y = y0;
        const auto run = iterate_fast_slow(field, fam, eps, ic);
        CHECK(max_increment(run.path) <= eps * field.budget().L1 * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("declared budgets survive sampling") {
  const auto fam = FastFamily::doubling_drift(1.0, 1.0, 1.0);
  for (const auto& field : {SlowField::cosine_coupling(), SlowField::modulated_cosine()}) {
    const auto r = verify_budget(field, fam, 0.5, 20000, 11);
    CHECK(r.ok());
    CHECK(r.sup_a <= field.budget().L1);
  }
  const SlowField bad(1, {0.0}, {FieldTerm{0, YFunction::Cos, 1, XFunction::Sin, 0, 3.0, 2.0, 0.0}},
                      {1.5, 1.0, 1.0});
  CHECK_FALSE(verify_budget(bad, fam, 0.5, 20000, 11).ok());
}

TEST_CASE("non-finite slow state reports the step") {
  const FieldTerm big{0, YFunction::One, 1, XFunction::One, 0, 1.0, 1e308, 0.0};
  const SlowField huge(1, {0.0}, {big, big}, {1e308, 1.0, 1.0});
  const auto fam = FastFamily::doubling_drift(1.0, 0.0, 1.0);
  InitialCondition ic;
  CHECK_THROWS_AS(iterate_fast_slow(huge, fam, 0.01, ic), NumericError);
}

TEST_CASE("deviation shrinks with eps for the frozen doubling benchmark") {
  const auto fam = FastFamily::doubling_drift(1.0, 0.0, 1.0);
  const auto field = SlowField::cosine_coupling();
  std::vector<double> epss, zs;
  CounterRng rng(77, 0);
  for (int k = 6; k <= 14; ++k) {
    const double eps = std::ldexp(1.0, -k);
    const std::size_t N = steps_for(eps);
    const auto X = ode(zero_field(), field.x0(), eps);
    double mean = 0.0;
    const int samples = 200;
    for (int i = 0; i < samples; ++i) {
      InitialCondition ic;
      ic.digits = BinaryExpansion::random(rng, N + 128);
      ic.point.y = ic.digits->value();
      mean += deviation_z(iterate_fast_slow(field, fam, eps, ic).path, X);
    }
    epss.push_back(eps);
    zs.push_back(mean / samples);
  }
  const auto fit = fit_rate(epss, zs);
  CHECK(fit.fit.slope > 0.0);
  CHECK(fit.fit.slope == doctest::Approx(0.5).epsilon(0.2));
}
