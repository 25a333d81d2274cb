#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fsavg/error.hpp"
#include "fsavg/suspension.hpp"

using namespace fsavg;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

const FastFamily kDrift = FastFamily::doubling_drift(1.0, 1.0, 1.0);
const FastFamily kFrozen = FastFamily::doubling_drift(1.0, 0.0, 1.0);

MeasureOptions bins(std::size_t k) {
  MeasureOptions o;
  o.k = k;
  return o;
}

InitialCondition start(double y) {
  InitialCondition ic;
  ic.point.y = y;
  return ic;
}

}  // namespace

TEST_CASE("roofs") {
  const auto c = Roof::constant();
  CHECK(c(0.3, 0.1) == 1.0);
  CHECK(c.K1(0.5) == 2.0);
  const auto s = Roof::sine();
  CHECK(s(0.25, 0.0) == doctest::Approx(1.5));
  CHECK(s.inf(0.1) == doctest::Approx(0.5));
  CHECK(s.lip() == doctest::Approx(std::numbers::pi));
  CHECK(s.K1(0.1) == doctest::Approx(std::numbers::pi));
  CHECK(roof_kind_from_string("sine") == RoofKind::Sine);
  CHECK_THROWS_AS(roof_kind_from_string("tent"), UsageError);
}

TEST_CASE("flow steps") {
  const SuspensionFlow fs(kDrift, Roof::constant(), 0.5);
  const double eps = 0.1;
  const FlowPoint p{{0.3, 0.0}, 0.25};
  const auto same = fs.flow(eps, p, 0.0);
  CHECK(same.y.y == p.y.y);
  CHECK(same.u == p.u);

  std::size_t rolls = 0;
  const auto one = fs.flow(eps, p, 1.0, &rolls);
  CHECK(rolls == 1);
  CHECK(one.y.y == kDrift.apply(eps, p.y).y);
  CHECK(one.u == doctest::Approx(0.25).epsilon(1e-15));

  const auto two = fs.flow(eps, {{0.3, 0.0}, 0.0}, 2.5, &rolls);
  CHECK(rolls == 2);
  CHECK(two.y.y == kDrift.apply(eps, kDrift.apply(eps, p.y)).y);
  CHECK(two.u == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("semiflow additivity and rollover counts") {
  for (const auto& roof : {Roof::constant(), Roof::sine(0.4)}) {
    const SuspensionFlow fs(FastFamily::lsv(ParamSchedule::affine(0.4, 1.0), 0.5), roof, 0.4);
    CounterRng rng(41, 0);
    for (int i = 0; i < 2000; ++i) {
      const double eps = 0.3 * rng.uniform();
      const double y = rng.uniform();
      const FlowPoint p{{y, 0.0}, rng.uniform() * roof(y, eps)};
      const double s = 3.0 * rng.uniform(), t = 3.0 * rng.uniform();
      std::size_t rolls = 0;
      const auto a = fs.flow(eps, fs.flow(eps, p, s), t);
      const auto b = fs.flow(eps, p, s + t, &rolls);
      CHECK(a.y.y == doctest::Approx(b.y.y).epsilon(1e-12));
      CHECK(std::fabs(a.u - b.u) < 1e-12);
      CHECK(b.u >= 0.0);
      CHECK(b.u < roof(b.y.y, eps));
      CHECK(static_cast<double>(rolls) <= 1.0 + fs.K1() * (s + t));
    }
  }
}

TEST_CASE("fluctuation integrals") {
  const SuspensionFlow fs(kFrozen, Roof::constant(), 0.5);
  const double dt = fs.K1() / 64.0;
  const auto c = [](const PhasePoint&, double) { return 0.7; };
  for (double t : {0.0, 0.3, 2.75, 10.0})
    CHECK(continuous_fluctuation_integral(c, fs, 0.0, {{0.41, 0.0}, 0.2}, t, dt) == doctest::Approx(0.7 * t));

  const auto lin = [](const PhasePoint&, double u) { return u; };
  const double u0 = 0.1, t = 0.6;
  CHECK(continuous_fluctuation_integral(lin, fs, 0.0, {{0.41, 0.0}, u0}, t, dt) ==
        doctest::Approx(u0 * t + t * t / 2.0).epsilon(1e-13));

  const auto cosv = [](const PhasePoint& y, double) { return std::cos(kTwoPi * y.y); };
  for (double t2 : {0.5, 3.0, 17.25})
    CHECK(continuous_fluctuation_integral(cosv, fs, 0.0, {{0.0, 0.0}, 0.0}, t2, dt) == doctest::Approx(t2));
}

TEST_CASE("induced flow observables") {
  const SuspensionFlow sine(kDrift, Roof::sine(), 0.5);
  const SuspensionFlow flat(kDrift, Roof::constant(), 0.5);
  const auto c = [](const PhasePoint&, double) { return -1.5; };
  const auto zero = [](const PhasePoint&, double) { return 0.0; };
  const auto cosv = [](const PhasePoint& y, double) { return std::cos(kTwoPi * y.y); };
  for (double y : {0.0, 0.2, 0.77}) {
    CHECK(induced_flow_observable(c, sine, 0.1, {y, 0.0}) == doctest::Approx(-1.5 * Roof::sine()(y, 0.1)));
    CHECK(induced_flow_observable(zero, sine, 0.1, {y, 0.0}) == 0.0);
    CHECK(induced_flow_observable(cosv, flat, 0.1, {y, 0.0}) == doctest::Approx(std::cos(kTwoPi * y)));
  }
}

TEST_CASE("induced observables are Lipschitz within 2 K1 K2 L") {
  const double eps = 0x1p-6;
  SuspensionFlow fs(kDrift, Roof::sine(0.3), 0.1);
  fs.set_K2(estimate_K2(fs, eps, 2000, 5));
  CHECK(fs.K2() >= fs.K1());
  const auto field = SlowField::cosine_coupling();
  const auto m = stationary_measure(kDrift, eps, bins(1024));
  const Vec means = flow_basis_means(field, fs, eps, m);
  const Vec abar = averaged_field(field, means, eps, {0.0});
  const FlowObservable v = [&](const PhasePoint& y, double) { return field.eval({0.0}, y, eps)[0] - abar[0]; };
  const auto w = [&](double y) { return induced_flow_observable(v, fs, eps, {y, 0.0}); };
  const double lip = lipschitz_norm_estimate(w, kDrift.phase_space(), 4000, 6);
  const double vlip = lipschitz_norm_estimate([](double y) { return std::cos(kTwoPi * y); },
                                              kDrift.phase_space(), 4000, 6);
  CHECK(lip <= 2.0 * fs.K1() * fs.K2() * vlip);
}

TEST_CASE("induced comparison") {
  const auto field = SlowField::cosine_coupling();
  const SuspensionFlow fs(kFrozen, Roof::constant(), 0.5);
  const XGrid grid = default_xgrid(field);
  const auto m = stationary_measure(kFrozen, 0.0, bins(1024));

  const SlowField xo(1, {0.0}, {FieldTerm{0, YFunction::One, 1, XFunction::Sin, 0, 1.0, 1.0, 0.0}},
                     {1.0, 1.0, 1.0});
  const auto z = vw_comparison(xo, fs, 0x1p-6, m, 200, 2.0, make_xgrid(xo, 4), 1);
  CHECK(z.delta_q == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(z.additive == doctest::Approx(4.0 * fs.K1() * xo.L() * 0x1p-6));
  CHECK(z.holds());

  const auto a = vw_comparison(field, fs, 0x1p-6, m, 400, 2.0, grid, 2);
  const auto b = vw_comparison(field, fs, 0x1p-7, m, 400, 2.0, grid, 2);
  CHECK(a.holds());
  CHECK(b.holds());
  CHECK(b.additive == doctest::Approx(a.additive / 2.0).epsilon(1e-15));
  CHECK(a.delta_q > 0.0);
  CHECK(std::fabs(a.delta_q - a.Delta_q) <= a.additive + a.margin);
}

TEST_CASE("continuous-time deviation bound") {
  const auto field = SlowField::modulated_cosine();
  for (const auto& roof : {Roof::constant(), Roof::sine(0.3)}) {
    const SuspensionFlow fs(kDrift, roof, 0.1);
    const XGrid grid = make_xgrid(field, 8);
    for (double eps : {0x1p-6, 0x1p-7}) {
      const auto me = stationary_measure(kDrift, eps, bins(1024));
      const auto m0 = stationary_measure(kDrift, 0.0, bins(1024));
      CounterRng rng(43, 0);
      for (int i = 0; i < 5; ++i) {
        std::vector<double> trace;
        const double y = rng.uniform();
        const auto c = flow_theorem_check(field, fs, eps, start(y), 0.0, me, m0, grid, 1e-3, &trace);
        INFO("z=" << c.z << " bound=" << c.bound << " delta=" << c.delta);
        CHECK(c.holds());
        CHECK(c.S >= eps);
        REQUIRE(trace.size() % 4 == 0);
        CHECK(trace[0] == 0.0);
        CHECK(trace[trace.size() - 4] == doctest::Approx(1.0));
      }
    }
  }
}

TEST_CASE("flow statistical stability") {
  SuspensionFlow fs(kDrift, Roof::constant(), 0.5);
  CHECK_THROWS_AS(ssflow_check([](const PhasePoint&) { return 0.0; }, 1.0, fs, 0.1,
                               stationary_measure(kDrift, 0.1, bins(64)),
                               stationary_measure(kDrift, 0.0, bins(64))),
                  UsageError);
  fs.set_K2(estimate_K2(fs, 0.1, 1000, 8));
  const auto v = [](const PhasePoint& y) { return std::cos(kTwoPi * y.y); };
  const double lip = lipschitz_norm_estimate([](double y) { return std::cos(kTwoPi * y); },
                                             kDrift.phase_space(), 4000, 7);
  const auto m0 = stationary_measure(kDrift, 0.0, bins(1024));
  for (double eps : {0.1, 0.01}) {
    const auto me = stationary_measure(kDrift, eps, bins(1024));
    const auto r = ssflow_check(v, lip, fs, eps, me, m0);
    CHECK(r.holds());
    CHECK(r.lhs < 1e-9);
  }
}
