#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "fsavg/error.hpp"
#include "fsavg/expansion.hpp"
#include "fsavg/kernels.hpp"
#include "fsavg/rng.hpp"

using namespace fsavg;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

std::vector<double> random_vector(std::uint64_t seed, std::size_t n, double lo = -1.0, double hi = 1.0) {
  CounterRng rng(seed, 0);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("philox known answer") {
  const auto out = philox4x32_10({0, 0, 0, 0}, {0, 0});
  CHECK(out[0] == 0x6627e8d5u);
  CHECK(out[1] == 0xe169c58du);
  CHECK(out[2] == 0xbc57ac4cu);
  CHECK(out[3] == 0x9b00dbd8u);
  const auto ones = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                  {0xffffffffu, 0xffffffffu});
  CHECK(ones[0] == 0x408f276du);
  CHECK(ones[1] == 0x41c83b0eu);
  CHECK(ones[2] == 0xa20bc7c6u);
  CHECK(ones[3] == 0x6d5451fdu);
}

TEST_CASE("counter rng streams are reproducible and distinct") {
  CounterRng a(7, 3), b(7, 3), c(7, 4), d(8, 3);
  bool differs_c = false, differs_d = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs_c |= x != c.next_u64();
    differs_d |= x != d.next_u64();
  }
  CHECK(differs_c);
  CHECK(differs_d);
  CounterRng u(1, 0);
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double x = u.uniform();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
    mean += x;
  }
  CHECK(mean / 100000.0 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("binary expansion arithmetic") {
  SUBCASE("from_double is exact") {
    for (double y : {0.0, 0.5, 0.3, 0.1, 1.0 - 0x1p-53, 0x1p-1074, 0.7}) {
      const auto e = BinaryExpansion::from_double(y);
      CHECK(e.to_double() == y);
    }
    CHECK_THROWS_AS(BinaryExpansion::from_double(1.0), DomainError);
    CHECK_THROWS_AS(BinaryExpansion::from_double(-0.1), DomainError);
  }
  SUBCASE("one third alternates") {
    const auto e = BinaryExpansion::from_rational(1, 3, 200);
    for (std::size_t p = 1; p <= 200; ++p) CHECK(e.bit(p) == (p % 2 == 0));
    CHECK(e.window(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(e.window(2) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("plus, negated, truncated") {
    const auto a = BinaryExpansion::from_double(0.75);
    const auto b = BinaryExpansion::from_double(0.5);
    CHECK(a.plus(b).to_double() == 0.25);
    CHECK(a.negated().to_double() == 0.25);
    CHECK(BinaryExpansion().negated().to_double() == 0.0);
    CHECK(a.plus(a.negated()).to_double() == 0.0);
    const auto t = BinaryExpansion::from_double(0.3).truncated(10);
    CHECK(t.to_double() == std::floor(0.3 * 1024.0) / 1024.0);
    CHECK(t.last_set_bit() <= 10);
  }
  SUBCASE("windows match doubling of a dyadic") {
    const double y = 0x1.23456789abcdep-3;
    const auto e = BinaryExpansion::from_double(y);
    double v = y;
    for (std::size_t n = 0; n < 55; ++n) {
      CHECK(e.window(n) == std::floor(v * 0x1p52) / 0x1p52);
      v = 2.0 * v - std::floor(2.0 * v);
    }
  }
}

TEST_CASE("simd kernels are bitwise equal to the scalar reference") {
  using namespace fsavg::kernels;
  const KernelTable& s = scalar_table();
  std::vector<const KernelTable*> others;
  if (supported(Isa::Avx2)) others.push_back(&table(Isa::Avx2));
  if (others.empty()) {
    MESSAGE("no SIMD variant available on this machine");
    return;
  }
  for (const KernelTable* t : others) {
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 64u, 1001u}) {
      const auto a = random_vector(11 + n, n), b = random_vector(29 + n, n);
      CHECK(same_bits(s.dot(a.data(), b.data(), n), t->dot(a.data(), b.data(), n)));
      CHECK(same_bits(s.sum(a.data(), n), t->sum(a.data(), n)));
      CHECK(same_bits(s.l1_distance(a.data(), b.data(), n), t->l1_distance(a.data(), b.data(), n)));
      std::vector<std::uint32_t> idx(n);
      CounterRng r(5, n);
      for (auto& i : idx) i = static_cast<std::uint32_t>(r.next_u64() % (n ? n : 1));
      CHECK(same_bits(s.sparse_dot(a.data(), idx.data(), b.data(), n),
                      t->sparse_dot(a.data(), idx.data(), b.data(), n)));
    }
    for (std::size_t lanes : {1u, 2u, 5u, 8u, 33u, 66u}) {
      const std::size_t terms = 3;
      const auto loads = random_vector(lanes, terms * lanes);
      std::vector<double> m1(lanes, 0.0), m2(lanes, 0.0), n1(lanes, 0.0), n2(lanes, 0.0);
      for (int step = 1; step <= 50; ++step) {
        const auto sums = random_vector(1000 + static_cast<std::uint64_t>(step), terms, -5.0, 5.0);
        s.grid_fluctuation_max(loads.data(), lanes, sums.data(), terms, lanes, m1.data(), n1.data(), step);
        t->grid_fluctuation_max(loads.data(), lanes, sums.data(), terms, lanes, m2.data(), n2.data(), step);
      }
      for (std::size_t g = 0; g < lanes; ++g) {
        CHECK(same_bits(m1[g], m2[g]));
        CHECK(n1[g] == n2[g]);
      }
    }
    CounterRng rng(99, 0);
    const auto e = BinaryExpansion::random(rng, 5000);
    for (std::size_t first : {0u, 1u, 63u, 64u, 1000u}) {
      for (double off : {0.0, 0.25, 0.999}) {
        std::vector<double> o1(700), o2(700);
        s.expansion_windows(e.words(), first, o1.size(), off, o1.data());
        t->expansion_windows(e.words(), first, o2.size(), off, o2.data());
        for (std::size_t i = 0; i < o1.size(); ++i) REQUIRE(same_bits(o1[i], o2[i]));
      }
    }
  }
}

TEST_CASE("kernel dispatch can be forced") {
  using namespace fsavg::kernels;
  const Isa before = active_isa();
  set_isa(Isa::Scalar);
  CHECK(active_isa() == Isa::Scalar);
  CHECK(&active() == &scalar_table());
  if (supported(before)) set_isa(before);
  CHECK(name(Isa::Avx2) == "avx2");
}
