#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "binoquad/measure.hpp"
#include "oracle.hpp"

using namespace binoquad;
using Catch::Approx;

namespace {
const double kGridAlphas[] = {0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95};
}

TEST_CASE("ones_count counts set bits") {
  CHECK(ones_count(0) == 0);
  CHECK(ones_count(3) == 2);
  CHECK(ones_count(255) == 8);
  CHECK(ones_count(std::uint64_t{1} << 50) == 1);

  // splitting identity: n(j*2^h + i) = n(j) + n(i) for i < 2^h
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int h = static_cast<int>(rng() % 9);
    const std::uint64_t j = rng() % 512;
    const std::uint64_t i = rng() % (std::uint64_t{1} << h);
    CHECK(ones_count((j << h) + i) == ones_count(j) + ones_count(i));
  }
}

TEST_CASE("alpha rejects the boundary") {
  CHECK_THROWS_AS(Alpha(0.0), std::domain_error);
  CHECK_THROWS_AS(Alpha(1.0), std::domain_error);
  CHECK_THROWS_AS(Alpha(-0.2), std::domain_error);
  CHECK_THROWS_AS(Alpha(1.7), std::domain_error);
  CHECK(Alpha(0.5).is_lebesgue());
  CHECK_FALSE(Alpha(0.3).is_lebesgue());
}

TEST_CASE("dyadic interval validation and geometry") {
  CHECK_THROWS_AS(DyadicInterval(2, 1), std::domain_error);
  CHECK_THROWS_AS(DyadicInterval(1, 0), std::domain_error);
  CHECK_THROWS_AS(DyadicInterval(0, 53), std::domain_error);
  CHECK_THROWS_AS(DyadicInterval(0, -1), std::domain_error);

  const DyadicInterval cell(5, 3);
  CHECK(cell.lower() == 0.625);
  CHECK(cell.upper() == 0.75);
  CHECK(cell.width() == 0.125);
  CHECK(cell.left_child() == DyadicInterval(10, 4));
  CHECK(cell.right_child() == DyadicInterval(11, 4));
}

TEST_CASE("dyadic mass closed form") {
  for (double a : kGridAlphas) {
    const Alpha alpha(a);
    CHECK(dyadic_mass(alpha, {1, 1}) == Approx(a).margin(1e-15));
    CHECK(dyadic_mass(alpha, {0, 0}) == 1.0);
  }
  CHECK(dyadic_mass(Alpha(0.3), {3, 2}) == Approx(0.09).margin(1e-16));
}

TEST_CASE("cell masses tile to one at every order") {
  for (double a : kGridAlphas) {
    const Alpha alpha(a);
    for (int k = 0; k <= 12; k += 3) {
      KahanSum total;
      for (std::uint64_t j = 0; j < (std::uint64_t{1} << k); ++j) {
        total += dyadic_mass(alpha, {j, k});
      }
      CHECK(total.value() == Approx(1.0).margin(1e-12));
    }
  }
}

TEST_CASE("mass product law over nested cells") {
  for (double a : {0.05, 0.3, 0.5, 0.8}) {
    const Alpha alpha(a);
    for (int k = 0; k <= 8; k += 2) {
      for (int h = 0; h <= 8; h += 2) {
        for (std::uint64_t j = 0; j < (std::uint64_t{1} << k); j += 3) {
          for (std::uint64_t i = 0; i < (std::uint64_t{1} << h); i += 3) {
            const double joint = dyadic_mass(alpha, {(j << h) + i, k + h});
            const double split = dyadic_mass(alpha, {j, k}) * dyadic_mass(alpha, {i, h});
            CHECK(joint == Approx(split).epsilon(1e-14));
          }
        }
      }
    }
  }
}

TEST_CASE("density of the order-k approximation") {
  const Alpha lebesgue(0.5);
  for (double x : {0.0, 0.1, 0.5, 0.73, 0.999}) {
    CHECK(density_at(lebesgue, 6, x) == Approx(1.0).margin(1e-15));
  }
  CHECK(density_at(Alpha(0.3), 1, 0.75) == Approx(0.6).margin(1e-15));
  CHECK(density_at(Alpha(0.3), 0, 0.4) == 1.0);
  CHECK_THROWS_AS(density_at(Alpha(0.3), 4, 1.0), std::domain_error);
  CHECK_THROWS_AS(density_at(Alpha(0.3), 4, -0.1), std::domain_error);
}

TEST_CASE("moment recursion reproduces the printed values") {
  MomentCache c05(Alpha(0.05));
  CHECK(c05.moment(0) == 1.0);
  CHECK(c05.moment(1) == Approx(0.05).margin(1e-15));
  CHECK(c05.moment(2) == Approx(0.055 / 3.0).margin(1e-15));
  CHECK(c05.moment(3) == Approx(0.00860714285714).margin(1e-13));
  CHECK(c05.moment(4) == Approx(0.00448142857143).margin(1e-13));
  CHECK(c05.moment(5) == Approx(0.00248679339478).margin(1e-13));

  MomentCache c30(Alpha(0.3));
  CHECK(c30.moment(2) == Approx(0.16).margin(1e-15));
  CHECK(c30.moment(5) == Approx(0.05300129032258).margin(1e-13));

  MomentCache c45(Alpha(0.45));
  CHECK(c45.moment(5) == Approx(0.13007146313364).margin(1e-13));
}

TEST_CASE("Lebesgue moments are 1/(s+1)") {
  MomentCache cache(Alpha(0.5));
  for (int s = 0; s <= 20; ++s) {
    CHECK(cache.moment(s) == Approx(1.0 / (s + 1)).margin(1e-13));
  }
}

TEST_CASE("moments decrease strictly and stay in (0,1]") {
  for (double a : kGridAlphas) {
    MomentCache cache((Alpha(a)));
    double previous = cache.moment(0);
    CHECK(previous == 1.0);
    for (int s = 1; s <= 40; ++s) {
      const double m = cache.moment(s);
      CHECK(m > 0.0);
      CHECK(m < previous);
      previous = m;
    }
  }
}

TEST_CASE("moment cache rejects bad orders") {
  MomentCache cache(Alpha(0.3));
  CHECK_THROWS_AS(cache.moment(-1), std::domain_error);
  CHECK_THROWS_AS(cache.moment(MomentCache::max_order + 1), std::overflow_error);
  // the documented maximum stays finite
  CHECK(std::isfinite(cache.moment(200)));
}

TEST_CASE("dyadic moments: order zero is the mass") {
  MomentCache cache(Alpha(0.35));
  for (int k = 0; k <= 6; ++k) {
    for (std::uint64_t j = 0; j < (std::uint64_t{1} << k); ++j) {
      CHECK(dyadic_moment(cache, 0, {j, k}) ==
            Approx(dyadic_mass(cache.alpha(), {j, k})).epsilon(1e-14));
    }
  }
}

TEST_CASE("dyadic moments add up to the global moment") {
  for (double a : {0.05, 0.3, 0.45, 0.5, 0.9}) {
    MomentCache cache((Alpha(a)));
    for (int s = 0; s <= 6; s += 2) {
      for (int k = 1; k <= 8; k += 3) {
        KahanSum total;
        for (std::uint64_t j = 0; j < (std::uint64_t{1} << k); ++j) {
          total += dyadic_moment(cache, s, {j, k});
        }
        CHECK(total.value() == Approx(cache.moment(s)).margin(1e-12));
      }
    }
  }
}

TEST_CASE("dyadic moment on the right half, against the density oracle") {
  MomentCache cache(Alpha(0.3));
  const double got = dyadic_moment(cache, 2, {1, 1});
  CHECK(got == Approx(0.132).margin(1e-15));
  const double brute = static_cast<double>(testoracle::riemann_density(
      0.3, [](double x) { return x >= 0.5 ? x * x : 0.0; }, 20));
  CHECK(got == Approx(brute).margin(1e-6));
}

TEST_CASE("self-similarity of moments on the left half") {
  // m_s (1-alpha) / 2^s = int over X_0^1 of x^s
  for (double a : kGridAlphas) {
    MomentCache cache((Alpha(a)));
    for (int s = 0; s <= 12; ++s) {
      const double lhs = cache.moment(s) * (1.0 - a) * std::ldexp(1.0, -s);
      CHECK(lhs == Approx(dyadic_moment(cache, s, {0, 1})).margin(1e-13));
    }
  }
}

TEST_CASE("balancing equation expanded through moments") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::uniform_real_distribution<double> alpha_dist(0.02, 0.98);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = alpha_dist(rng);
    MomentCache cache((Alpha(a)));
    const int degree = static_cast<int>(rng() % 9);
    std::vector<double> c(static_cast<std::size_t>(degree) + 1);
    for (double& v : c) v = coeff(rng);

    KahanSum lhs, rhs;
    for (int i = 0; i <= degree; ++i) {
      lhs += c[static_cast<std::size_t>(i)] * cache.moment(i);
      // (1-a) int p(x/2) + a int p(x/2 + 1/2), both via moments
      rhs += (1.0 - a) * c[static_cast<std::size_t>(i)] * std::ldexp(cache.moment(i), -i);
      double binom = 1.0;
      KahanSum shifted;
      for (int q = 0; q <= i; ++q) {
        if (q > 0) binom = binom * static_cast<double>(i - q + 1) / static_cast<double>(q);
        shifted += binom * cache.moment(q);
      }
      rhs += a * c[static_cast<std::size_t>(i)] * std::ldexp(shifted.value(), -i);
    }
    REQUIRE(lhs.value() == Approx(rhs.value()).margin(1e-12));
  }
}

TEST_CASE("change of variable: pulled-back monomials against the cell oracle") {
  // m_s = (1/mu(X_j^k)) int over X_j^k of (2^k x - j)^s; spot cells here,
  // the full (s,k,j) sweep runs in the acceptance suite.
  MomentCache cache(Alpha(0.3));
  for (int s : {1, 3, 4}) {
    for (int k : {1, 2, 4}) {
      for (std::uint64_t j : {std::uint64_t{0}, (std::uint64_t{1} << k) - 1}) {
        const double mass = dyadic_mass(cache.alpha(), {j, k});
        const double pulled = static_cast<double>(testoracle::restricted_gauss(
            0.3,
            [&](double x) { return testoracle::power_int(std::ldexp(x, k) - static_cast<double>(j), s); },
            j, k, 16));
        CHECK(cache.moment(s) == Approx(pulled / mass).margin(1e-12));
      }
    }
  }
}

TEST_CASE("dyadic moment against the density oracle on deeper cells") {
  MomentCache cache(Alpha(0.45));
  for (int s : {1, 2, 5}) {
    for (std::uint64_t j : {std::uint64_t{0}, std::uint64_t{5}, std::uint64_t{7}}) {
      const auto brute = testoracle::restricted_gauss(
          0.45, [&](double x) { return testoracle::power_int(x, s); }, j, 3, 16);
      CHECK(dyadic_moment(cache, s, {j, 3}) ==
            Approx(static_cast<double>(brute)).margin(1e-12));
    }
  }
}

TEST_CASE("reference integral on constants, identity, and x^20") {
  const Alpha alpha(0.3);
  for (int level : {0, 5, 12, 20}) {
    CHECK(reference_integral(alpha, [](double) { return 1.0; }, level) ==
          Approx(1.0).margin(1e-13));
  }
  CHECK(reference_integral(alpha, [](double x) { return x; }, 20) ==
        Approx(0.3).margin(1e-6));

  MomentCache cache(alpha);
  CHECK(reference_integral(alpha, [](double x) { return testoracle::power_int(x, 20); }, 20) ==
        Approx(cache.moment(20)).margin(1e-8));

  CHECK_THROWS_AS(reference_integral(alpha, [](double) { return 1.0; }, 29),
                  std::domain_error);
}

TEST_CASE("polynomial integration via moments") {
  MomentCache cache(Alpha(0.3));
  const std::vector<double> f1{0.0, -0.1, 0.0, 0.6, 0.5};
  const double expected =
      (5.0 * cache.moment(4) + 6.0 * cache.moment(3) - cache.moment(1)) / 10.0;
  CHECK(integrate_polynomial(cache, f1) == Approx(expected).margin(1e-16));
  CHECK(expected == Approx(0.06688).margin(1e-15));
}
