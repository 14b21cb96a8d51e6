#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "binoquad/rules.hpp"
#include "oracle.hpp"

using namespace binoquad;
using Catch::Approx;

namespace {

std::vector<double> grid_alphas() {
  std::vector<double> out;
  for (int i = 1; i <= 19; ++i) out.push_back(i / 20.0);
  return out;
}

const RuleFamily kAllFamilies[] = {RuleFamily::G0,  RuleFamily::G1,  RuleFamily::W1,
                                   RuleFamily::NC0, RuleFamily::NC1, RuleFamily::NC2,
                                   RuleFamily::NC3, RuleFamily::NC4, RuleFamily::GL2,
                                   RuleFamily::H4};

bool w1_defined(double a) { return a >= 0.25 && a <= 0.75; }

}  // namespace

TEST_CASE("closed forms match the tables") {
  const Alpha a30(0.3);

  const auto g0 = build_rule(RuleFamily::G0, a30);
  CHECK(g0.nodes == std::vector<double>{0.3});
  CHECK(g0.weights == std::vector<double>{1.0});
  CHECK(g0.degree == 1);

  const auto nc1 = build_rule(RuleFamily::NC1, a30);
  CHECK(nc1.nodes == std::vector<double>{0.0, 1.0});
  CHECK(nc1.weights[0] == Approx(0.7).margin(1e-15));
  CHECK(nc1.weights[1] == Approx(0.3).margin(1e-15));
  CHECK(nc1.degree == 1);

  const auto nc2 = build_rule(RuleFamily::NC2, a30);
  CHECK(nc2.weights[0] == Approx(0.42).margin(1e-15));
  CHECK(nc2.weights[1] == Approx(0.56).margin(1e-15));
  CHECK(nc2.weights[2] == Approx(0.02).margin(1e-15));

  const auto gl2 = build_rule(RuleFamily::GL2, a30);
  CHECK(gl2.nodes[1] == Approx(29.0 / 70.0).margin(1e-16));
  CHECK(gl2.weights[1] == Approx(20.58 / 35.67).margin(1e-14));  // ~0.576955
  CHECK(gl2.weights[0] + gl2.weights[1] + gl2.weights[2] == Approx(1.0).margin(1e-14));
}

TEST_CASE("degrees carry the Lebesgue upgrades") {
  const Alpha generic(0.3);
  const Alpha half(0.5);
  CHECK(build_rule(RuleFamily::NC0, generic).degree == 0);
  CHECK(build_rule(RuleFamily::NC0, half).degree == 1);
  CHECK(build_rule(RuleFamily::NC2, generic).degree == 2);
  CHECK(build_rule(RuleFamily::NC2, half).degree == 3);
  CHECK(build_rule(RuleFamily::NC4, generic).degree == 4);
  CHECK(build_rule(RuleFamily::NC4, half).degree == 5);
  CHECK(build_rule(RuleFamily::W1, generic).degree == 2);
  CHECK(build_rule(RuleFamily::W1, half).degree == 3);
  CHECK(build_rule(RuleFamily::H4, generic).degree == 5);
}

TEST_CASE("W1 outside [1/4, 3/4] is rejected") {
  CHECK_THROWS_WITH(build_rule(RuleFamily::W1, Alpha(0.05)),
                    Catch::Matchers::ContainsSubstring("[1/4, 3/4]"));
  CHECK_THROWS_AS(build_rule(RuleFamily::W1, Alpha(0.76)), std::domain_error);
  CHECK_NOTHROW(build_rule(RuleFamily::W1, Alpha(0.25)));
  CHECK_NOTHROW(build_rule(RuleFamily::W1, Alpha(0.75)));
}

TEST_CASE("family names round-trip and reject junk") {
  for (RuleFamily f : kAllFamilies) {
    CHECK(family_from_name(family_name(f)) == f);
  }
  CHECK_THROWS_AS(family_from_name("NC9"), std::invalid_argument);
  CHECK_THROWS_AS(build_rule(RuleFamily::Custom, Alpha(0.3)), std::invalid_argument);
}

TEST_CASE("weights of every family sum to one on the alpha grid") {
  for (double a : grid_alphas()) {
    const Alpha alpha(a);
    for (RuleFamily f : kAllFamilies) {
      if (f == RuleFamily::W1 && !w1_defined(a)) continue;
      const auto rule = build_rule(f, alpha);
      KahanSum total;
      for (double w : rule.weights) total += w;
      INFO(family_name(f) << " at alpha=" << a);
      CHECK(total.value() == Approx(1.0).margin(1e-12));
      for (double z : rule.nodes) {
        CHECK(z >= -1e-15);
        CHECK(z <= 1.0 + 1e-15);
      }
    }
  }
}

TEST_CASE("nodes are pairwise distinct except H4 at the Lebesgue alpha") {
  for (double a : grid_alphas()) {
    const Alpha alpha(a);
    for (RuleFamily f : kAllFamilies) {
      if (f == RuleFamily::W1 && !w1_defined(a)) continue;
      const auto rule = build_rule(f, alpha);
      int duplicates = 0;
      for (std::size_t i = 0; i < rule.size(); ++i) {
        for (std::size_t j = i + 1; j < rule.size(); ++j) {
          if (rule.nodes[i] == rule.nodes[j]) ++duplicates;
        }
      }
      INFO(family_name(f) << " at alpha=" << a);
      if (f == RuleFamily::H4 && a == 0.5) {
        CHECK(duplicates == 1);  // zeta_5 collides with the midpoint
      } else {
        CHECK(duplicates == 0);
      }
    }
  }
}

TEST_CASE("verify_degree spot checks") {
  MomentCache c30(Alpha(0.3));
  MomentCache c45(Alpha(0.45));
  MomentCache c50(Alpha(0.5));
  CHECK(verify_degree(build_rule(RuleFamily::NC2, Alpha(0.3)), c30, 5) == 2);
  CHECK(verify_degree(build_rule(RuleFamily::NC2, Alpha(0.5)), c50, 5) == 3);
  CHECK(verify_degree(build_rule(RuleFamily::G1, Alpha(0.45)), c45, 5) == 3);
  CHECK(verify_degree(build_rule(RuleFamily::H4, Alpha(0.3)), c30, 8) == 5);
  // an exact prefix returns max_check when nothing fails
  CHECK(verify_degree(build_rule(RuleFamily::G1, Alpha(0.45)), c45, 3) == 3);
}

TEST_CASE("interpolatory weights reproduce the closed forms") {
  const Alpha alpha(0.3);

  const auto endpoints = interpolatory_weights(alpha, {0.0, 1.0});
  CHECK(endpoints.weights[0] == Approx(0.7).margin(1e-12));
  CHECK(endpoints.weights[1] == Approx(0.3).margin(1e-12));
  CHECK(endpoints.degree == 1);

  const auto gauss0 = interpolatory_weights(alpha, {0.3});
  CHECK(gauss0.weights[0] == Approx(1.0).margin(1e-14));
  CHECK(gauss0.degree >= 1);

  const auto gl2 = build_rule(RuleFamily::GL2, alpha);
  const auto rebuilt = interpolatory_weights(alpha, gl2.nodes);
  for (std::size_t q = 0; q < gl2.size(); ++q) {
    CHECK(rebuilt.weights[q] == Approx(gl2.weights[q]).margin(1e-11));
  }

  for (double a : {0.1, 0.3, 0.45, 0.7}) {
    const Alpha av(a);
    for (RuleFamily f : kAllFamilies) {
      if (f == RuleFamily::W1 && !w1_defined(a)) continue;
      const auto rule = build_rule(f, av);
      const auto again = interpolatory_weights(av, rule.nodes);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        INFO(family_name(f) << " at alpha=" << a << ", weight " << q);
        CHECK(again.weights[q] == Approx(rule.weights[q]).margin(1e-10));
      }
    }
  }
}

TEST_CASE("interpolatory solver rejects bad node sets") {
  const Alpha alpha(0.3);
  CHECK_THROWS_WITH(interpolatory_weights(alpha, {0.5, 0.5}),
                    Catch::Matchers::ContainsSubstring("condition"));
  CHECK_THROWS_AS(interpolatory_weights(alpha, {0.5, 0.5 + 1e-15}), std::invalid_argument);
  CHECK_THROWS_AS(interpolatory_weights(alpha, {}), std::invalid_argument);
  CHECK_THROWS_AS(interpolatory_weights(alpha, {0.0, 1.2}), std::domain_error);
  std::vector<double> too_many(13);
  for (std::size_t i = 0; i < too_many.size(); ++i) {
    too_many[i] = static_cast<double>(i) / 12.0;
  }
  CHECK_THROWS_AS(interpolatory_weights(alpha, too_many), std::invalid_argument);
}

TEST_CASE("apply_rule evaluates the weighted sum") {
  const Alpha alpha(0.3);
  const auto nc0 = build_rule(RuleFamily::NC0, alpha);
  CHECK(apply_rule(nc0, [](double x) { return std::cos(x); }) == Approx(std::cos(0.5)));

  const auto g0 = build_rule(RuleFamily::G0, alpha);
  CHECK(apply_rule(g0, [](double x) { return x * x * x; }) == Approx(0.027).margin(1e-15));

  const auto g1 = build_rule(RuleFamily::G1, Alpha(0.45));
  CHECK(apply_rule(g1, [](double x) { return testoracle::power_int(x, 5); }) ==
        Approx(0.11703565233236).margin(1e-13));

  CHECK_THROWS_AS(apply_rule(nc0, [](double) { return std::numeric_limits<double>::infinity(); }),
                  EvaluationError);
  CHECK_THROWS_WITH(apply_rule(nc0, [](double) { return std::nan(""); }),
                    Catch::Matchers::ContainsSubstring("0.5"));
}

TEST_CASE("local application rescales nodes and weights") {
  const Alpha alpha(0.3);
  const auto g0 = build_rule(RuleFamily::G0, alpha);
  CHECK(local_apply(g0, alpha, [](double x) { return x; }, {1, 1}) ==
        Approx(0.195).margin(1e-15));

  for (RuleFamily f : {RuleFamily::NC2, RuleFamily::G1, RuleFamily::H4}) {
    const auto rule = build_rule(f, alpha);
    for (int k : {0, 2, 5}) {
      for (std::uint64_t j = 0; j < (std::uint64_t{1} << k); j += 2) {
        CHECK(local_apply(rule, alpha, [](double) { return 1.0; }, {j, k}) ==
              Approx(dyadic_mass(alpha, {j, k})).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("extrapolation identities") {
  const Alpha half(0.5);
  const auto quartic = [](double x) { return testoracle::power_int(x, 4); };
  const auto nc4 = build_rule(RuleFamily::NC4, half);
  CHECK(extrapolated(RuleFamily::NC2, half, quartic) ==
        Approx(apply_rule(nc4, quartic)).margin(1e-15));

  const Alpha a30(0.3);
  MomentCache cache(a30);
  for (int s = 0; s <= 4; ++s) {
    CHECK(extrapolated(RuleFamily::GL2, a30, [&](double x) { return testoracle::power_int(x, s); }) ==
          Approx(cache.moment(s)).margin(1e-12));
  }
  // NC2 extrapolation stays at degree 2
  const double cubic_defect =
      extrapolated(RuleFamily::NC2, a30, [](double x) { return x * x * x; }) - cache.moment(3);
  CHECK(std::abs(cubic_defect) > 1e-4);

  CHECK_THROWS_AS(extrapolated(RuleFamily::NC3, a30, [](double x) { return x; }),
                  std::invalid_argument);
}

TEST_CASE("negative weight regions follow the sign pattern") {
  for (double a : grid_alphas()) {
    const auto nc2 = build_rule(RuleFamily::NC2, Alpha(a));
    CHECK((nc2.weights[0] < 0.0) == (a > 0.75));
    CHECK((nc2.weights[2] < 0.0) == (a < 0.25));
    const auto gl2 = build_rule(RuleFamily::GL2, Alpha(a));
    for (double w : gl2.weights) CHECK(w > 0.0);
  }
}

TEST_CASE("W1 coincides with G1 in the Lebesgue case") {
  const auto w1 = build_rule(RuleFamily::W1, Alpha(0.5));
  const auto g1 = build_rule(RuleFamily::G1, Alpha(0.5));
  for (int q = 0; q < 2; ++q) {
    CHECK(w1.nodes[q] == Approx(g1.nodes[q]).margin(1e-15));
    CHECK(w1.weights[q] == Approx(g1.weights[q]).margin(1e-15));
  }
  CHECK(w1.degree == g1.degree);
}

TEST_CASE("NC2 error on the quartic changes sign over (0, 1/2]") {
  // single-application true error swept over alpha: positive for small
  // alpha, negative at the Lebesgue point, so it crosses zero in between
  std::vector<double> errors;
  for (double a : {0.05, 0.15, 0.25, 0.35, 0.45, 0.5}) {
    const Alpha alpha(a);
    MomentCache cache(alpha);
    const double exact =
        (5.0 * cache.moment(4) + 6.0 * cache.moment(3) - cache.moment(1)) / 10.0;
    const auto nc2 = build_rule(RuleFamily::NC2, alpha);
    errors.push_back(exact - apply_rule(nc2, [](double x) {
                       return (5.0 * testoracle::power_int(x, 4) + 6.0 * x * x * x - x) / 10.0;
                     }));
  }
  CHECK(errors.front() > 0.0);
  CHECK(errors.back() < 0.0);
  int sign_changes = 0;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    if (errors[i] * errors[i + 1] < 0.0) ++sign_changes;
  }
  CHECK(sign_changes >= 1);
}

TEST_CASE("G1 nodes are symmetric about (8a+3)/14 and lie inside [0,1]") {
  for (double a : grid_alphas()) {
    const auto g1 = build_rule(RuleFamily::G1, Alpha(a));
    const double center = (8.0 * a + 3.0) / 14.0;
    CHECK(g1.nodes[0] + g1.nodes[1] == Approx(2.0 * center).margin(1e-14));
    CHECK(g1.nodes[0] >= 0.0);
    CHECK(g1.nodes[1] <= 1.0);
    CHECK(g1.nodes[0] < g1.nodes[1]);
  }
}

TEST_CASE("H4 node layout and the Lebesgue degeneracy") {
  for (double a : {0.2, 0.4}) {
    const auto h4 = build_rule(RuleFamily::H4, Alpha(a));
    // first five ascending, extra node between zeta_1 and zeta_2
    for (int q = 0; q < 4; ++q) CHECK(h4.nodes[q] < h4.nodes[q + 1]);
    CHECK(h4.nodes[5] > h4.nodes[1]);
    CHECK(h4.nodes[5] < h4.nodes[2]);
  }
  const auto h4_above = build_rule(RuleFamily::H4, Alpha(0.7));
  CHECK(h4_above.nodes[5] > h4_above.nodes[2]);
  CHECK(h4_above.nodes[5] < h4_above.nodes[3]);

  const auto h4_half = build_rule(RuleFamily::H4, Alpha(0.5));
  CHECK(h4_half.nodes[5] == 0.5);
  CHECK(h4_half.nodes[2] == 0.5);

  const auto merged = merge_duplicate_nodes(h4_half);
  REQUIRE(merged.size() == 5);
  const double expected[] = {7.0 / 90.0, 32.0 / 90.0, 12.0 / 90.0, 32.0 / 90.0, 7.0 / 90.0};
  for (int q = 0; q < 5; ++q) {
    CHECK(merged.nodes[q] == Approx(q * 0.25).margin(1e-15));
    CHECK(merged.weights[q] == Approx(expected[q]).margin(1e-12));
  }

  const auto sorted = sorted_by_node(build_rule(RuleFamily::H4, Alpha(0.3)));
  for (std::size_t q = 0; q + 1 < sorted.size(); ++q) {
    CHECK(sorted.nodes[q] <= sorted.nodes[q + 1]);
  }
}
