#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "binoquad/measure.hpp"

// Quadrature rules on [0,1] for the binomial measure: the closed-form
// families (Gauss G0/G1, equal-weight W1, Newton-Cotes NC0..NC4, Gauss-
// Lobatto GL2, the six-point H4), generic interpolatory weights for
// arbitrary nodes, and degree-of-exactness verification.

namespace binoquad {

enum class RuleFamily { G0, G1, W1, NC0, NC1, NC2, NC3, NC4, GL2, H4, Custom };

inline const char* family_name(RuleFamily family) {
  switch (family) {
    case RuleFamily::G0: return "G0";
    case RuleFamily::G1: return "G1";
    case RuleFamily::W1: return "W1";
    case RuleFamily::NC0: return "NC0";
    case RuleFamily::NC1: return "NC1";
    case RuleFamily::NC2: return "NC2";
    case RuleFamily::NC3: return "NC3";
    case RuleFamily::NC4: return "NC4";
    case RuleFamily::GL2: return "GL2";
    case RuleFamily::H4: return "H4";
    case RuleFamily::Custom: return "CUSTOM";
  }
  return "?";
}

inline RuleFamily family_from_name(std::string_view name) {
  for (RuleFamily f : {RuleFamily::G0, RuleFamily::G1, RuleFamily::W1,
                       RuleFamily::NC0, RuleFamily::NC1, RuleFamily::NC2,
                       RuleFamily::NC3, RuleFamily::NC4, RuleFamily::GL2,
                       RuleFamily::H4}) {
    if (name == family_name(f)) return f;
  }
  throw std::invalid_argument("unknown rule family '" + std::string(name) +
                              "' (expected one of G0 G1 W1 NC0 NC1 NC2 NC3 NC4 GL2 H4)");
}

// Nodes zeta_q in [0,1], weights beta_q, and the declared degree of
// exactness r (largest s with sum_q beta_q zeta_q^s = m_s for all orders
// up to s). Immutable after construction; freely shareable across threads.
struct QuadratureRule {
  RuleFamily family = RuleFamily::Custom;
  double alpha = 0.5;
  std::vector<double> nodes;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return nodes.size(); }
};

// sum_q beta_q zeta_q^s, the rule applied to x^s.
inline double rule_moment(const QuadratureRule& rule, int s) {
  KahanSum acc;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    acc += rule.weights[q] * std::pow(rule.nodes[q], s);
  }
  return acc.value();
}

// Closed-form nodes and weights of the named family at this alpha. Degrees
// follow the tables, including the Lebesgue upgrades at alpha = 1/2
// (NC0 0->1, NC2 2->3, NC4 4->5, W1 2->3). W1 only exists for
// alpha in [1/4, 3/4]; outside that range its nodes leave [0,1].
inline QuadratureRule build_rule(RuleFamily family, const Alpha& alpha) {
  const double a = alpha.value();
  const bool lebesgue = alpha.is_lebesgue();
  QuadratureRule rule;
  rule.family = family;
  rule.alpha = a;
  switch (family) {
    case RuleFamily::G0:
      rule.nodes = {a};
      rule.weights = {1.0};
      rule.degree = 1;
      break;
    case RuleFamily::G1: {
      const auto g = detail::gauss1_closed_form(a);
      assert(-264.0 * a * a + 264.0 * a + 81.0 > 0.0);
      rule.nodes = {g.node[0], g.node[1]};
      rule.weights = {g.weight[0], g.weight[1]};
      rule.degree = 3;
      break;
    }
    case RuleFamily::W1: {
      if (a < 0.25 || a > 0.75) {
        throw std::domain_error("W1 is only defined for alpha in [1/4, 3/4]; got " +
                                std::to_string(a));
      }
      const double d = std::sqrt(a * (1.0 - a) / 3.0);
      rule.nodes = {a - d, a + d};
      rule.weights = {0.5, 0.5};
      rule.degree = lebesgue ? 3 : 2;
      break;
    }
    case RuleFamily::NC0:
      rule.nodes = {0.5};
      rule.weights = {1.0};
      rule.degree = lebesgue ? 1 : 0;
      break;
    case RuleFamily::NC1:
      rule.nodes = {0.0, 1.0};
      rule.weights = {1.0 - a, a};
      rule.degree = 1;
      break;
    case RuleFamily::NC2:
      rule.nodes = {0.0, 0.5, 1.0};
      rule.weights = {(4.0 * a * a - 7.0 * a + 3.0) / 3.0,
                      (-8.0 * a * a + 8.0 * a) / 3.0,
                      (4.0 * a * a - a) / 3.0};
      rule.degree = lebesgue ? 3 : 2;
      break;
    case RuleFamily::NC3: {
      const double a2 = a * a, a3 = a2 * a;
      rule.nodes = {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
      rule.weights = {(-9.0 * a3 + 24.0 * a2 - 22.0 * a + 7.0) / 7.0,
                      (27.0 * a3 - 51.0 * a2 + 24.0 * a) / 7.0,
                      (-27.0 * a3 + 30.0 * a2 - 3.0 * a) / 7.0,
                      (9.0 * a3 - 3.0 * a2 + a) / 7.0};
      rule.degree = 3;
      break;
    }
    case RuleFamily::NC4: {
      const double a2 = a * a, a3 = a2 * a, a4 = a3 * a;
      rule.nodes = {0.0, 0.25, 0.5, 0.75, 1.0};
      rule.weights = {(256.0 * a4 - 992.0 * a3 + 1572.0 * a2 - 1151.0 * a + 315.0) / 315.0,
                      -32.0 * a * (32.0 * a3 - 94.0 * a2 + 99.0 * a - 37.0) / 315.0,
                      24.0 * a * (64.0 * a3 - 128.0 * a2 + 73.0 * a - 9.0) / 315.0,
                      -32.0 * a * (32.0 * a3 - 34.0 * a2 + 9.0 * a - 7.0) / 315.0,
                      a * (256.0 * a3 - 32.0 * a2 + 132.0 * a - 41.0) / 315.0};
      rule.degree = lebesgue ? 5 : 4;
      break;
    }
    case RuleFamily::GL2:
      rule.nodes = {0.0, (3.0 * a + 2.0) / 7.0, 1.0};
      rule.weights = {(a - 1.0) * (5.0 * a - 6.0) / (3.0 * (3.0 * a + 2.0)),
                      98.0 * a * (a - 1.0) / (3.0 * (3.0 * a + 2.0) * (3.0 * a - 5.0)),
                      a * (5.0 * a + 1.0) / (3.0 * (5.0 - 3.0 * a))};
      rule.degree = 3;
      break;
    case RuleFamily::H4: {
      // Interpolatory rule on the six points of the extrapolated Lobatto
      // formula. Node order matches the weight formulas: the extra node
      // zeta_5 = (3a+2)/7 comes last, out of increasing order. At the
      // Lebesgue alpha zeta_5 coincides with zeta_2 = 1/2 (use
      // merge_duplicate_nodes for the five-point view).
      const double a2 = a * a, a3 = a2 * a, a4 = a3 * a, a5 = a4 * a;
      const double c = (3.0 * a + 2.0) / 7.0;
      rule.nodes = {0.0, c / 2.0, 0.5, 0.5 + c / 2.0, 1.0, c};
      rule.weights = {
          (688.0 * a5 - 24257.0 * a4 + 59238.0 * a3 - 32825.0 * a2 - 19584.0 * a + 16740.0) /
              (1395.0 * (a + 3.0) * (3.0 * a + 2.0) * (3.0 * a + 2.0)),
          224.0 * a * (1667.0 * a4 - 6012.0 * a3 + 4855.0 * a2 + 1442.0 * a - 1952.0) /
              (1395.0 * (4.0 - a) * (3.0 * a - 5.0) * (9.0 * a2 + 12.0 * a + 4.0)),
          32.0 * a * (43.0 * a3 - 86.0 * a2 - 669.0 * a + 712.0) /
              (1395.0 * (3.0 * a + 2.0) * (5.0 - 3.0 * a)),
          224.0 * a * (1667.0 * a4 - 2323.0 * a3 - 2523.0 * a2 + 3395.0 * a - 216.0) /
              (1395.0 * (3.0 * a - 5.0) * (9.0 * a3 + 18.0 * a2 - 37.0 * a - 30.0)),
          a * (688.0 * a4 + 20817.0 * a3 - 30910.0 * a2 - 6227.0 * a - 1108.0) /
              (1395.0 * (a - 4.0) * (3.0 * a - 5.0) * (3.0 * a - 5.0)),
          -98.0 * a * (2311.0 * a3 - 4622.0 * a2 + 1137.0 * a + 1174.0) /
              (1395.0 * (81.0 * a4 - 162.0 * a3 - 99.0 * a2 + 180.0 * a + 100.0))};
      rule.degree = 5;
      break;
    }
    case RuleFamily::Custom:
      throw std::invalid_argument("CUSTOM rules come from interpolatory_weights, not build_rule");
  }
  return rule;
}

// Largest r <= max_check such that the rule reproduces every moment m_s,
// s <= r, to relative tolerance 1e-10 (absolute floor 1e-14 for tiny
// moments). Returns max_check when no failure is found; -1 if even the
// weight normalization (s = 0) fails.
inline int verify_degree(const QuadratureRule& rule, MomentCache& cache, int max_check) {
  std::vector<double> powers(rule.size(), 1.0);
  for (int s = 0; s <= max_check; ++s) {
    if (s > 0) {
      for (std::size_t q = 0; q < rule.size(); ++q) powers[q] *= rule.nodes[q];
    }
    KahanSum acc;
    for (std::size_t q = 0; q < rule.size(); ++q) acc += rule.weights[q] * powers[q];
    const double want = cache.moment(s);
    const double tol = std::max(1e-10 * std::abs(want), 1e-14);
    if (std::abs(acc.value() - want) > tol) return s - 1;
  }
  return max_check;
}

inline constexpr std::size_t max_interpolatory_nodes = 12;

// The unique weights making the rule on the given nodes exact through
// degree p (p+1 nodes): solves sum_q beta_q zeta_q^s = m_s, s = 0..p, by
// row-pivoted elimination. The returned degree is the verified one (it can
// exceed p, e.g. a single node at alpha gives degree 1). Node count is
// capped at 12: the power-basis system loses roughly a digit per node.
inline QuadratureRule interpolatory_weights(const Alpha& alpha, std::vector<double> nodes) {
  const std::size_t count = nodes.size();
  if (count == 0) throw std::invalid_argument("interpolatory_weights needs at least one node");
  if (count > max_interpolatory_nodes) {
    throw std::invalid_argument("node count " + std::to_string(count) +
                                " exceeds the supported maximum " +
                                std::to_string(max_interpolatory_nodes));
  }
  for (double z : nodes) {
    if (!(z >= 0.0 && z <= 1.0)) {
      throw std::domain_error("interpolatory node " + std::to_string(z) +
                              " outside [0,1]");
    }
  }

  MomentCache cache(alpha);
  // Vandermonde-transpose system A[s][q] = zeta_q^s, rhs m_s.
  std::vector<std::vector<double>> matrix(count, std::vector<double>(count));
  std::vector<double> rhs(count);
  for (std::size_t q = 0; q < count; ++q) matrix[0][q] = 1.0;
  for (std::size_t s = 1; s < count; ++s) {
    for (std::size_t q = 0; q < count; ++q) matrix[s][q] = matrix[s - 1][q] * nodes[q];
  }
  for (std::size_t s = 0; s < count; ++s) rhs[s] = cache.moment(static_cast<int>(s));

  double max_pivot = 0.0;
  double min_pivot = std::numeric_limits<double>::infinity();
  for (std::size_t col = 0; col < count; ++col) {
    std::size_t pivot_row = col;
    for (std::size_t r = col + 1; r < count; ++r) {
      if (std::abs(matrix[r][col]) > std::abs(matrix[pivot_row][col])) pivot_row = r;
    }
    std::swap(matrix[col], matrix[pivot_row]);
    std::swap(rhs[col], rhs[pivot_row]);
    const double pivot = matrix[col][col];
    max_pivot = std::max(max_pivot, std::abs(pivot));
    min_pivot = std::min(min_pivot, std::abs(pivot));
    const double condition = (min_pivot == 0.0) ? std::numeric_limits<double>::infinity()
                                                : max_pivot / min_pivot;
    if (condition > 1e14) {
      throw std::invalid_argument(
          "interpolatory system is singular or ill-conditioned "
          "(duplicate or near-duplicate nodes?); pivot-ratio condition estimate " +
          std::to_string(condition));
    }
    for (std::size_t r = col + 1; r < count; ++r) {
      const double factor = matrix[r][col] / pivot;
      for (std::size_t c = col; c < count; ++c) matrix[r][c] -= factor * matrix[col][c];
      rhs[r] -= factor * rhs[col];
    }
  }
  std::vector<double> weights(count);
  for (std::size_t r = count; r-- > 0;) {
    double acc = rhs[r];
    for (std::size_t c = r + 1; c < count; ++c) acc -= matrix[r][c] * weights[c];
    weights[r] = acc / matrix[r][r];
  }

  QuadratureRule rule;
  rule.family = RuleFamily::Custom;
  rule.alpha = alpha.value();
  rule.nodes = std::move(nodes);
  rule.weights = std::move(weights);
  rule.degree = static_cast<int>(count) - 1;
  rule.degree = verify_degree(rule, cache, 2 * static_cast<int>(count));
  return rule;
}

// Thrown when an integrand produces a non-finite value at a node.
struct EvaluationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// I_p(f) = sum_q beta_q f(zeta_q).
template <class F>
double apply_rule(const QuadratureRule& rule, F&& f) {
  KahanSum acc;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double value = f(rule.nodes[q]);
    if (!std::isfinite(value)) {
      throw EvaluationError("integrand is not finite at node " +
                            std::to_string(rule.nodes[q]));
    }
    acc += rule.weights[q] * value;
  }
  return acc.value();
}

// The rule rescaled onto a dyadic cell: nodes (j + zeta_q)/2^k, weights
// beta_q * mu_alpha(X_j^k).
template <class F>
double local_apply(const QuadratureRule& rule, const Alpha& alpha, F&& f,
                   const DyadicInterval& cell) {
  const double scale = cell.width();
  const double base = static_cast<double>(cell.j);
  KahanSum acc;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double x = (base + rule.nodes[q]) * scale;
    const double value = f(x);
    if (!std::isfinite(value)) {
      throw EvaluationError("integrand is not finite at node " + std::to_string(x));
    }
    acc += rule.weights[q] * value;
  }
  return dyadic_mass(alpha, cell) * acc.value();
}

// Richardson-style combination of level-1 local applications:
//   (16*(I(f,X_0^1) + I(f,X_1^1)) - I(f,X_0^0)) / 15.
// For NC2 this uses 5 points and keeps degree 2; for GL2 it uses 6 points
// and reaches degree 4. At alpha = 1/2 both coincide with NC4 applied to f.
template <class F>
double extrapolated(RuleFamily family, const Alpha& alpha, F&& f) {
  if (family != RuleFamily::NC2 && family != RuleFamily::GL2) {
    throw std::invalid_argument("extrapolated is defined for NC2 and GL2 only");
  }
  const QuadratureRule rule = build_rule(family, alpha);
  const double left = local_apply(rule, alpha, f, DyadicInterval(0, 1));
  const double right = local_apply(rule, alpha, f, DyadicInterval(1, 1));
  const double whole = apply_rule(rule, f);
  return (16.0 * (left + right) - whole) / 15.0;
}

// Nodes sorted ascending with weights permuted to match (display view; H4
// stores its extra node last to mirror the closed-form weight indices).
inline QuadratureRule sorted_by_node(const QuadratureRule& rule) {
  std::vector<std::size_t> order(rule.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rule.nodes[a] < rule.nodes[b]; });
  QuadratureRule out;
  out.family = rule.family;
  out.alpha = rule.alpha;
  out.degree = rule.degree;
  out.nodes.reserve(rule.size());
  out.weights.reserve(rule.size());
  for (std::size_t i : order) {
    out.nodes.push_back(rule.nodes[i]);
    out.weights.push_back(rule.weights[i]);
  }
  return out;
}

// Collapses nodes closer than `spacing`, summing their weights. H4 at
// alpha = 1/2 merges to the five Newton-Cotes points with NC4's weights.
inline QuadratureRule merge_duplicate_nodes(const QuadratureRule& rule,
                                            double spacing = 1e-12) {
  const QuadratureRule sorted = sorted_by_node(rule);
  QuadratureRule out;
  out.family = sorted.family;
  out.alpha = sorted.alpha;
  out.degree = sorted.degree;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!out.nodes.empty() && sorted.nodes[i] - out.nodes.back() <= spacing) {
      out.weights.back() += sorted.weights[i];
    } else {
      out.nodes.push_back(sorted.nodes[i]);
      out.weights.push_back(sorted.weights[i]);
    }
  }
  return out;
}

}  // namespace binoquad
