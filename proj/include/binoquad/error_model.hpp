#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "binoquad/measure.hpp"
#include "binoquad/rules.hpp"

// A-priori error machinery: the split integrals K+/K- of the nodal
// polynomial, the closed-form NC2 and GL2 constants, and the Peano-type
// constant k_{alpha,r} = m_{r+1} - I(x^{r+1}) that drives the composite
// convergence rate and the stopping criterion.

namespace binoquad {

struct ErrorConstants {
  double k_plus = 0.0;   // int of max(0, omega_p) dmu
  double k_minus = 0.0;  // int of max(0, -omega_p) dmu
  double peano = 0.0;    // m_{r+1} - I(x^{r+1}) at the effective degree
};

// Monic nodal polynomial omega_p = prod_q (x - zeta_q), ascending
// coefficients. Requires pairwise distinct nodes (H4 at alpha = 1/2 has a
// duplicate; merge it first).
inline std::vector<double> nodal_polynomial(const QuadratureRule& rule) {
  for (std::size_t i = 0; i < rule.size(); ++i) {
    for (std::size_t j = i + 1; j < rule.size(); ++j) {
      if (rule.nodes[i] == rule.nodes[j]) {
        throw std::invalid_argument("nodal polynomial needs distinct nodes; node " +
                                    std::to_string(rule.nodes[i]) + " repeats");
      }
    }
  }
  std::vector<double> coefficients{1.0};
  for (double z : rule.nodes) {
    std::vector<double> next(coefficients.size() + 1, 0.0);
    for (std::size_t i = 0; i < coefficients.size(); ++i) {
      next[i] -= z * coefficients[i];
      next[i + 1] += coefficients[i];
    }
    coefficients = std::move(next);
  }
  return coefficients;
}

inline double evaluate_polynomial(std::span<const double> coefficients, double x) {
  double acc = 0.0;
  for (std::size_t i = coefficients.size(); i-- > 0;) acc = acc * x + coefficients[i];
  return acc;
}

// Effective exactness degree and the first nonzero moment defect. Starts
// from the declared degree; while the defect at r+1 vanishes (|.| <= 1e-12,
// a degree-upgrade alpha) the degree is bumped, up to the interpolatory
// ceiling 2p+1.
struct PeanoInfo {
  int degree = 0;
  double constant = 0.0;
};

inline PeanoInfo peano_info(const QuadratureRule& rule, MomentCache& cache) {
  const int ceiling = 2 * static_cast<int>(rule.size()) - 1;
  int r = rule.degree;
  for (;;) {
    const double c = cache.moment(r + 1) - rule_moment(rule, r + 1);
    if (std::abs(c) > 1e-12 || r >= ceiling) return {r, c};
    ++r;
  }
}

inline double peano_constant(const QuadratureRule& rule, MomentCache& cache) {
  return peano_info(rule, cache).constant;
}

// K+/K- of an arbitrary rule by numerical split integration of the nodal
// polynomial at the given oracle level (error ~ 2^-level times the
// Lipschitz constant of omega; exact where omega keeps one sign on a cell
// half since the per-cell oracle rule has degree 3).
inline ErrorConstants split_nodal_integrals(const QuadratureRule& rule,
                                            MomentCache& cache, int level = 20) {
  const std::vector<double> omega = nodal_polynomial(rule);
  ErrorConstants out;
  out.k_plus = reference_integral(cache.alpha(), [&](double x) {
    return std::max(0.0, evaluate_polynomial(omega, x));
  }, level);
  out.k_minus = reference_integral(cache.alpha(), [&](double x) {
    return std::max(0.0, -evaluate_polynomial(omega, x));
  }, level);
  out.peano = peano_constant(rule, cache);
  return out;
}

// Closed forms for the three-point Newton-Cotes rule. omega_2 is
// nonnegative on [0,1/2], so K+ is the left-half integral; the change of
// variable x -> x/2 gives
//   K+ = alpha (1-alpha)^2 (4-alpha) / 28.
// The nodal cubic obeys the reflection identity omega_2(1-x) = -omega_2(x)
// (it is NOT antisymmetric under the half shift: omega_2(x+1/2) =
// x^3 - x/4 on the left half). Reflecting the measure swaps alpha with
// 1-alpha, hence
//   K- = K+ at (1-alpha) = alpha^2 (1-alpha) (3+alpha) / 28,
//   K+ - K- = alpha (1-alpha) (1-2alpha) / 7,
// vanishing exactly at the Lebesgue alpha. Both match the signed moment
// expansion of the nodal integral and the numerical split integrals.
inline ErrorConstants nc2_k_constants(const Alpha& alpha) {
  const double a = alpha.value();
  ErrorConstants out;
  out.k_plus = a * (1.0 - a) * (1.0 - a) * (4.0 - a) / 28.0;
  out.k_minus = a * a * (1.0 - a) * (3.0 + a) / 28.0;
  MomentCache cache(alpha);
  const QuadratureRule nc2 = build_rule(RuleFamily::NC2, alpha);
  out.peano = peano_constant(nc2, cache);
  return out;
}

// Convenience bound for NC2, from the interpolation-error chain with the
// constants of nc2_k_constants:
//   |int f dmu - NC2(f)| <= |K+ - K-|/6 * max|f'''|
//                           + min(K+, K-)/6 * max|f''''|.
// The derivative maxima are supplied by the caller.
inline double nc2_error_bound(const Alpha& alpha, double max_f3, double max_f4) {
  if (max_f3 < 0.0 || max_f4 < 0.0) {
    throw std::domain_error("derivative bounds must be nonnegative");
  }
  const auto k = nc2_k_constants(alpha);
  return std::abs(k.k_plus - k.k_minus) / 6.0 * max_f3 +
         std::min(k.k_plus, k.k_minus) / 6.0 * max_f4;
}

// Mean-value coefficient of the GL2 (Hermite) error:
//   int f dmu - GL2(f) = C(alpha) * f''''(xi) / 24,
//   C(alpha) = -2 alpha (17 alpha^3 - 34 alpha^2 + 9 alpha + 8) / 735.
inline double gl2_error_constant(const Alpha& alpha) {
  const double a = alpha.value();
  return -2.0 * a * (17.0 * a * a * a - 34.0 * a * a + 9.0 * a + 8.0) / 735.0;
}

// |int f dmu - I(f)| <= deriv_bound / (r+1)! * |k_{alpha,r}| for
// deriv_bound >= sup |f^(r+1)|; attained exactly by f = x^{r+1}.
inline double taylor_error_bound(const QuadratureRule& rule, MomentCache& cache,
                                 double deriv_bound) {
  if (deriv_bound < 0.0) throw std::domain_error("derivative bound must be nonnegative");
  const PeanoInfo info = peano_info(rule, cache);
  double factorial = 1.0;
  for (int i = 2; i <= info.degree + 1; ++i) factorial *= static_cast<double>(i);
  return deriv_bound / factorial * std::abs(info.constant);
}

}  // namespace binoquad
