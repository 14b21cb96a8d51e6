#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "binoquad/kahan.hpp"

// Arithmetic for the binomial measure mu_alpha on [0,1]: the probability
// measure that gives the right half of every dyadic interval the fraction
// alpha of its parent's mass. alpha = 1/2 is the Lebesgue (uniform) case;
// any other alpha yields a singular, continuous measure.

namespace binoquad {

// Measure parameter, restricted to the open interval (0,1). The boundary
// values degenerate to Dirac measures and are rejected.
class Alpha {
 public:
  explicit Alpha(double value) : value_(value) {
    if (!(value > 0.0 && value < 1.0)) {
      throw std::domain_error("alpha must lie in the open interval (0,1), got " +
                              std::to_string(value));
    }
  }

  double value() const { return value_; }
  bool is_lebesgue() const { return value_ == 0.5; }

 private:
  double value_;
};

// Number of 1s in the binary expansion of j.
inline int ones_count(std::uint64_t j) { return std::popcount(j); }

// Half-open dyadic cell X_j^k = [j/2^k, (j+1)/2^k), 0 <= j < 2^k.
// The order k is capped at 52 so that both endpoints (and every node
// rescaled into the cell) stay exactly representable as doubles.
struct DyadicInterval {
  static constexpr int max_order = 52;

  std::uint64_t j = 0;
  int k = 0;

  DyadicInterval() = default;

  DyadicInterval(std::uint64_t index, int order) : j(index), k(order) {
    if (order < 0 || order > max_order) {
      throw std::domain_error("dyadic order must be in [0, " +
                              std::to_string(max_order) + "], got " +
                              std::to_string(order));
    }
    if (index >= (std::uint64_t{1} << order)) {
      throw std::domain_error("dyadic index " + std::to_string(index) +
                              " out of range for order " + std::to_string(order));
    }
  }

  double lower() const { return std::ldexp(static_cast<double>(j), -k); }
  double upper() const { return std::ldexp(static_cast<double>(j + 1), -k); }
  double width() const { return std::ldexp(1.0, -k); }

  DyadicInterval left_child() const { return {2 * j, k + 1}; }
  DyadicInterval right_child() const { return {2 * j + 1, k + 1}; }

  bool operator==(const DyadicInterval&) const = default;
};

// mu_alpha(X_j^k) = alpha^n(j) * (1-alpha)^(k-n(j)).
inline double dyadic_mass(const Alpha& alpha, const DyadicInterval& cell) {
  const int n = ones_count(cell.j);
  return std::pow(alpha.value(), n) * std::pow(1.0 - alpha.value(), cell.k - n);
}

// Piecewise-constant density f_{alpha,k} of the order-k approximation of
// mu_alpha: 2^k times the mass of the order-k cell containing x.
inline double density_at(const Alpha& alpha, int order, double x) {
  if (!(x >= 0.0 && x < 1.0)) {
    throw std::domain_error("density_at expects x in [0,1), got " + std::to_string(x));
  }
  const auto index = static_cast<std::uint64_t>(std::floor(std::ldexp(x, order)));
  return std::ldexp(dyadic_mass(alpha, DyadicInterval(index, order)), order);
}

// Memoized moments m_s = int_0^1 x^s dmu_alpha, built from the recursion
//
//   m_s = alpha / (2^s - 1) * sum_{q=1..s} C(s,q) m_{s-q},   m_0 = 1.
//
// Binomial coefficients are updated incrementally in floating point
// (C(s,q) = C(s,q-1)*(s-q+1)/q), so no integer overflow occurs; past
// max_order the coefficients themselves overflow double range and the
// request is rejected.
//
// Thread safety: extending the cache must be serialized externally; once a
// prefix is materialized, concurrent reads of it are safe.
class MomentCache {
 public:
  static constexpr int max_order = 960;

  explicit MomentCache(Alpha alpha) : alpha_(alpha), moments_{1.0} {}

  const Alpha& alpha() const { return alpha_; }
  int materialized() const { return static_cast<int>(moments_.size()) - 1; }

  double moment(int s) {
    if (s < 0) throw std::domain_error("moment order must be nonnegative");
    if (s > max_order) {
      throw std::overflow_error("moment order " + std::to_string(s) +
                                " exceeds the supported maximum " +
                                std::to_string(max_order));
    }
    extend(s);
    return moments_[static_cast<std::size_t>(s)];
  }

 private:
  void extend(int s) {
    for (int n = static_cast<int>(moments_.size()); n <= s; ++n) {
      KahanSum acc;
      double binom = 1.0;  // C(n,q), updated incrementally
      for (int q = 1; q <= n; ++q) {
        binom = binom * static_cast<double>(n - q + 1) / static_cast<double>(q);
        acc += binom * moments_[static_cast<std::size_t>(n - q)];
      }
      const double value = alpha_.value() / (std::ldexp(1.0, n) - 1.0) * acc.value();
      if (!std::isfinite(value)) {
        throw std::overflow_error("moment recursion overflowed at order " +
                                  std::to_string(n));
      }
      moments_.push_back(value);
    }
  }

  Alpha alpha_;
  std::vector<double> moments_;
};

// int_{X_j^k} x^s dmu_alpha. Evaluated as
//   mu(X_j^k) * sum_{q=0..s} C(s,q) (j/2^k)^q m_{s-q} 2^{-k(s-q)}
// with every term nonnegative, so the sum is cancellation-free.
inline double dyadic_moment(MomentCache& cache, int s, const DyadicInterval& cell) {
  if (s < 0) throw std::domain_error("moment order must be nonnegative");
  cache.moment(s);  // materialize up front
  const double left = cell.lower();
  KahanSum acc;
  double binom = 1.0;
  double left_pow = 1.0;  // (j/2^k)^q
  for (int q = 0; q <= s; ++q) {
    if (q > 0) {
      binom = binom * static_cast<double>(s - q + 1) / static_cast<double>(q);
      left_pow *= left;
    }
    acc += binom * left_pow * cache.moment(s - q) * std::ldexp(1.0, -cell.k * (s - q));
  }
  return dyadic_mass(cache.alpha(), cell) * acc.value();
}

// int_0^1 p(x) dmu_alpha for p given by ascending coefficients.
inline double integrate_polynomial(MomentCache& cache, std::span<const double> coefficients) {
  KahanSum acc;
  for (std::size_t s = 0; s < coefficients.size(); ++s) {
    acc += coefficients[s] * cache.moment(static_cast<int>(s));
  }
  return acc.value();
}

namespace detail {

// Closed form of the two-point Gauss rule for mu_alpha; also used as the
// per-cell rule of the reference oracle. The radicand is positive on (0,1).
struct TwoPointRule {
  double node[2];
  double weight[2];
};

inline TwoPointRule gauss1_closed_form(double a) {
  const double radicand = -264.0 * a * a + 264.0 * a + 81.0;
  const double root = std::sqrt(radicand);
  const double mid = (8.0 * a + 3.0) / 14.0;
  const double shift = (18.0 * a - 9.0) / (2.0 * root);
  return {{mid - root / 42.0, mid + root / 42.0}, {0.5 - shift, 0.5 + shift}};
}

}  // namespace detail

inline constexpr int max_reference_level = 28;

// Numerical oracle: integrates f against the order-`level` approximation of
// mu_alpha, applying the two-point Gauss rule on every order-`level` cell.
// For continuous f the error is bounded by the modulus of continuity of f
// at scale 2^-level; for smooth f the per-cell rule is of degree 3 and the
// error decays like 2^-(4*level).
template <class F>
double reference_integral(const Alpha& alpha, F&& f, int level) {
  if (level < 0 || level > max_reference_level) {
    throw std::domain_error("reference level must be in [0, " +
                            std::to_string(max_reference_level) + "]");
  }
  const auto rule = detail::gauss1_closed_form(alpha.value());
  std::vector<double> pow_a(static_cast<std::size_t>(level) + 1);
  std::vector<double> pow_b(static_cast<std::size_t>(level) + 1);
  for (int i = 0; i <= level; ++i) {
    pow_a[static_cast<std::size_t>(i)] = std::pow(alpha.value(), i);
    pow_b[static_cast<std::size_t>(i)] = std::pow(1.0 - alpha.value(), i);
  }
  const double scale = std::ldexp(1.0, -level);
  KahanSum total;
  const std::uint64_t cells = std::uint64_t{1} << level;
  for (std::uint64_t j = 0; j < cells; ++j) {
    const int n = ones_count(j);
    const double mass = pow_a[static_cast<std::size_t>(n)] *
                        pow_b[static_cast<std::size_t>(level - n)];
    const double fj = static_cast<double>(j);
    total += mass * (rule.weight[0] * f((fj + rule.node[0]) * scale) +
                     rule.weight[1] * f((fj + rule.node[1]) * scale));
  }
  return total.value();
}

}  // namespace binoquad
