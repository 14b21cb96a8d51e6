#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "binoquad/error_model.hpp"
#include "binoquad/kahan.hpp"
#include "binoquad/measure.hpp"
#include "binoquad/rules.hpp"

// Composite integration over dyadic partitions: the level-k evaluation
// I_p^{2^k}(f), the bisection driver with its derivative-estimate stopping
// criterion, and convergence-order measurement.

namespace binoquad {

inline constexpr int max_composite_level = 24;

namespace detail {

inline std::string format_g(double value, int digits) {
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "%.*g", digits, value);
  return buffer;
}

}  // namespace detail

// A dyadic-regular partition: disjoint dyadic cells covering [0,1).
// `dyadic_proper` is set when the cells are exactly all 2^k cells of one
// order k.
class DyadicPartition {
 public:
  explicit DyadicPartition(std::vector<DyadicInterval> cells) : cells_(std::move(cells)) {
    if (cells_.empty()) throw std::invalid_argument("partition must be nonempty");
    std::sort(cells_.begin(), cells_.end(),
              [](const DyadicInterval& a, const DyadicInterval& b) {
                // compare j/2^k by cross-scaling to the finer order
                const int shift_a = b.k > a.k ? b.k - a.k : 0;
                const int shift_b = a.k > b.k ? a.k - b.k : 0;
                return (a.j << shift_a) < (b.j << shift_b);
              });
    int finest = 0;
    for (const auto& cell : cells_) finest = std::max(finest, cell.k);
    std::uint64_t cursor = 0;  // position in units of 2^-finest
    for (const auto& cell : cells_) {
      const std::uint64_t lo = cell.j << (finest - cell.k);
      const std::uint64_t hi = (cell.j + 1) << (finest - cell.k);
      if (lo != cursor) {
        throw std::invalid_argument("cells do not tile [0,1): gap or overlap at offset " +
                                    std::to_string(cell.lower()));
      }
      cursor = hi;
    }
    if (cursor != (std::uint64_t{1} << finest)) {
      throw std::invalid_argument("cells do not reach the right endpoint of [0,1)");
    }
    dyadic_proper_ = true;
    for (const auto& cell : cells_) {
      if (cell.k != cells_.front().k) {
        dyadic_proper_ = false;
        break;
      }
    }
  }

  // The uniform partition of [0,1) into all order-k cells.
  static DyadicPartition proper(int order) {
    if (order < 0 || order > max_composite_level) {
      throw std::domain_error("partition order must be in [0, " +
                              std::to_string(max_composite_level) + "]");
    }
    std::vector<DyadicInterval> cells;
    cells.reserve(std::size_t{1} << order);
    for (std::uint64_t j = 0; j < (std::uint64_t{1} << order); ++j) {
      cells.emplace_back(j, order);
    }
    return DyadicPartition(std::move(cells));
  }

  const std::vector<DyadicInterval>& intervals() const { return cells_; }
  bool dyadic_proper() const { return dyadic_proper_; }

 private:
  std::vector<DyadicInterval> cells_;
  bool dyadic_proper_ = false;
};

// Per-level record of a composite run. Errors appear once an exact value is
// supplied; levels below the rounding floor are excluded from order fits.
struct ConvergenceHistory {
  std::vector<int> levels;
  std::vector<double> values;
  std::vector<double> errors;  // empty until set_exact
  std::optional<double> exact;
  double fitted_order = std::numeric_limits<double>::quiet_NaN();

  void set_exact(double exact_value) {
    exact = exact_value;
    errors.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      errors[i] = std::abs(values[i] - exact_value);
    }
  }

  // CSV: header `level,value,abs_error`, 17 significant digits, LF endings.
  // The error column is empty while no exact value is known.
  std::string to_csv() const {
    std::string out = "level,value,abs_error\n";
    for (std::size_t i = 0; i < levels.size(); ++i) {
      out += std::to_string(levels[i]);
      out += ',';
      out += detail::format_g(values[i], 17);
      out += ',';
      if (i < errors.size()) out += detail::format_g(errors[i], 17);
      out += '\n';
    }
    return out;
  }
};

struct StopConfig {
  double tol = 1e-8;
  int k_min = 2;
  int k_max = 20;

  void validate() const {
    if (!(tol > 0.0)) throw std::domain_error("tol must be positive");
    if (k_min < 0 || k_min > k_max) throw std::domain_error("need 0 <= k_min <= k_max");
    if (k_max > max_composite_level) {
      throw std::domain_error("k_max exceeds the supported maximum " +
                              std::to_string(max_composite_level));
    }
  }
};

// I_p^{2^k}(f): the rule rescaled onto every order-k cell, summed with
// compensation. Deterministic: cells are accumulated in index order.
template <class F>
double composite_eval(const QuadratureRule& rule, const Alpha& alpha, F&& f, int level) {
  if (level < 0 || level > max_composite_level) {
    throw std::domain_error("composite level must be in [0, " +
                            std::to_string(max_composite_level) + "]");
  }
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
    const double mass =
        pow_a[static_cast<std::size_t>(n)] * pow_b[static_cast<std::size_t>(level - n)];
    const double base = static_cast<double>(j);
    KahanSum cell;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double x = (base + rule.nodes[q]) * scale;
      const double value = f(x);
      if (!std::isfinite(value)) {
        throw EvaluationError("integrand is not finite at node " + std::to_string(x));
      }
      cell += rule.weights[q] * value;
    }
    total += mass * cell.value();
  }
  return total.value();
}

// Same sum over an arbitrary dyadic-regular partition.
template <class F>
double composite_eval(const QuadratureRule& rule, const Alpha& alpha, F&& f,
                      const DyadicPartition& partition) {
  KahanSum total;
  for (const auto& cell : partition.intervals()) {
    total += local_apply(rule, alpha, f, cell);
  }
  return total.value();
}

enum class StopReason { Tolerance, MaxLevel };

struct CompositeResult {
  double value = 0.0;
  int final_level = 0;
  double est_error = std::numeric_limits<double>::quiet_NaN();
  StopReason stopped_by = StopReason::Tolerance;
  bool estimator_warning = false;  // set when the derivative estimate broke down
  ConvergenceHistory history;
};

namespace detail {

// K_{j,k}: the (r+1)-th derivative of f on X_j^k estimated from the defect
// between the cell's local value and its two order-(k+1) refinements.
template <class F>
double derivative_estimate(const QuadratureRule& rule, const Alpha& alpha, F&& f,
                           const DyadicInterval& cell, int degree, double peano) {
  const double parent = local_apply(rule, alpha, f, cell);
  const double children = local_apply(rule, alpha, f, cell.left_child()) +
                          local_apply(rule, alpha, f, cell.right_child());
  double factorial = 1.0;
  for (int i = 2; i <= degree + 1; ++i) factorial *= static_cast<double>(i);
  const double scale = std::ldexp(factorial, (cell.k + 1) * (degree + 1)) /
                       ((std::ldexp(1.0, degree + 1) - 1.0) * dyadic_mass(alpha, cell) * peano);
  return scale * (parent - children);
}

}  // namespace detail

// Bisection driver: evaluates the composite rule on dyadic-proper
// partitions of increasing order until the derivative-estimate criterion
//
//   k >= min{ [ (1/r) log2( |k_peano| Kbar / ((r+1)! tol) ) ]_+ + 1, k_max }
//
// holds, with Kbar the largest |K_{j,k-1}| over the previous level's cells.
// The returned est_error is |k_peano| Kbar / ((r+1)! 2^(k(r+1))), the
// leading error term at the final level; it is a heuristic, not a bound.
// When the rule is exact beyond any measurable defect (|k_peano| <= 1e-14
// even after degree upgrades) or the estimate turns non-finite, the driver
// falls back to stopping on successive-level differences.
template <class F>
CompositeResult run_composite(const QuadratureRule& rule, const Alpha& alpha, F&& f,
                              const StopConfig& cfg = {}) {
  cfg.validate();
  if (rule.degree < 1) {
    throw std::invalid_argument("run_composite needs a rule of degree >= 1 (got degree " +
                                std::to_string(rule.degree) + ")");
  }
  MomentCache cache(alpha);
  const PeanoInfo info = peano_info(rule, cache);
  const int degree = info.degree;
  const double peano = info.constant;
  double factorial = 1.0;
  for (int i = 2; i <= degree + 1; ++i) factorial *= static_cast<double>(i);
  const bool degenerate = std::abs(peano) <= 1e-14;

  CompositeResult out;
  bool fallback = degenerate;
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (int k = cfg.k_min;; ++k) {
    const double value = composite_eval(rule, alpha, f, k);
    out.history.levels.push_back(k);
    out.history.values.push_back(value);
    out.value = value;
    out.final_level = k;

    if (!fallback && k >= 1) {
      double k_bar = 0.0;
      bool finite = true;
      for (std::uint64_t j = 0; j < (std::uint64_t{1} << (k - 1)); ++j) {
        const double estimate = detail::derivative_estimate(
            rule, alpha, f, DyadicInterval(j, k - 1), degree, peano);
        if (!std::isfinite(estimate)) {
          finite = false;
          break;
        }
        k_bar = std::max(k_bar, std::abs(estimate));
      }
      if (!finite) {
        out.estimator_warning = true;
        fallback = true;
      } else {
        const double load = std::abs(peano) * k_bar / (factorial * cfg.tol);
        const int wanted = load > 0.0
                               ? static_cast<int>(std::floor(std::max(
                                     0.0, std::log2(load) / static_cast<double>(degree)))) + 1
                               : 1;
        out.est_error =
            std::abs(peano) * k_bar / (factorial * std::ldexp(1.0, k * (degree + 1)));
        if (k >= std::min(wanted, cfg.k_max)) {
          out.stopped_by = wanted <= cfg.k_max ? StopReason::Tolerance : StopReason::MaxLevel;
          return out;
        }
      }
    }
    if (fallback) {
      if (!std::isnan(previous)) {
        out.est_error = std::abs(value - previous);
        if (out.est_error < cfg.tol) {
          out.stopped_by = StopReason::Tolerance;
          return out;
        }
      }
      previous = value;
    }
    if (k >= cfg.k_max) {
      out.stopped_by = StopReason::MaxLevel;
      return out;
    }
  }
}

// Least-squares slope of log2(error) against -level: the observed order of
// convergence. Levels at or below the rounding floor (error below
// 100 * eps * |exact|) are ignored; at least three usable points required.
inline double measure_order(const ConvergenceHistory& history) {
  if (history.errors.size() != history.levels.size()) {
    throw std::invalid_argument("history carries no error data; call set_exact first");
  }
  const double magnitude =
      history.exact ? std::abs(*history.exact)
                    : (history.values.empty() ? 1.0 : std::abs(history.values.back()));
  const double floor = 100.0 * std::numeric_limits<double>::epsilon() * magnitude;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < history.levels.size(); ++i) {
    if (history.errors[i] > floor) {
      xs.push_back(-static_cast<double>(history.levels[i]));
      ys.push_back(std::log2(history.errors[i]));
    }
  }
  if (xs.size() < 3) {
    throw std::invalid_argument("insufficient points above the rounding floor (" +
                                std::to_string(xs.size()) + " < 3)");
  }
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace binoquad
