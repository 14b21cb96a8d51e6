// Command-line front end: moment tables, rule dumps, one-shot composite
// integration, convergence histories, and alpha sweeps, in csv/json/pretty
// form. Exit codes: 0 ok, 2 usage, 3 expression syntax, 4 domain, 5
// evaluation fault.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "binoquad/binoquad.hpp"

using namespace binoquad;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitParse = 3;
constexpr int kExitDomain = 4;
constexpr int kExitEval = 5;

std::string g17(double v) { return detail::format_g(v, 17); }
std::string g14(double v) { return detail::format_g(v, 14); }

struct CommonOptions {
  std::string format = "pretty";
  std::string out = "stdout";
};

void add_common(CLI::App* cmd, CommonOptions& common) {
  cmd->add_option("--format", common.format, "output format")
      ->check(CLI::IsMember({"csv", "json", "pretty"}))
      ->capture_default_str();
  cmd->add_option("--out", common.out, "output path, or 'stdout'")->capture_default_str();
}

void emit(const CommonOptions& common, const std::string& text) {
  if (common.out == "stdout" || common.out == "-") {
    std::fputs(text.c_str(), stdout);
    return;
  }
  std::ofstream file(common.out, std::ios::binary);
  if (!file) throw std::domain_error("cannot open output file " + common.out);
  file << text;
}

Alpha checked_alpha(double a) {
  if (!(a > 0.0 && a < 1.0)) {
    throw CLI::ValidationError("--alpha", "alpha must lie strictly between 0 and 1");
  }
  return Alpha(a);
}

std::vector<RuleFamily> parse_rule_list(const std::string& list) {
  std::vector<RuleFamily> out;
  std::stringstream stream(list);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) out.push_back(family_from_name(item));
  }
  if (out.empty()) throw CLI::ValidationError("--rules", "no rule names given");
  return out;
}

// Integrand plus, when it is a polynomial we can integrate exactly through
// the moments (builtins and plain x^s), its coefficients.
struct Integrand {
  Expr expr;
  std::string label;
  std::optional<std::vector<double>> polynomial;
};

Integrand resolve_integrand(const std::string& expr_text, const std::string& builtin) {
  if (!builtin.empty()) {
    Integrand out{Expr::builtin(builtin), builtin, std::nullopt};
    if (builtin == "f1") out.polynomial = std::vector<double>{0.0, -0.1, 0.0, 0.6, 0.5};
    if (builtin == "f2") {
      std::vector<double> c(21, 0.0);
      c[20] = 1.0;
      out.polynomial = c;
    }
    return out;
  }
  Integrand out{Expr::parse(expr_text), expr_text, std::nullopt};
  if (const auto power = out.expr.as_monomial_power()) {
    std::vector<double> c(static_cast<std::size_t>(*power) + 1, 0.0);
    c.back() = 1.0;
    out.polynomial = c;
  }
  return out;
}

// exact value of the integral: moments when polynomial, otherwise the
// level-`fallback_level` reference oracle
struct ExactValue {
  double value;
  const char* source;
};

ExactValue exact_integral(const Alpha& alpha, const Integrand& f, int fallback_level) {
  if (f.polynomial) {
    MomentCache cache(alpha);
    return {integrate_polynomial(cache, *f.polynomial), "moments"};
  }
  const int level = std::min(fallback_level, max_reference_level);
  return {reference_integral(alpha, [&](double x) { return f.expr.eval(x); }, level),
          "reference"};
}

std::string json_array(const std::vector<double>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += g17(values[i]);
  }
  return out + "]";
}

// ---- moments ---------------------------------------------------------------

int cmd_moments(double alpha_value, int max_order, const CommonOptions& common) {
  const Alpha alpha = checked_alpha(alpha_value);
  MomentCache cache(alpha);
  std::vector<double> moments;
  for (int s = 0; s <= max_order; ++s) moments.push_back(cache.moment(s));

  std::string out;
  if (common.format == "csv") {
    out = "s,moment\n";
    for (int s = 0; s <= max_order; ++s) {
      out += std::to_string(s) + "," + g17(moments[static_cast<std::size_t>(s)]) + "\n";
    }
  } else if (common.format == "json") {
    out = "{\"alpha\": " + g17(alpha.value()) + ", \"moments\": " + json_array(moments) + "}\n";
  } else {
    out = "moments of the binomial measure, alpha = " + g14(alpha.value()) + "\n";
    for (int s = 0; s <= max_order; ++s) {
      char line[64];
      std::snprintf(line, sizeof(line), "%4d  %s\n", s,
                    g14(moments[static_cast<std::size_t>(s)]).c_str());
      out += line;
    }
  }
  emit(common, out);
  return 0;
}

// ---- table -----------------------------------------------------------------

int cmd_table(double alpha_value, const std::string& rules, int max_order,
              const CommonOptions& common) {
  const Alpha alpha = checked_alpha(alpha_value);
  const auto families = parse_rule_list(rules);
  MomentCache cache(alpha);

  std::vector<std::pair<std::string, std::vector<double>>> rows;
  std::vector<double> exact;
  for (int s = 1; s <= max_order; ++s) exact.push_back(cache.moment(s));
  rows.emplace_back("exact", exact);
  for (RuleFamily family : families) {
    const auto rule = build_rule(family, alpha);
    std::vector<double> values;
    for (int s = 1; s <= max_order; ++s) {
      values.push_back(rule_moment(rule, s));
    }
    rows.emplace_back(family_name(family), values);
  }

  std::string out;
  if (common.format == "csv") {
    out = "rule";
    for (int s = 1; s <= max_order; ++s) out += ",s" + std::to_string(s);
    out += "\n";
    for (const auto& [name, values] : rows) {
      out += name;
      for (double v : values) out += "," + g17(v);
      out += "\n";
    }
  } else if (common.format == "json") {
    out = "{\"alpha\": " + g17(alpha.value()) + ", \"rows\": [";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i) out += ", ";
      out += "{\"rule\": \"" + rows[i].first + "\", \"values\": " + json_array(rows[i].second) + "}";
    }
    out += "]}\n";
  } else {
    out = "calculated moments, alpha = " + g14(alpha.value()) + "\n";
    char header[256];
    std::snprintf(header, sizeof(header), "%-6s", "rule");
    out += header;
    for (int s = 1; s <= max_order; ++s) {
      std::snprintf(header, sizeof(header), " %20s", ("s=" + std::to_string(s)).c_str());
      out += header;
    }
    out += "\n";
    for (const auto& [name, values] : rows) {
      std::snprintf(header, sizeof(header), "%-6s", name.c_str());
      out += header;
      for (double v : values) {
        std::snprintf(header, sizeof(header), " %20s", g14(v).c_str());
        out += header;
      }
      out += "\n";
    }
  }
  emit(common, out);
  return 0;
}

// ---- rule ------------------------------------------------------------------

std::string rule_record(const QuadratureRule& rule) {
  std::string out = "{\"family\": \"" + std::string(family_name(rule.family)) + "\"";
  out += ", \"alpha\": " + g17(rule.alpha);
  out += ", \"nodes\": " + json_array(rule.nodes);
  out += ", \"weights\": " + json_array(rule.weights);
  out += ", \"degree\": " + std::to_string(rule.degree) + "}";
  return out;
}

int cmd_rule(const std::string& name, double alpha_value, const CommonOptions& common) {
  const Alpha alpha = checked_alpha(alpha_value);
  const auto rule = build_rule(family_from_name(name), alpha);

  for (std::size_t i = 0; i < rule.size(); ++i) {
    for (std::size_t j = i + 1; j < rule.size(); ++j) {
      if (rule.nodes[i] == rule.nodes[j]) {
        std::fprintf(stderr,
                     "warning: duplicate node %s; merge_duplicate_nodes gives the reduced rule\n",
                     g17(rule.nodes[i]).c_str());
      }
    }
  }

  std::string out;
  if (common.format == "csv") {
    out = "index,node,weight\n";
    for (std::size_t q = 0; q < rule.size(); ++q) {
      out += std::to_string(q) + "," + g17(rule.nodes[q]) + "," + g17(rule.weights[q]) + "\n";
    }
  } else if (common.format == "pretty") {
    out = std::string(family_name(rule.family)) + " at alpha = " + g14(rule.alpha) +
          ", degree " + std::to_string(rule.degree) + "\n";
    for (std::size_t q = 0; q < rule.size(); ++q) {
      char line[96];
      std::snprintf(line, sizeof(line), "  node %-22s weight %s\n", g14(rule.nodes[q]).c_str(),
                    g14(rule.weights[q]).c_str());
      out += line;
    }
  } else {
    out = rule_record(rule) + "\n";
  }
  emit(common, out);
  return 0;
}

// ---- integrate ---------------------------------------------------------------

int cmd_integrate(double alpha_value, const std::string& rule_name, const std::string& expr_text,
                  const std::string& builtin, double tol, int k_min, int k_max,
                  const CommonOptions& common) {
  const Alpha alpha = checked_alpha(alpha_value);
  const auto rule = build_rule(family_from_name(rule_name), alpha);
  const Integrand f = resolve_integrand(expr_text, builtin);
  StopConfig cfg;
  cfg.tol = tol;
  cfg.k_min = k_min;
  cfg.k_max = k_max;
  const auto result =
      run_composite(rule, alpha, [&](double x) { return f.expr.eval(x); }, cfg);
  const char* stopped = result.stopped_by == StopReason::Tolerance ? "tol" : "k_max";

  std::string out;
  if (common.format == "csv") {
    out = "result,final_level,est_error,stopped_by\n" + g17(result.value) + "," +
          std::to_string(result.final_level) + "," + g17(result.est_error) + "," + stopped +
          "\n";
  } else if (common.format == "json") {
    out = "{\"result\": " + g17(result.value) +
          ", \"final_level\": " + std::to_string(result.final_level) +
          ", \"est_error\": " + g17(result.est_error) + ", \"stopped_by\": \"" + stopped +
          "\"";
    if (result.estimator_warning) out += ", \"estimator_warning\": true";
    out += "}\n";
  } else {
    out = "integral of " + f.label + " with " + family_name(rule.family) +
          ", alpha = " + g14(alpha.value()) + "\n";
    out += "  result      " + g14(result.value) + "\n";
    out += "  final level " + std::to_string(result.final_level) + "\n";
    out += "  est. error  " + g14(result.est_error) + "\n";
    out += "  stopped by  " + std::string(stopped) + "\n";
    if (result.estimator_warning) out += "  warning: derivative estimate was unusable\n";
  }
  emit(common, out);
  return 0;
}

// ---- converge ----------------------------------------------------------------

int cmd_converge(double alpha_value, const std::string& rules, const std::string& expr_text,
                 const std::string& builtin, int max_level, const CommonOptions& common) {
  const Alpha alpha = checked_alpha(alpha_value);
  const auto families = parse_rule_list(rules);
  const Integrand f = resolve_integrand(expr_text, builtin);
  const ExactValue exact = exact_integral(alpha, f, std::max(22, max_level + 4));

  std::vector<std::vector<double>> errors(families.size());
  for (std::size_t r = 0; r < families.size(); ++r) {
    const auto rule = build_rule(families[r], alpha);
    for (int k = 0; k <= max_level; ++k) {
      const double value =
          composite_eval(rule, alpha, [&](double x) { return f.expr.eval(x); }, k);
      errors[r].push_back(std::abs(value - exact.value));
    }
  }

  std::string out;
  if (common.format == "csv") {
    out = "level";
    for (RuleFamily family : families) out += std::string(",") + family_name(family);
    out += "\n";
    for (int k = 0; k <= max_level; ++k) {
      out += std::to_string(k);
      for (std::size_t r = 0; r < families.size(); ++r) {
        out += "," + g17(errors[r][static_cast<std::size_t>(k)]);
      }
      out += "\n";
    }
    out += "# exact_source=" + std::string(exact.source) + " exact=" + g17(exact.value) + "\n";
  } else if (common.format == "json") {
    out = "{\"alpha\": " + g17(alpha.value()) + ", \"integrand\": \"" + f.label +
          "\", \"exact\": " + g17(exact.value) + ", \"exact_source\": \"" + exact.source +
          "\", \"errors\": {";
    for (std::size_t r = 0; r < families.size(); ++r) {
      if (r) out += ", ";
      out += "\"" + std::string(family_name(families[r])) + "\": " + json_array(errors[r]);
    }
    out += "}}\n";
  } else {
    out = "absolute errors vs " + std::string(exact.source) + " (" + g14(exact.value) +
          "), alpha = " + g14(alpha.value()) + "\n";
    char cell[64];
    std::snprintf(cell, sizeof(cell), "%5s", "level");
    out += cell;
    for (RuleFamily family : families) {
      std::snprintf(cell, sizeof(cell), " %14s", family_name(family));
      out += cell;
    }
    out += "\n";
    for (int k = 0; k <= max_level; ++k) {
      std::snprintf(cell, sizeof(cell), "%5d", k);
      out += cell;
      for (std::size_t r = 0; r < families.size(); ++r) {
        std::snprintf(cell, sizeof(cell), " %14.6e", errors[r][static_cast<std::size_t>(k)]);
        out += cell;
      }
      out += "\n";
    }
  }
  emit(common, out);
  return 0;
}

// ---- sweep-alpha ---------------------------------------------------------------

int cmd_sweep_alpha(const std::string& rule_name, const std::string& expr_text,
                    const std::string& builtin, double from, double to, int steps,
                    const CommonOptions& common) {
  if (!(from > 0.0 && from < to && to < 1.0)) {
    throw CLI::ValidationError("--from/--to", "need 0 < from < to < 1");
  }
  const RuleFamily family = family_from_name(rule_name);
  const Integrand f = resolve_integrand(expr_text, builtin);

  std::vector<double> alphas, errs;
  const char* source = nullptr;
  for (int i = 0; i < steps; ++i) {
    const double a = steps == 1 ? from : from + (to - from) * i / (steps - 1);
    const Alpha alpha(a);
    const ExactValue exact = exact_integral(alpha, f, 22);
    source = exact.source;
    const auto rule = build_rule(family, alpha);
    const double value = apply_rule(rule, [&](double x) { return f.expr.eval(x); });
    alphas.push_back(a);
    errs.push_back(exact.value - value);
  }

  std::string out;
  if (common.format == "csv") {
    out = "alpha,error\n";
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      out += g17(alphas[i]) + "," + g17(errs[i]) + "\n";
    }
    out += "# exact_source=" + std::string(source) + "\n";
  } else if (common.format == "json") {
    out = "{\"rule\": \"" + std::string(family_name(family)) + "\", \"integrand\": \"" +
          f.label + "\", \"exact_source\": \"" + source + "\", \"alphas\": " +
          json_array(alphas) + ", \"errors\": " + json_array(errs) + "}\n";
  } else {
    out = "true error of " + std::string(family_name(family)) + " on " + f.label +
          " over alpha (exact from " + source + ")\n";
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      char line[64];
      std::snprintf(line, sizeof(line), "%8.4f  %14.6e\n", alphas[i], errs[i]);
      out += line;
    }
  }
  emit(common, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadrature with respect to binomial measures"};
  app.require_subcommand(1);
  app.footer(
      "examples:\n"
      "  binoquad moments --alpha 0.05 --max-order 5 --format csv\n"
      "  binoquad table --alpha 0.3 --rules NC0,NC1,NC2,NC3,G0,G1,W1 --max-order 5\n"
      "  binoquad integrate --alpha 0.3 --rule GL2 --builtin f1 --tol 1e-8 --format json\n"
      "  binoquad integrate --alpha 0.5 --rule NC2 --expr \"x^2\"\n"
      "  binoquad converge --alpha 0.3 --rules NC2,NC3,GL2,G1 --builtin f2 --max-level 12\n"
      "  binoquad sweep-alpha --rule NC2 --builtin f1 --from 0.05 --to 0.5 --steps 46\n"
      "  binoquad rule GL2 --alpha 0.3 --format json\n"
      "\n"
      "exit codes: 0 success, 2 usage, 3 expression syntax error,\n"
      "            4 domain error, 5 evaluation fault");

  double alpha = 0.5;
  int max_order = 10;
  std::string rules, rule_name, expr_text, builtin;
  double tol = 1e-8, from = 0.05, to = 0.95;
  int k_min = 2, k_max = 20, max_level = 12, steps = 19;
  CommonOptions common;

  auto* moments = app.add_subcommand("moments", "exact moments via the recursion");
  moments->add_option("--alpha", alpha, "measure parameter in (0,1)")->required();
  moments->add_option("--max-order", max_order, "largest moment order")
      ->check(CLI::Range(0, 60))
      ->capture_default_str();
  add_common(moments, common);

  auto* table = app.add_subcommand("table", "moment table for a list of rules");
  table->add_option("--alpha", alpha, "measure parameter in (0,1)")->required();
  table->add_option("--rules", rules, "comma-separated rule names")->required();
  table->add_option("--max-order", max_order, "largest moment order")
      ->check(CLI::Range(1, 60))
      ->default_val(5);
  add_common(table, common);

  auto* integrate = app.add_subcommand("integrate", "composite integration with stopping");
  integrate->add_option("--alpha", alpha, "measure parameter in (0,1)")->required();
  integrate->add_option("--rule", rule_name, "rule family")->required();
  auto* ig1 = integrate->add_option("--expr", expr_text, "integrand expression");
  auto* ig2 = integrate->add_option("--builtin", builtin, "builtin integrand (f1|f2)");
  ig1->excludes(ig2);
  integrate->add_option("--tol", tol, "error tolerance")->capture_default_str();
  integrate->add_option("--k-min", k_min, "first bisection level")->capture_default_str();
  integrate->add_option("--k-max", k_max, "last bisection level")
      ->check(CLI::Range(0, max_composite_level))
      ->capture_default_str();
  add_common(integrate, common);

  auto* converge = app.add_subcommand("converge", "per-level errors for plotting");
  converge->add_option("--alpha", alpha, "measure parameter in (0,1)")->required();
  converge->add_option("--rules", rules, "comma-separated rule names")->required();
  auto* cg1 = converge->add_option("--expr", expr_text, "integrand expression");
  auto* cg2 = converge->add_option("--builtin", builtin, "builtin integrand (f1|f2)");
  cg1->excludes(cg2);
  converge->add_option("--max-level", max_level, "deepest level")
      ->check(CLI::Range(0, max_composite_level))
      ->capture_default_str();
  add_common(converge, common);

  auto* sweep = app.add_subcommand("sweep-alpha", "single-application error over alpha");
  sweep->add_option("--rule", rule_name, "rule family")->required();
  auto* sg1 = sweep->add_option("--expr", expr_text, "integrand expression");
  auto* sg2 = sweep->add_option("--builtin", builtin, "builtin integrand (f1|f2)");
  sg1->excludes(sg2);
  sweep->add_option("--from", from, "first alpha")->capture_default_str();
  sweep->add_option("--to", to, "last alpha")->capture_default_str();
  sweep->add_option("--steps", steps, "number of samples")
      ->check(CLI::Range(1, 100000))
      ->capture_default_str();
  add_common(sweep, common);

  auto* rule_cmd = app.add_subcommand("rule", "dump nodes, weights, and degree");
  rule_cmd->add_option("name", rule_name, "rule family")->required();
  rule_cmd->add_option("--alpha", alpha, "measure parameter in (0,1)")->required();
  add_common(rule_cmd, common);

  try {
    app.parse(argc, argv);

    if (moments->parsed()) return cmd_moments(alpha, max_order, common);
    if (table->parsed()) return cmd_table(alpha, rules, max_order, common);
    if (integrate->parsed()) {
      if (expr_text.empty() && builtin.empty()) {
        throw CLI::ValidationError("--expr", "one of --expr or --builtin is required");
      }
      return cmd_integrate(alpha, rule_name, expr_text, builtin, tol, k_min, k_max, common);
    }
    if (converge->parsed()) {
      if (expr_text.empty() && builtin.empty()) {
        throw CLI::ValidationError("--expr", "one of --expr or --builtin is required");
      }
      return cmd_converge(alpha, rules, expr_text, builtin, max_level, common);
    }
    if (sweep->parsed()) {
      if (expr_text.empty() && builtin.empty()) {
        throw CLI::ValidationError("--expr", "one of --expr or --builtin is required");
      }
      return cmd_sweep_alpha(rule_name, expr_text, builtin, from, to, steps, common);
    }
    if (rule_cmd->parsed()) return cmd_rule(rule_name, alpha, common);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints help or the error message
    return e.get_exit_code() == 0 ? 0 : kExitUsage;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "expression error: %s\n", e.what());
    return kExitParse;
  } catch (const EvalError& e) {
    std::fprintf(stderr, "evaluation error: %s\n", e.what());
    return kExitEval;
  } catch (const EvaluationError& e) {
    std::fprintf(stderr, "evaluation error: %s\n", e.what());
    return kExitEval;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "domain error: %s\n", e.what());
    return kExitDomain;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
}
