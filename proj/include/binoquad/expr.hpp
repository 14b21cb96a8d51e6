#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

// Minimal arithmetic-expression parser/evaluator for integrands given as
// text on the command line, plus the built-in test functions f1 and f2.
//
// Grammar (whitespace-insensitive, ASCII):
//   sum     := product (('+'|'-') product)*        left-associative
//   product := unary (('*'|'/') unary)*            left-associative
//   unary   := '-' unary | power
//   power   := primary ['^' ['-'] integer]         exponent in [-64, 64]
//   primary := number | 'x' | fn '(' sum ')' | '(' sum ')'
//   fn      := sin | cos | exp | log | abs | sqrt
// There is no implicit multiplication ("5x" is rejected).

namespace binoquad {

struct ParseError : std::runtime_error {
  std::size_t offset;
  std::string expected;

  ParseError(const std::string& what_happened, std::size_t at, std::string want)
      : std::runtime_error(what_happened + " at offset " + std::to_string(at) +
                           " (expected " + want + ")"),
        offset(at),
        expected(std::move(want)) {}
};

// Domain fault during evaluation (log of a nonpositive value, division by
// zero, ...). Faults are raised eagerly instead of propagating NaN.
struct EvalError : std::runtime_error {
  std::string op;
  double operand;

  EvalError(std::string op_name, double value)
      : std::runtime_error("evaluation fault: '" + op_name + "' applied to " +
                           std::to_string(value)),
        op(std::move(op_name)),
        operand(value) {}
};

class Expr {
 public:
  static constexpr int max_depth = 64;
  static constexpr int max_exponent = 64;

  static Expr parse(std::string_view text);

  // f1 = (5x^4 + 6x^3 - x)/10, f2 = x^20.
  static Expr builtin(std::string_view name) {
    if (name == "f1") return parse("(5*x^4+6*x^3-x)/10");
    if (name == "f2") return parse("x^20");
    throw std::invalid_argument("unknown builtin '" + std::string(name) +
                                "' (expected f1 or f2)");
  }

  double eval(double x) const { return eval_node(*root_, x); }
  double operator()(double x) const { return eval(x); }

  std::string to_string() const { return print_node(*root_); }

  bool same_structure(const Expr& other) const { return same_node(*root_, *other.root_); }

  // s when the expression is exactly x^s (or bare x); used to route x^s
  // integrands through the exact moments.
  std::optional<int> as_monomial_power() const {
    if (root_->kind == Kind::Variable) return 1;
    if (root_->kind == Kind::Pow && root_->lhs->kind == Kind::Variable &&
        root_->exponent >= 0) {
      return root_->exponent;
    }
    return std::nullopt;
  }

 private:
  enum class Kind { Literal, Variable, Negate, Add, Sub, Mul, Div, Pow, Call };
  enum class Fn { Sin, Cos, Exp, Log, Abs, Sqrt };

  struct Node {
    Kind kind;
    double literal = 0.0;
    int exponent = 0;
    Fn fn = Fn::Sin;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };
  using NodePtr = std::shared_ptr<const Node>;

  explicit Expr(NodePtr root) : root_(std::move(root)) {}

  static double power_int(double base, int exponent) {
    const bool negative = exponent < 0;
    unsigned long n = negative ? -static_cast<long>(exponent) : exponent;
    double result = 1.0;
    double square = base;
    while (n != 0) {
      if (n & 1) result *= square;
      square *= square;
      n >>= 1;
    }
    return negative ? 1.0 / result : result;
  }

  static double eval_node(const Node& node, double x) {
    switch (node.kind) {
      case Kind::Literal: return node.literal;
      case Kind::Variable: return x;
      case Kind::Negate: return -eval_node(*node.rhs, x);
      case Kind::Add: return eval_node(*node.lhs, x) + eval_node(*node.rhs, x);
      case Kind::Sub: return eval_node(*node.lhs, x) - eval_node(*node.rhs, x);
      case Kind::Mul: return eval_node(*node.lhs, x) * eval_node(*node.rhs, x);
      case Kind::Div: {
        const double denominator = eval_node(*node.rhs, x);
        if (denominator == 0.0) throw EvalError("/", denominator);
        return eval_node(*node.lhs, x) / denominator;
      }
      case Kind::Pow: {
        const double base = eval_node(*node.lhs, x);
        if (base == 0.0 && node.exponent < 0) throw EvalError("^", base);
        return power_int(base, node.exponent);
      }
      case Kind::Call: {
        const double argument = eval_node(*node.rhs, x);
        switch (node.fn) {
          case Fn::Sin: return std::sin(argument);
          case Fn::Cos: return std::cos(argument);
          case Fn::Exp: return std::exp(argument);
          case Fn::Log:
            if (argument <= 0.0) throw EvalError("log", argument);
            return std::log(argument);
          case Fn::Abs: return std::abs(argument);
          case Fn::Sqrt:
            if (argument < 0.0) throw EvalError("sqrt", argument);
            return std::sqrt(argument);
        }
        break;
      }
    }
    throw std::logic_error("corrupt expression node");
  }

  static const char* fn_name(Fn fn) {
    switch (fn) {
      case Fn::Sin: return "sin";
      case Fn::Cos: return "cos";
      case Fn::Exp: return "exp";
      case Fn::Log: return "log";
      case Fn::Abs: return "abs";
      case Fn::Sqrt: return "sqrt";
    }
    return "?";
  }

  // Precedence for the printer: atoms 5, ^ 4, unary - 3, * / 2, + - 1.
  static int precedence(const Node& node) {
    switch (node.kind) {
      case Kind::Literal:
      case Kind::Variable:
      case Kind::Call: return 5;
      case Kind::Pow: return 4;
      case Kind::Negate: return 3;
      case Kind::Mul:
      case Kind::Div: return 2;
      case Kind::Add:
      case Kind::Sub: return 1;
    }
    return 0;
  }

  static std::string print_child(const Node& child, int min_precedence) {
    std::string text = print_node(child);
    if (precedence(child) < min_precedence) return "(" + text + ")";
    return text;
  }

  static std::string print_node(const Node& node) {
    switch (node.kind) {
      case Kind::Literal: {
        char buffer[48];
        std::snprintf(buffer, sizeof(buffer), "%.17g", node.literal);
        return buffer;
      }
      case Kind::Variable: return "x";
      case Kind::Negate: return "-" + print_child(*node.rhs, 3);
      case Kind::Add: return print_child(*node.lhs, 1) + "+" + print_child(*node.rhs, 2);
      case Kind::Sub: return print_child(*node.lhs, 1) + "-" + print_child(*node.rhs, 2);
      case Kind::Mul: return print_child(*node.lhs, 2) + "*" + print_child(*node.rhs, 3);
      case Kind::Div: return print_child(*node.lhs, 2) + "/" + print_child(*node.rhs, 3);
      case Kind::Pow:
        return print_child(*node.lhs, 5) + "^" + std::to_string(node.exponent);
      case Kind::Call:
        return std::string(fn_name(node.fn)) + "(" + print_node(*node.rhs) + ")";
    }
    return "?";
  }

  static bool same_node(const Node& a, const Node& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case Kind::Literal: return a.literal == b.literal;
      case Kind::Variable: return true;
      case Kind::Negate: return same_node(*a.rhs, *b.rhs);
      case Kind::Pow: return a.exponent == b.exponent && same_node(*a.lhs, *b.lhs);
      case Kind::Call: return a.fn == b.fn && same_node(*a.rhs, *b.rhs);
      default: return same_node(*a.lhs, *b.lhs) && same_node(*a.rhs, *b.rhs);
    }
  }

  class Parser;
  std::shared_ptr<const Node> root_;
};

class Expr::Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr run() {
    if (text_.empty()) throw ParseError("empty expression", 0, "an expression");
    NodePtr root = parse_sum(0);
    skip_spaces();
    if (position_ != text_.size()) {
      throw ParseError("trailing input", position_, "an operator or end of input");
    }
    return root;
  }

 private:
  static NodePtr make_literal(double value) {
    Node node;
    node.kind = Kind::Literal;
    node.literal = value;
    return std::make_shared<const Node>(std::move(node));
  }

  static NodePtr make_variable() {
    Node node;
    node.kind = Kind::Variable;
    return std::make_shared<const Node>(std::move(node));
  }

  static NodePtr make_unary(Kind kind, NodePtr operand) {
    Node node;
    node.kind = kind;
    node.rhs = std::move(operand);
    return std::make_shared<const Node>(std::move(node));
  }

  static NodePtr make_binary(Kind kind, NodePtr lhs, NodePtr rhs) {
    Node node;
    node.kind = kind;
    node.lhs = std::move(lhs);
    node.rhs = std::move(rhs);
    return std::make_shared<const Node>(std::move(node));
  }

  static NodePtr make_power(NodePtr base, int exponent) {
    Node node;
    node.kind = Kind::Pow;
    node.exponent = exponent;
    node.lhs = std::move(base);
    return std::make_shared<const Node>(std::move(node));
  }

  static NodePtr make_call(Fn fn, NodePtr argument) {
    Node node;
    node.kind = Kind::Call;
    node.fn = fn;
    node.rhs = std::move(argument);
    return std::make_shared<const Node>(std::move(node));
  }

  void skip_spaces() {
    while (position_ < text_.size() &&
           (text_[position_] == ' ' || text_[position_] == '\t')) {
      ++position_;
    }
  }

  bool accept(char c) {
    skip_spaces();
    if (position_ < text_.size() && text_[position_] == c) {
      ++position_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_spaces();
    return position_ < text_.size() ? text_[position_] : '\0';
  }

  void check_depth(int depth) {
    if (depth > max_depth) {
      throw ParseError("expression nested too deeply", position_,
                       "at most " + std::to_string(max_depth) + " levels");
    }
  }

  NodePtr parse_sum(int depth) {
    check_depth(depth);
    NodePtr left = parse_product(depth + 1);
    for (;;) {
      if (accept('+')) {
        left = make_binary(Kind::Add, left, parse_product(depth + 1));
      } else if (accept('-')) {
        left = make_binary(Kind::Sub, left, parse_product(depth + 1));
      } else {
        return left;
      }
    }
  }

  NodePtr parse_product(int depth) {
    check_depth(depth);
    NodePtr left = parse_unary(depth + 1);
    for (;;) {
      if (accept('*')) {
        left = make_binary(Kind::Mul, left, parse_unary(depth + 1));
      } else if (accept('/')) {
        left = make_binary(Kind::Div, left, parse_unary(depth + 1));
      } else {
        return left;
      }
    }
  }

  NodePtr parse_unary(int depth) {
    check_depth(depth);
    if (accept('-')) {
      return make_unary(Kind::Negate, parse_unary(depth + 1));
    }
    return parse_power(depth + 1);
  }

  NodePtr parse_power(int depth) {
    check_depth(depth);
    NodePtr base = parse_primary(depth + 1);
    if (!accept('^')) return base;
    skip_spaces();
    const bool negative = accept('-');
    skip_spaces();
    const std::size_t start = position_;
    while (position_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[position_]))) {
      ++position_;
    }
    if (position_ == start) {
      throw ParseError("malformed exponent", position_, "an integer literal");
    }
    if (position_ < text_.size() &&
        (text_[position_] == '.' || text_[position_] == 'e' || text_[position_] == 'E')) {
      throw ParseError("non-integer exponent", position_, "an integer literal");
    }
    long value = 0;
    const auto result = std::from_chars(text_.data() + start, text_.data() + position_, value);
    if (result.ec != std::errc{} || value > max_exponent) value = max_exponent + 1;
    if (value > max_exponent) {
      throw ParseError("exponent out of range", start,
                       "an integer in [-" + std::to_string(max_exponent) + ", " +
                           std::to_string(max_exponent) + "]");
    }
    return make_power(base, static_cast<int>(negative ? -value : value));
  }

  NodePtr parse_primary(int depth) {
    check_depth(depth);
    skip_spaces();
    if (position_ >= text_.size()) {
      throw ParseError("unexpected end of input", position_, "a value");
    }
    const char c = text_[position_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name(depth);
    if (accept('(')) {
      NodePtr inner = parse_sum(depth + 1);
      if (!accept(')')) {
        throw ParseError("unbalanced parenthesis", position_, "')'");
      }
      return inner;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", position_, "a value");
  }

  NodePtr parse_number() {
    const std::size_t start = position_;
    double value = 0.0;
    const auto result =
        std::from_chars(text_.data() + start, text_.data() + text_.size(), value);
    if (result.ec != std::errc{}) {
      throw ParseError("malformed number", start, "a numeric literal");
    }
    position_ = static_cast<std::size_t>(result.ptr - text_.data());
    return make_literal(value);
  }

  NodePtr parse_name(int depth) {
    const std::size_t start = position_;
    while (position_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[position_])) ||
            text_[position_] == '_')) {
      ++position_;
    }
    const std::string_view name = text_.substr(start, position_ - start);
    if (name == "x") return make_variable();
    Fn fn;
    if (name == "sin") fn = Fn::Sin;
    else if (name == "cos") fn = Fn::Cos;
    else if (name == "exp") fn = Fn::Exp;
    else if (name == "log") fn = Fn::Log;
    else if (name == "abs") fn = Fn::Abs;
    else if (name == "sqrt") fn = Fn::Sqrt;
    else {
      throw ParseError("unknown name '" + std::string(name) + "'", start,
                       "x or one of sin cos exp log abs sqrt");
    }
    if (!accept('(')) {
      throw ParseError("function call without argument list", position_, "'('");
    }
    NodePtr argument = parse_sum(depth + 1);
    if (!accept(')')) {
      throw ParseError("unbalanced parenthesis", position_, "')'");
    }
    return make_call(fn, argument);
  }

  std::string_view text_;
  std::size_t position_ = 0;
};

inline Expr Expr::parse(std::string_view text) { return Expr(Parser(text).run()); }

}  // namespace binoquad
