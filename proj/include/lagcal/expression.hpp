#pragma once
// Expression strings over a minimal grammar, evaluated with forward-mode
// derivatives so Hamiltonians and form coefficients given as text carry exact
// gradients.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' expr ')' | '(' expr ')'
//
// Functions: sin cos tan exp log sqrt tanh bump gbump. bump(s) = exp(1 - 1/(1 - s^2))
// for |s| < 1 and 0 otherwise (smooth, compactly supported, peak 1 at s = 0).
// gbump(s) = exp(8 - 8/(1 - s^2)) is the same construction with a Gaussian-like
// core; its derivatives stay resolvable on coarse grids.
// Constant: pi.

#include <array>
#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lagcal {

class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kMaxExpressionVars = 10;

/// Value plus first partials with respect to every expression variable.
struct Jet {
  double v = 0.0;
  std::array<double, kMaxExpressionVars> d{};

  static Jet constant(double c) { return Jet{c, {}}; }
};

inline Jet operator+(const Jet& a, const Jet& b) {
  Jet r{a.v + b.v, {}};
  for (int i = 0; i < kMaxExpressionVars; ++i) r.d[i] = a.d[i] + b.d[i];
  return r;
}
inline Jet operator-(const Jet& a, const Jet& b) {
  Jet r{a.v - b.v, {}};
  for (int i = 0; i < kMaxExpressionVars; ++i) r.d[i] = a.d[i] - b.d[i];
  return r;
}
inline Jet operator*(const Jet& a, const Jet& b) {
  Jet r{a.v * b.v, {}};
  for (int i = 0; i < kMaxExpressionVars; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  return r;
}
inline Jet operator/(const Jet& a, const Jet& b) {
  Jet r{a.v / b.v, {}};
  const double inv2 = 1.0 / (b.v * b.v);
  for (int i = 0; i < kMaxExpressionVars; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) * inv2;
  return r;
}
// f(a) with f'(a.v) = slope
inline Jet chain(const Jet& a, double value, double slope) {
  Jet r{value, {}};
  for (int i = 0; i < kMaxExpressionVars; ++i) r.d[i] = slope * a.d[i];
  return r;
}

inline constexpr double kGaussBumpSharpness = 8.0;

/// exp(a (1 - 1/(1 - s^2))) on |s| < 1, zero outside.
inline double bump_value(double s, double a = 1.0) {
  const double q = 1.0 - s * s;
  return q > 0.0 ? std::exp(a * (1.0 - 1.0 / q)) : 0.0;
}

namespace detail {

struct Node {
  enum class Kind { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Func } kind;
  double value = 0.0;
  int var = -1;
  std::string func;
  std::unique_ptr<Node> a, b;

  template <class Scalar>
  Scalar eval(std::span<const Scalar> vars) const;
};

inline double apply_func(const std::string& f, double x) {
  if (f == "sin") return std::sin(x);
  if (f == "cos") return std::cos(x);
  if (f == "tan") return std::tan(x);
  if (f == "exp") return std::exp(x);
  if (f == "log") return std::log(x);
  if (f == "sqrt") return std::sqrt(x);
  if (f == "tanh") return std::tanh(x);
  if (f == "gbump") return bump_value(x, kGaussBumpSharpness);
  return bump_value(x);
}

inline Jet apply_func(const std::string& f, const Jet& x) {
  const double v = x.v;
  if (f == "sin") return chain(x, std::sin(v), std::cos(v));
  if (f == "cos") return chain(x, std::cos(v), -std::sin(v));
  if (f == "tan") {
    const double c = std::cos(v);
    return chain(x, std::tan(v), 1.0 / (c * c));
  }
  if (f == "exp") {
    const double e = std::exp(v);
    return chain(x, e, e);
  }
  if (f == "log") return chain(x, std::log(v), 1.0 / v);
  if (f == "sqrt") {
    const double s = std::sqrt(v);
    return chain(x, s, 0.5 / s);
  }
  if (f == "tanh") {
    const double t = std::tanh(v);
    return chain(x, t, 1.0 - t * t);
  }
  const double a = f == "gbump" ? kGaussBumpSharpness : 1.0;
  const double q = 1.0 - v * v;
  if (q <= 0.0) return Jet::constant(0.0);
  const double b = bump_value(v, a);
  return chain(x, b, b * (-2.0 * a * v / (q * q)));
}

inline double pow_of(double a, double b) { return std::pow(a, b); }

inline Jet pow_of(const Jet& a, const Jet& b) {
  bool const_exponent = true;
  for (double di : b.d) const_exponent = const_exponent && di == 0.0;
  if (const_exponent) {
    const double p = b.v;
    if (p == 0.0) return Jet::constant(1.0);
    return chain(a, std::pow(a.v, p), p * std::pow(a.v, p - 1.0));
  }
  // a^b = exp(b log a), a > 0
  const double val = std::pow(a.v, b.v);
  Jet r{val, {}};
  const double la = std::log(a.v);
  for (int i = 0; i < kMaxExpressionVars; ++i) r.d[i] = val * (b.d[i] * la + b.v * a.d[i] / a.v);
  return r;
}

template <class Scalar>
Scalar Node::eval(std::span<const Scalar> vars) const {
  switch (kind) {
    case Kind::Const:
      if constexpr (std::is_same_v<Scalar, double>)
        return value;
      else
        return Jet::constant(value);
    case Kind::Var:
      return vars[var];
    case Kind::Neg: {
      if constexpr (std::is_same_v<Scalar, double>)
        return -a->eval(vars);
      else
        return Jet::constant(0.0) - a->eval(vars);
    }
    case Kind::Add:
      return a->eval(vars) + b->eval(vars);
    case Kind::Sub:
      return a->eval(vars) - b->eval(vars);
    case Kind::Mul:
      return a->eval(vars) * b->eval(vars);
    case Kind::Div:
      return a->eval(vars) / b->eval(vars);
    case Kind::Pow:
      return pow_of(a->eval(vars), b->eval(vars));
    case Kind::Func:
      return apply_func(func, a->eval(vars));
  }
  return Scalar{};
}

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& names) : s_(text), names_(names) {}

  std::unique_ptr<Node> parse() {
    auto n = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("expression '" + std::string(s_) + "': " + what + " at offset " + std::to_string(pos_));
  }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  static std::unique_ptr<Node> make(Node::Kind k, std::unique_ptr<Node> a, std::unique_ptr<Node> b = nullptr) {
    auto n = std::make_unique<Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  std::unique_ptr<Node> expr() {
    auto lhs = term();
    for (;;) {
      if (eat('+'))
        lhs = make(Node::Kind::Add, std::move(lhs), term());
      else if (eat('-'))
        lhs = make(Node::Kind::Sub, std::move(lhs), term());
      else
        return lhs;
    }
  }
  std::unique_ptr<Node> term() {
    auto lhs = unary();
    for (;;) {
      if (eat('*'))
        lhs = make(Node::Kind::Mul, std::move(lhs), unary());
      else if (eat('/'))
        lhs = make(Node::Kind::Div, std::move(lhs), unary());
      else
        return lhs;
    }
  }
  std::unique_ptr<Node> unary() {
    if (eat('-')) return make(Node::Kind::Neg, unary());
    if (eat('+')) return unary();
    return power();
  }
  std::unique_ptr<Node> power() {
    auto base = primary();
    if (eat('^')) return make(Node::Kind::Pow, std::move(base), unary());
    return base;
  }
  std::unique_ptr<Node> primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    if (eat('(')) {
      auto n = expr();
      if (!eat(')')) fail("expected ')'");
      return n;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::string rest(s_.substr(pos_));
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(rest, &used);
      } catch (const std::exception&) {
        fail("malformed number");
      }
      pos_ += used;
      auto n = std::make_unique<Node>();
      n->kind = Node::Kind::Const;
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string name(s_.substr(start, pos_ - start));
      if (eat('(')) {
        static const char* kFuncs[] = {"sin", "cos", "tan", "exp", "log", "sqrt", "tanh", "bump", "gbump"};
        bool known = false;
        for (const char* f : kFuncs) known = known || name == f;
        if (!known) fail("unknown function '" + name + "'");
        auto n = std::make_unique<Node>();
        n->kind = Node::Kind::Func;
        n->func = name;
        n->a = expr();
        if (!eat(')')) fail("expected ')'");
        return n;
      }
      if (name == "pi") {
        auto n = std::make_unique<Node>();
        n->kind = Node::Kind::Const;
        n->value = std::numbers::pi;
        return n;
      }
      for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == name) {
          auto n = std::make_unique<Node>();
          n->kind = Node::Kind::Var;
          n->var = static_cast<int>(i);
          return n;
        }
      }
      fail("unknown variable '" + name + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view s_;
  const std::vector<std::string>& names_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Immutable parsed expression; cheap to copy (shared AST).
class Expression {
 public:
  Expression(std::string_view text, std::vector<std::string> variables)
      : text_(text), variables_(std::move(variables)) {
    if (variables_.size() > kMaxExpressionVars) throw ParseError("too many expression variables");
    root_ = std::shared_ptr<const detail::Node>(detail::Parser(text_, variables_).parse());
  }

  const std::string& text() const { return text_; }
  const std::vector<std::string>& variables() const { return variables_; }

  double operator()(std::span<const double> vars) const { return root_->eval<double>(vars); }

  /// Value and gradient with respect to all variables (grad.size() == variables().size()).
  double value_and_gradient(std::span<const double> vars, std::span<double> grad) const {
    std::array<Jet, kMaxExpressionVars> seeds{};
    for (std::size_t i = 0; i < vars.size(); ++i) {
      seeds[i].v = vars[i];
      seeds[i].d[i] = 1.0;
    }
    const Jet r = root_->eval<Jet>(std::span<const Jet>(seeds.data(), vars.size()));
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = r.d[i];
    return r.v;
  }

 private:
  std::string text_;
  std::vector<std::string> variables_;
  std::shared_ptr<const detail::Node> root_;
};

}  // namespace lagcal
