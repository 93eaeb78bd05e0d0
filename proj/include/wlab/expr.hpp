#pragma once

// Small arithmetic expression language for fields given in configs:
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := ('+'|'-') unary | power
//   power  := atom ('^' unary)?
//   atom   := number | name | name '(' expr ')' | '(' expr ')'
// Names: x1 x2 x3, pi, e; functions sin cos tan exp log sqrt abs tanh.

#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace wlab {

class ExprError : public std::invalid_argument {
 public:
  ExprError(const std::string& msg, std::size_t pos)
      : std::invalid_argument(msg + " at column " + std::to_string(pos + 1)), position(pos) {}
  std::size_t position;
};

class Expression {
 public:
  Expression() : Expression("0") {}
  explicit Expression(std::string text) : text_(std::move(text)) {
    pos_ = 0;
    root_ = parse_expr();
    skip_space();
    if (pos_ != text_.size()) throw ExprError("unexpected '" + std::string(1, text_[pos_]) + "'", pos_);
  }

  double operator()(const std::array<double, 3>& x) const { return eval(*root_, x); }
  const std::string& text() const { return text_; }

  /// True when the expression never reads a coordinate.
  bool is_constant() const { return !uses_coords(*root_); }

 private:
  enum class Kind { number, coord, neg, add, sub, mul, div, pow, call };
  enum class Fn { sin, cos, tan, exp, log, sqrt, abs, tanh };
  struct Node {
    Kind kind;
    double value = 0.0;
    int coord = 0;
    Fn fn = Fn::sin;
    std::unique_ptr<Node> lhs, rhs;
  };
  using Ptr = std::unique_ptr<Node>;

  static Ptr make(Kind k, Ptr l = nullptr, Ptr r = nullptr) {
    auto n = std::make_unique<Node>();
    n->kind = k;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Ptr parse_expr() {
    Ptr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = make(Kind::add, std::move(lhs), parse_term());
      } else if (accept('-')) {
        lhs = make(Kind::sub, std::move(lhs), parse_term());
      } else {
        return lhs;
      }
    }
  }
  Ptr parse_term() {
    Ptr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Kind::mul, std::move(lhs), parse_unary());
      } else if (accept('/')) {
        lhs = make(Kind::div, std::move(lhs), parse_unary());
      } else {
        return lhs;
      }
    }
  }
  Ptr parse_unary() {
    if (accept('-')) return make(Kind::neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }
  Ptr parse_power() {
    Ptr base = parse_atom();
    if (accept('^')) return make(Kind::pow, std::move(base), parse_unary());
    return base;
  }
  Ptr parse_atom() {
    skip_space();
    if (pos_ >= text_.size()) throw ExprError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (accept('(')) {
      Ptr inner = parse_expr();
      if (!accept(')')) throw ExprError("expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = text_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) throw ExprError("malformed number", pos_);
      pos_ += static_cast<std::size_t>(end - begin);
      auto n = make(Kind::number);
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
      const std::string name = text_.substr(start, pos_ - start);
      if (accept('(')) {
        auto n = make(Kind::call, parse_expr());
        if (!accept(')')) throw ExprError("expected ')' after argument of " + name, pos_);
        n->fn = function_named(name, start);
        return n;
      }
      if (name == "x1" || name == "x2" || name == "x3") {
        auto n = make(Kind::coord);
        n->coord = name[1] - '1';
        return n;
      }
      auto n = make(Kind::number);
      if (name == "pi") {
        n->value = std::numbers::pi;
      } else if (name == "e") {
        n->value = std::numbers::e;
      } else {
        throw ExprError("unknown name '" + name + "'", start);
      }
      return n;
    }
    throw ExprError("unexpected '" + std::string(1, c) + "'", pos_);
  }

  static Fn function_named(const std::string& name, std::size_t pos) {
    if (name == "sin") return Fn::sin;
    if (name == "cos") return Fn::cos;
    if (name == "tan") return Fn::tan;
    if (name == "exp") return Fn::exp;
    if (name == "log") return Fn::log;
    if (name == "sqrt") return Fn::sqrt;
    if (name == "abs") return Fn::abs;
    if (name == "tanh") return Fn::tanh;
    throw ExprError("unknown function '" + name + "'", pos);
  }

  static double eval(const Node& n, const std::array<double, 3>& x) {
    switch (n.kind) {
      case Kind::number: return n.value;
      case Kind::coord: return x[static_cast<std::size_t>(n.coord)];
      case Kind::neg: return -eval(*n.lhs, x);
      case Kind::add: return eval(*n.lhs, x) + eval(*n.rhs, x);
      case Kind::sub: return eval(*n.lhs, x) - eval(*n.rhs, x);
      case Kind::mul: return eval(*n.lhs, x) * eval(*n.rhs, x);
      case Kind::div: return eval(*n.lhs, x) / eval(*n.rhs, x);
      case Kind::pow: return std::pow(eval(*n.lhs, x), eval(*n.rhs, x));
      case Kind::call: {
        const double a = eval(*n.lhs, x);
        switch (n.fn) {
          case Fn::sin: return std::sin(a);
          case Fn::cos: return std::cos(a);
          case Fn::tan: return std::tan(a);
          case Fn::exp: return std::exp(a);
          case Fn::log: return std::log(a);
          case Fn::sqrt: return std::sqrt(a);
          case Fn::abs: return std::abs(a);
          case Fn::tanh: return std::tanh(a);
        }
      }
    }
    return 0.0;
  }

  static bool uses_coords(const Node& n) {
    if (n.kind == Kind::coord) return true;
    return (n.lhs && uses_coords(*n.lhs)) || (n.rhs && uses_coords(*n.rhs));
  }

  std::string text_;
  std::size_t pos_ = 0;
  std::shared_ptr<const Node> root_;
};

}  // namespace wlab
