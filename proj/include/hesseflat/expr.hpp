#pragma once

#include <array>
#include <memory>
#include <string>
#include <string_view>

#include "hesseflat/errors.hpp"

namespace hesseflat {

enum class Var : int { X = 0, Y = 1, U = 2 };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable expression tree over variables {x, y, u}, numeric literals,
/// binary + - * / ^, unary negation and the functions
/// {sin, cos, exp, log, sqrt, cosh, sinh, tanh, atan}.
struct Expr {
  enum class Kind { Num, Variable, Neg, Add, Sub, Mul, Div, Pow, Fun };
  enum class Fn { Sin, Cos, Exp, Log, Sqrt, Cosh, Sinh, Tanh, Atan };

  Kind kind;
  double value = 0.0;  // Num
  Var var = Var::X;    // Variable
  Fn fn = Fn::Sin;     // Fun
  ExprPtr a, b;        // operands
};

// Smart constructors; all perform constant folding (and the identity folds
// 0+e, e*1, e^1, ... so derivatives never contain `0 * t` subtrees).
ExprPtr make_num(double v);
ExprPtr make_var(Var v);
ExprPtr make_neg(ExprPtr a);
ExprPtr make_add(ExprPtr a, ExprPtr b);
ExprPtr make_sub(ExprPtr a, ExprPtr b);
ExprPtr make_mul(ExprPtr a, ExprPtr b);
ExprPtr make_div(ExprPtr a, ExprPtr b);
ExprPtr make_pow(ExprPtr a, ExprPtr b);
ExprPtr make_fun(Expr::Fn f, ExprPtr a);

/// Parses the fixed grammar (precedence ^ > unary - > */ > +-, with ^
/// right-associative and no implicit multiplication).
/// Throws ParseError with a 0-based character offset.
ExprPtr parse_expression(std::string_view source);

/// Exact printer: parse_expression(to_string(e)) reproduces `e` node for node.
std::string to_string(const ExprPtr& e);

/// Structural equality.
bool equal(const ExprPtr& a, const ExprPtr& b);

/// Exact symbolic derivative with respect to `v`; total on valid expressions.
ExprPtr differentiate(const ExprPtr& e, Var v);

/// Evaluates at (x, y, u). Throws EvalDomainError naming the offending
/// subexpression and the point for log/sqrt/\^ domain violations and division
/// by zero.
double evaluate(const ExprPtr& e, double x, double y, double u = 0.0);

/// Value and all partial derivatives of f(x, y) through order 3; mixed
/// partials are stored once per multi-index.
struct DiffBundle {
  double f, fx, fy, fxx, fxy, fyy, fxxx, fxxy, fxyy, fyyy;
};

/// Potential with precomputed symbolic derivative trees up to order 3.
class CompiledPotential {
 public:
  explicit CompiledPotential(ExprPtr f);
  DiffBundle bundle(double x, double y) const;
  /// Derivative tree d^{ix+iy} f / dx^{ix} dy^{iy}, ix + iy <= 3.
  const ExprPtr& deriv(int ix, int iy) const;
  const ExprPtr& root() const { return d_[0][0]; }

 private:
  std::array<std::array<ExprPtr, 4>, 4> d_{};  // d_[ix][iy]
};

}  // namespace hesseflat
