#include "hesseflat/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <optional>
#include <vector>

namespace hesseflat {

namespace {

bool is_num(const ExprPtr& e, double v) {
  return e->kind == Expr::Kind::Num && e->value == v;
}

bool is_integer(double v) {
  return std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9.0e15;
}

std::optional<double> fold_fun(Expr::Fn f, double x) {
  double r;
  switch (f) {
    case Expr::Fn::Sin: r = std::sin(x); break;
    case Expr::Fn::Cos: r = std::cos(x); break;
    case Expr::Fn::Exp: r = std::exp(x); break;
    case Expr::Fn::Log:
      if (x <= 0) return std::nullopt;
      r = std::log(x);
      break;
    case Expr::Fn::Sqrt:
      if (x < 0) return std::nullopt;
      r = std::sqrt(x);
      break;
    case Expr::Fn::Cosh: r = std::cosh(x); break;
    case Expr::Fn::Sinh: r = std::sinh(x); break;
    case Expr::Fn::Tanh: r = std::tanh(x); break;
    case Expr::Fn::Atan: r = std::atan(x); break;
    default: return std::nullopt;
  }
  if (!std::isfinite(r)) return std::nullopt;
  return r;
}

ExprPtr node(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

}  // namespace

ExprPtr make_num(double v) {
  Expr e;
  e.kind = Expr::Kind::Num;
  e.value = v;
  return node(std::move(e));
}

ExprPtr make_var(Var v) {
  Expr e;
  e.kind = Expr::Kind::Variable;
  e.var = v;
  return node(std::move(e));
}

ExprPtr make_neg(ExprPtr a) {
  if (a->kind == Expr::Kind::Num) return make_num(-a->value);
  if (a->kind == Expr::Kind::Neg) return a->a;
  Expr e;
  e.kind = Expr::Kind::Neg;
  e.a = std::move(a);
  return node(std::move(e));
}

ExprPtr make_add(ExprPtr a, ExprPtr b) {
  if (is_num(a, 0)) return b;
  if (is_num(b, 0)) return a;
  if (a->kind == Expr::Kind::Num && b->kind == Expr::Kind::Num)
    return make_num(a->value + b->value);
  Expr e;
  e.kind = Expr::Kind::Add;
  e.a = std::move(a);
  e.b = std::move(b);
  return node(std::move(e));
}

ExprPtr make_sub(ExprPtr a, ExprPtr b) {
  if (is_num(b, 0)) return a;
  if (is_num(a, 0)) return make_neg(std::move(b));
  if (a->kind == Expr::Kind::Num && b->kind == Expr::Kind::Num)
    return make_num(a->value - b->value);
  Expr e;
  e.kind = Expr::Kind::Sub;
  e.a = std::move(a);
  e.b = std::move(b);
  return node(std::move(e));
}

ExprPtr make_mul(ExprPtr a, ExprPtr b) {
  if (is_num(a, 0) || is_num(b, 0)) return make_num(0);
  if (is_num(a, 1)) return b;
  if (is_num(b, 1)) return a;
  if (a->kind == Expr::Kind::Num && b->kind == Expr::Kind::Num)
    return make_num(a->value * b->value);
  Expr e;
  e.kind = Expr::Kind::Mul;
  e.a = std::move(a);
  e.b = std::move(b);
  return node(std::move(e));
}

ExprPtr make_div(ExprPtr a, ExprPtr b) {
  if (is_num(b, 1)) return a;
  if (a->kind == Expr::Kind::Num && b->kind == Expr::Kind::Num &&
      b->value != 0.0) {
    const double r = a->value / b->value;
    if (std::isfinite(r)) return make_num(r);
  }
  Expr e;
  e.kind = Expr::Kind::Div;
  e.a = std::move(a);
  e.b = std::move(b);
  return node(std::move(e));
}

ExprPtr make_pow(ExprPtr a, ExprPtr b) {
  if (is_num(b, 1)) return a;
  if (is_num(b, 0)) return make_num(1);  // 0^0 = 1 convention
  if (a->kind == Expr::Kind::Num && b->kind == Expr::Kind::Num) {
    const double base = a->value, ex = b->value;
    if (base > 0 || (is_integer(ex) && (base != 0 || ex > 0))) {
      const double r = std::pow(base, ex);
      if (std::isfinite(r)) return make_num(r);
    }
  }
  Expr e;
  e.kind = Expr::Kind::Pow;
  e.a = std::move(a);
  e.b = std::move(b);
  return node(std::move(e));
}

ExprPtr make_fun(Expr::Fn f, ExprPtr a) {
  if (a->kind == Expr::Kind::Num) {
    if (auto r = fold_fun(f, a->value)) return make_num(*r);
  }
  Expr e;
  e.kind = Expr::Kind::Fun;
  e.fn = f;
  e.a = std::move(a);
  return node(std::move(e));
}

// ---------------------------------------------------------------------------
// Lexer + recursive-descent parser
// ---------------------------------------------------------------------------

namespace {

struct Token {
  enum class Kind { Number, Ident, Op, LParen, RParen, End };
  Kind kind;
  std::size_t offset;
  double number = 0.0;
  char op = 0;
  std::string ident;
};

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < s.size() &&
         std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      const std::size_t start = i;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      }
      if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
        if (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
          i = j;
          while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
            ++i;
        }
      }
      Token t;
      t.kind = Token::Kind::Number;
      t.offset = start;
      t.number = std::strtod(std::string(s.substr(start, i - start)).c_str(),
                             nullptr);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = i;
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) ||
                              s[i] == '_'))
        ++i;
      Token t;
      t.kind = Token::Kind::Ident;
      t.offset = start;
      t.ident = std::string(s.substr(start, i - start));
      out.push_back(std::move(t));
      continue;
    }
    Token t;
    t.offset = i;
    switch (c) {
      case '+': case '-': case '*': case '/': case '^':
        t.kind = Token::Kind::Op;
        t.op = c;
        break;
      case '(':
        t.kind = Token::Kind::LParen;
        break;
      case ')':
        t.kind = Token::Kind::RParen;
        break;
      default:
        throw ParseError(i, "syntax error at offset " + std::to_string(i) +
                                ": unexpected character '" + std::string(1, c) +
                                "'");
    }
    out.push_back(std::move(t));
    ++i;
  }
  Token end;
  end.kind = Token::Kind::End;
  end.offset = s.size();
  out.push_back(std::move(end));
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  ExprPtr parse() {
    ExprPtr e = expr();
    if (cur().kind != Token::Kind::End)
      throw ParseError(cur().offset,
                       "syntax error at offset " + std::to_string(cur().offset) +
                           ": expected end of input or a binary operator");
    return e;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  void next() { ++pos_; }

  bool at_op(char c) const {
    return cur().kind == Token::Kind::Op && cur().op == c;
  }

  ExprPtr expr() {
    ExprPtr e = term();
    while (at_op('+') || at_op('-')) {
      const char op = cur().op;
      next();
      ExprPtr r = term();
      e = (op == '+') ? make_add(std::move(e), std::move(r))
                      : make_sub(std::move(e), std::move(r));
    }
    return e;
  }

  ExprPtr term() {
    ExprPtr e = unary();
    while (at_op('*') || at_op('/')) {
      const char op = cur().op;
      next();
      ExprPtr r = unary();
      e = (op == '*') ? make_mul(std::move(e), std::move(r))
                      : make_div(std::move(e), std::move(r));
    }
    return e;
  }

  ExprPtr unary() {
    if (at_op('-')) {
      next();
      return make_neg(unary());
    }
    return power();
  }

  ExprPtr power() {
    ExprPtr base = atom();
    if (at_op('^')) {
      next();
      return make_pow(std::move(base), unary());  // right-associative
    }
    return base;
  }

  ExprPtr atom() {
    const Token& t = cur();
    switch (t.kind) {
      case Token::Kind::Number: {
        const double v = t.number;
        next();
        return make_num(v);
      }
      case Token::Kind::Ident: {
        const std::string name = t.ident;
        const std::size_t off = t.offset;
        next();
        if (cur().kind == Token::Kind::LParen) {
          Expr::Fn fn;
          if (name == "sin") fn = Expr::Fn::Sin;
          else if (name == "cos") fn = Expr::Fn::Cos;
          else if (name == "exp") fn = Expr::Fn::Exp;
          else if (name == "log") fn = Expr::Fn::Log;
          else if (name == "sqrt") fn = Expr::Fn::Sqrt;
          else if (name == "cosh") fn = Expr::Fn::Cosh;
          else if (name == "sinh") fn = Expr::Fn::Sinh;
          else if (name == "tanh") fn = Expr::Fn::Tanh;
          else if (name == "atan") fn = Expr::Fn::Atan;
          else
            throw ParseError(off, "unknown function '" + name + "' at offset " +
                                      std::to_string(off));
          next();  // '('
          ExprPtr arg = expr();
          if (cur().kind != Token::Kind::RParen)
            throw ParseError(cur().offset,
                             "syntax error at offset " +
                                 std::to_string(cur().offset) + ": expected ')'");
          next();
          return make_fun(fn, std::move(arg));
        }
        if (name == "x") return make_var(Var::X);
        if (name == "y") return make_var(Var::Y);
        if (name == "u") return make_var(Var::U);
        throw ParseError(off, "unknown identifier '" + name + "' at offset " +
                                  std::to_string(off));
      }
      case Token::Kind::LParen: {
        next();
        ExprPtr e = expr();
        if (cur().kind != Token::Kind::RParen)
          throw ParseError(cur().offset, "syntax error at offset " +
                                             std::to_string(cur().offset) +
                                             ": expected ')'");
        next();
        return e;
      }
      default:
        throw ParseError(t.offset, "syntax error at offset " +
                                       std::to_string(t.offset) +
                                       ": expected an operand");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

ExprPtr parse_expression(std::string_view source) {
  return Parser(lex(source)).parse();
}

// ---------------------------------------------------------------------------
// Printing (exact: parse(to_string(e)) == e node for node)
// ---------------------------------------------------------------------------

namespace {

int prec(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Add:
    case Expr::Kind::Sub: return 1;
    case Expr::Kind::Mul:
    case Expr::Kind::Div: return 2;
    case Expr::Kind::Neg: return 3;
    case Expr::Kind::Pow: return 4;
    default: return 5;
  }
}

const char* fn_name(Expr::Fn f) {
  switch (f) {
    case Expr::Fn::Sin: return "sin";
    case Expr::Fn::Cos: return "cos";
    case Expr::Fn::Exp: return "exp";
    case Expr::Fn::Log: return "log";
    case Expr::Fn::Sqrt: return "sqrt";
    case Expr::Fn::Cosh: return "cosh";
    case Expr::Fn::Sinh: return "sinh";
    case Expr::Fn::Tanh: return "tanh";
    case Expr::Fn::Atan: return "atan";
  }
  return "?";
}

std::string num_to_string(double v) {
  if (v < 0) return "(-" + num_to_string(-v) + ")";
  if (is_integer(v) && std::abs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", v);
    return buf;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print(const ExprPtr& e, std::string& out) {
  auto child = [&](const ExprPtr& c, bool parens) {
    if (parens) out += '(';
    print(c, out);
    if (parens) out += ')';
  };
  switch (e->kind) {
    case Expr::Kind::Num:
      out += num_to_string(e->value);
      break;
    case Expr::Kind::Variable:
      out += (e->var == Var::X) ? "x" : (e->var == Var::Y) ? "y" : "u";
      break;
    case Expr::Kind::Neg:
      // unary minus binds looser than ^ and tighter than * : "-x^2" is exact,
      // but "-(x*y)" and "-(x+y)" need parens to reparse to the same tree.
      out += '-';
      child(e->a, prec(*e->a) < 3);
      break;
    case Expr::Kind::Add:
      child(e->a, prec(*e->a) < 1);
      out += " + ";
      child(e->b, prec(*e->b) <= 1);
      break;
    case Expr::Kind::Sub:
      child(e->a, prec(*e->a) < 1);
      out += " - ";
      child(e->b, prec(*e->b) <= 1);
      break;
    case Expr::Kind::Mul:
      child(e->a, prec(*e->a) < 2);
      out += "*";
      child(e->b, prec(*e->b) <= 2);
      break;
    case Expr::Kind::Div:
      child(e->a, prec(*e->a) < 2);
      out += "/";
      child(e->b, prec(*e->b) <= 2);
      break;
    case Expr::Kind::Pow:
      child(e->a, prec(*e->a) < 5);   // any compound base needs parens
      out += "^";
      child(e->b, prec(*e->b) < 3);   // exponent parses as unary
      break;
    case Expr::Kind::Fun:
      out += fn_name(e->fn);
      out += '(';
      print(e->a, out);
      out += ')';
      break;
  }
}

}  // namespace

std::string to_string(const ExprPtr& e) {
  std::string out;
  print(e, out);
  return out;
}

bool equal(const ExprPtr& a, const ExprPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Expr::Kind::Num:
      return a->value == b->value ||
             (std::isnan(a->value) && std::isnan(b->value));
    case Expr::Kind::Variable: return a->var == b->var;
    case Expr::Kind::Neg: return equal(a->a, b->a);
    case Expr::Kind::Fun: return a->fn == b->fn && equal(a->a, b->a);
    default: return equal(a->a, b->a) && equal(a->b, b->b);
  }
}

// ---------------------------------------------------------------------------
// Differentiation
// ---------------------------------------------------------------------------

ExprPtr differentiate(const ExprPtr& e, Var v) {
  switch (e->kind) {
    case Expr::Kind::Num:
      return make_num(0);
    case Expr::Kind::Variable:
      return make_num(e->var == v ? 1 : 0);
    case Expr::Kind::Neg:
      return make_neg(differentiate(e->a, v));
    case Expr::Kind::Add:
      return make_add(differentiate(e->a, v), differentiate(e->b, v));
    case Expr::Kind::Sub:
      return make_sub(differentiate(e->a, v), differentiate(e->b, v));
    case Expr::Kind::Mul:
      return make_add(make_mul(differentiate(e->a, v), e->b),
                      make_mul(e->a, differentiate(e->b, v)));
    case Expr::Kind::Div:
      return make_div(make_sub(make_mul(differentiate(e->a, v), e->b),
                               make_mul(e->a, differentiate(e->b, v))),
                      make_mul(e->b, e->b));
    case Expr::Kind::Pow: {
      const ExprPtr& base = e->a;
      const ExprPtr& ex = e->b;
      if (ex->kind == Expr::Kind::Num) {
        // d(a^c) = c a^{c-1} a'
        return make_mul(make_mul(make_num(ex->value),
                                 make_pow(base, make_num(ex->value - 1.0))),
                        differentiate(base, v));
      }
      // general case: a^b (b' log a + b a'/a)
      return make_mul(
          e, make_add(make_mul(differentiate(ex, v), make_fun(Expr::Fn::Log, base)),
                      make_div(make_mul(ex, differentiate(base, v)), base)));
    }
    case Expr::Kind::Fun: {
      const ExprPtr da = differentiate(e->a, v);
      switch (e->fn) {
        case Expr::Fn::Sin:
          return make_mul(make_fun(Expr::Fn::Cos, e->a), da);
        case Expr::Fn::Cos:
          return make_neg(make_mul(make_fun(Expr::Fn::Sin, e->a), da));
        case Expr::Fn::Exp:
          return make_mul(e, da);
        case Expr::Fn::Log:
          return make_div(da, e->a);
        case Expr::Fn::Sqrt:
          return make_div(da, make_mul(make_num(2), e));
        case Expr::Fn::Cosh:
          return make_mul(make_fun(Expr::Fn::Sinh, e->a), da);
        case Expr::Fn::Sinh:
          return make_mul(make_fun(Expr::Fn::Cosh, e->a), da);
        case Expr::Fn::Tanh:
          return make_mul(make_sub(make_num(1), make_mul(e, e)), da);
        case Expr::Fn::Atan:
          return make_div(da, make_add(make_num(1), make_mul(e->a, e->a)));
      }
      return make_num(0);
    }
  }
  return make_num(0);
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void domain_error(const ExprPtr& e, double x, double y, double u,
                               const std::string& reason) {
  char pt[96];
  std::snprintf(pt, sizeof pt, "(%g, %g, %g)", x, y, u);
  throw EvalDomainError(to_string(e), x, y, u,
                        "domain error: " + reason + " in '" + to_string(e) +
                            "' at " + pt);
}

}  // namespace

double evaluate(const ExprPtr& e, double x, double y, double u) {
  switch (e->kind) {
    case Expr::Kind::Num:
      return e->value;
    case Expr::Kind::Variable:
      return e->var == Var::X ? x : (e->var == Var::Y ? y : u);
    case Expr::Kind::Neg:
      return -evaluate(e->a, x, y, u);
    case Expr::Kind::Add:
      return evaluate(e->a, x, y, u) + evaluate(e->b, x, y, u);
    case Expr::Kind::Sub:
      return evaluate(e->a, x, y, u) - evaluate(e->b, x, y, u);
    case Expr::Kind::Mul:
      return evaluate(e->a, x, y, u) * evaluate(e->b, x, y, u);
    case Expr::Kind::Div: {
      const double num = evaluate(e->a, x, y, u);
      const double den = evaluate(e->b, x, y, u);
      if (den == 0.0) domain_error(e, x, y, u, "division by zero");
      return num / den;
    }
    case Expr::Kind::Pow: {
      const double base = evaluate(e->a, x, y, u);
      const double ex = evaluate(e->b, x, y, u);
      if (is_integer(ex)) {
        if (base == 0.0 && ex < 0)
          domain_error(e, x, y, u, "zero raised to a negative power");
        return std::pow(base, ex);
      }
      if (base <= 0.0)
        domain_error(e, x, y, u,
                     "non-integer power of a non-positive base");
      return std::pow(base, ex);
    }
    case Expr::Kind::Fun: {
      const double a = evaluate(e->a, x, y, u);
      switch (e->fn) {
        case Expr::Fn::Sin: return std::sin(a);
        case Expr::Fn::Cos: return std::cos(a);
        case Expr::Fn::Exp: return std::exp(a);
        case Expr::Fn::Log:
          if (a <= 0) domain_error(e, x, y, u, "log of non-positive argument");
          return std::log(a);
        case Expr::Fn::Sqrt:
          if (a < 0) domain_error(e, x, y, u, "sqrt of negative argument");
          return std::sqrt(a);
        case Expr::Fn::Cosh: return std::cosh(a);
        case Expr::Fn::Sinh: return std::sinh(a);
        case Expr::Fn::Tanh: return std::tanh(a);
        case Expr::Fn::Atan: return std::atan(a);
      }
      return 0;
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------

CompiledPotential::CompiledPotential(ExprPtr f) {
  d_[0][0] = std::move(f);
  d_[1][0] = differentiate(d_[0][0], Var::X);
  d_[0][1] = differentiate(d_[0][0], Var::Y);
  d_[2][0] = differentiate(d_[1][0], Var::X);
  d_[1][1] = differentiate(d_[1][0], Var::Y);
  d_[0][2] = differentiate(d_[0][1], Var::Y);
  d_[3][0] = differentiate(d_[2][0], Var::X);
  d_[2][1] = differentiate(d_[2][0], Var::Y);
  d_[1][2] = differentiate(d_[1][1], Var::Y);
  d_[0][3] = differentiate(d_[0][2], Var::Y);
}

const ExprPtr& CompiledPotential::deriv(int ix, int iy) const {
  return d_[ix][iy];
}

DiffBundle CompiledPotential::bundle(double x, double y) const {
  DiffBundle b;
  b.f = evaluate(d_[0][0], x, y);
  b.fx = evaluate(d_[1][0], x, y);
  b.fy = evaluate(d_[0][1], x, y);
  b.fxx = evaluate(d_[2][0], x, y);
  b.fxy = evaluate(d_[1][1], x, y);
  b.fyy = evaluate(d_[0][2], x, y);
  b.fxxx = evaluate(d_[3][0], x, y);
  b.fxxy = evaluate(d_[2][1], x, y);
  b.fxyy = evaluate(d_[1][2], x, y);
  b.fyyy = evaluate(d_[0][3], x, y);
  return b;
}

}  // namespace hesseflat
