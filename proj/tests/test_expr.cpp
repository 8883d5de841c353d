#include <doctest.h>

#include <cmath>
#include <random>

#include "hesseflat/expr.hpp"

using namespace hesseflat;

TEST_CASE("parses the half-plane potential with + at the root") {
  const auto e = parse_expression("x^2/(2*y) + y*log(y)/4");
  CHECK(e->kind == Expr::Kind::Add);
  CHECK(evaluate(e, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("parses a single-variable leaf") {
  const auto e = parse_expression("x");
  CHECK(e->kind == Expr::Kind::Variable);
  CHECK(e->var == Var::X);
}

TEST_CASE("reports syntax errors with 0-based offsets") {
  CHECK_THROWS_WITH_AS(parse_expression("x + * y"),
                       "syntax error at offset 4: expected an operand",
                       ParseError);
  try {
    parse_expression("x + * y");
  } catch (const ParseError& e) {
    CHECK(e.offset == 4);
  }
  CHECK_THROWS_AS(parse_expression("2x"), ParseError);  // no implicit product
  try {
    parse_expression("2x");
  } catch (const ParseError& e) {
    CHECK(e.offset == 1);
  }
  CHECK_THROWS_AS(parse_expression("sin(z)"), ParseError);   // unknown identifier
  CHECK_THROWS_AS(parse_expression("foo(x)"), ParseError);   // unknown function
  CHECK_THROWS_AS(parse_expression("(x + y"), ParseError);   // missing paren
}

TEST_CASE("precedence: ^ above unary minus above product") {
  CHECK(evaluate(parse_expression("-x^2"), 3.0, 0.0) == -9.0);
  CHECK(evaluate(parse_expression("(-x)^2"), 3.0, 0.0) == 9.0);
  CHECK(evaluate(parse_expression("2^3^2"), 0.0, 0.0) == 512.0);  // right-assoc
  CHECK(evaluate(parse_expression("x^-2"), 2.0, 0.0) == 0.25);
  CHECK(evaluate(parse_expression("-x*y"), 2.0, 5.0) == -10.0);
  CHECK(evaluate(parse_expression("6/3/2"), 0.0, 0.0) == 1.0);  // left-assoc
}

TEST_CASE("polynomial differentiation: d/dx then d/dy of x^2 y^2 is 4xy") {
  const auto e = parse_expression("x^2*y^2");
  const auto exy = differentiate(differentiate(e, Var::X), Var::Y);
  CHECK(evaluate(exy, 2.0, 3.0) == doctest::Approx(24.0).epsilon(1e-15));
  CHECK(evaluate(exy, -1.5, 0.5) == doctest::Approx(-3.0).epsilon(1e-15));
}

TEST_CASE("derivative of a constant folds to the zero literal") {
  const auto d = differentiate(parse_expression("7"), Var::X);
  CHECK(d->kind == Expr::Kind::Num);
  CHECK(d->value == 0.0);
}

TEST_CASE("d/dy of x^2/(2y) matches -x^2/(2y^2)") {
  const auto e = parse_expression("x^2/(2*y)");
  const auto dy = differentiate(e, Var::Y);
  for (double x : {0.5, 1.0, 2.0})
    for (double y : {0.5, 1.0, 1.7})
      CHECK(evaluate(dy, x, y) ==
            doctest::Approx(-x * x / (2 * y * y)).epsilon(1e-14));
  // and the displayed mixed coefficient f_xy = -x/y^2
  const auto dxy = differentiate(dy, Var::X);
  CHECK(evaluate(dxy, 1.0, 1.0) == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("eval_bundle on the half-plane potential at (1,1)") {
  CompiledPotential pot(parse_expression("x^2/(2*y) + y*log(y)/4"));
  const DiffBundle b = pot.bundle(1.0, 1.0);
  CHECK(b.fxx == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(b.fxy == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(b.fyy == doctest::Approx(1.25).epsilon(1e-14));
}

TEST_CASE("eval_bundle on x^2 + y^2") {
  CompiledPotential pot(parse_expression("x^2 + y^2"));
  for (double x : {-1.3, 0.0, 2.4}) {
    const DiffBundle b = pot.bundle(x, 0.7);
    CHECK(b.fxx == 2.0);
    CHECK(b.fyy == 2.0);
    CHECK(b.fxy == 0.0);
    CHECK(b.fxxx == 0.0);
  }
}

TEST_CASE("domain errors name the subexpression and the point") {
  const auto e = parse_expression("log(y)");
  CHECK_THROWS_AS(evaluate(e, 0.0, -1.0), EvalDomainError);
  try {
    evaluate(e, 0.0, -1.0);
  } catch (const EvalDomainError& err) {
    CHECK(err.subexpr == "log(y)");
    CHECK(err.y == -1.0);
    CHECK(std::string(err.what()).find("log of non-positive argument") !=
          std::string::npos);
  }
  CHECK_THROWS_AS(evaluate(parse_expression("1/x"), 0.0, 0.0), EvalDomainError);
  CHECK_THROWS_AS(evaluate(parse_expression("x^0.5"), -2.0, 0.0), EvalDomainError);
  CHECK_NOTHROW(evaluate(parse_expression("x^2"), -2.0, 0.0));  // integer power
  CHECK_THROWS_AS(evaluate(parse_expression("sqrt(x)"), -1.0, 0.0), EvalDomainError);
}

namespace {

// random polynomial of degree <= 5 in x and y
ExprPtr random_poly(std::mt19937& rng) {
  std::uniform_real_distribution<double> coeff(-3.0, 3.0);
  std::uniform_int_distribution<int> deg(0, 5);
  ExprPtr sum = make_num(0);
  for (int term = 0; term < 6; ++term) {
    const int dx = deg(rng), dy = deg(rng) % (6 - dx == 0 ? 1 : 6 - dx);
    ExprPtr t = make_num(coeff(rng));
    t = make_mul(t, make_pow(make_var(Var::X), make_num(dx)));
    t = make_mul(t, make_pow(make_var(Var::Y), make_num(dy)));
    sum = make_add(sum, t);
  }
  return sum;
}

double central4(const ExprPtr& e, double x, double y, bool wrt_x) {
  const double coord = wrt_x ? x : y;
  const double h = 1e-3 * (1.0 + std::abs(coord));
  auto at = [&](double s) {
    return wrt_x ? evaluate(e, x + s, y) : evaluate(e, x, y + s);
  };
  return (at(-2 * h) - 8 * at(-h) + 8 * at(h) - at(2 * h)) / (12 * h);
}

}  // namespace

TEST_CASE("symbolic derivatives of random polynomials match finite differences") {
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> pt(-1.5, 1.5);
  for (int trial = 0; trial < 40; ++trial) {
    const auto e = random_poly(rng);
    const auto ex = differentiate(e, Var::X);
    const auto ey = differentiate(e, Var::Y);
    const double x = pt(rng), y = pt(rng);
    const double fd_x = central4(e, x, y, true);
    const double fd_y = central4(e, x, y, false);
    const double sx = evaluate(ex, x, y), sy = evaluate(ey, x, y);
    const double scale = std::max({1.0, std::abs(sx), std::abs(sy)});
    CHECK(std::abs(sx - fd_x) / scale < 1e-6);
    CHECK(std::abs(sy - fd_y) / scale < 1e-6);
  }
}

TEST_CASE("mixed partials commute") {
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> pt(0.2, 1.5);
  const char* sources[] = {
      "sin(x*y) + exp(x - y)", "x^2/(2*y) + y*log(y)/4", "cosh(x)*tanh(y) + atan(x*y)",
      "sqrt(x^2 + y^2 + 1)*exp(x/2)"};
  for (const char* src : sources) {
    const auto e = parse_expression(src);
    const auto dxy = differentiate(differentiate(e, Var::X), Var::Y);
    const auto dyx = differentiate(differentiate(e, Var::Y), Var::X);
    for (int i = 0; i < 10; ++i) {
      const double x = pt(rng), y = pt(rng);
      const double a = evaluate(dxy, x, y), b = evaluate(dyx, x, y);
      CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
    }
  }
}

TEST_CASE("parse-print-parse is idempotent on the tree") {
  std::mt19937 rng(424242);
  for (int trial = 0; trial < 60; ++trial) {
    const auto e = random_poly(rng);
    const auto once = parse_expression(to_string(e));
    const auto twice = parse_expression(to_string(once));
    CHECK(equal(once, twice));
  }
  // and on some handwritten trees with every operator
  for (const char* src :
       {"x^2/(2*y) + y*log(y)/4", "-x^2", "(-x)^2", "x - -y", "x^-2",
        "1/2 + u^2/8", "sin(cos(exp(x))) - tanh(x*y)/atan(2)",
        "x*(y*u)", "x - (y - u)", "(x + y)^3"}) {
    const auto a = parse_expression(src);
    const auto b = parse_expression(to_string(a));
    CHECK(equal(a, b));
    CHECK(to_string(a) == to_string(b));
  }
}

TEST_CASE("no 0*t subtrees survive differentiation") {
  // d/dx of 7*y is exactly the zero literal, not 0*y
  const auto d = differentiate(parse_expression("7*y"), Var::X);
  CHECK(d->kind == Expr::Kind::Num);
  CHECK(d->value == 0.0);
  // d/du of a u-free expression likewise
  const auto d2 = differentiate(parse_expression("x^3 + sin(y)"), Var::U);
  CHECK(d2->kind == Expr::Kind::Num);
}
