#include <doctest.h>

#include <cmath>
#include <random>

#include "hesseflat/catalog.hpp"
#include "hesseflat/geometry.hpp"

using namespace hesseflat;
using namespace hesseflat::geometry;

namespace {

GradField grad_of(const char* src) {
  auto pot = std::make_shared<CompiledPotential>(parse_expression(src));
  return [pot](double x, double y) {
    return Gradient{evaluate(pot->deriv(1, 0), x, y),
                    evaluate(pot->deriv(0, 1), x, y)};
  };
}

std::shared_ptr<ClosedFormField> field_of(const char* src, Domain2D d) {
  return std::make_shared<ClosedFormField>(parse_expression(src), d);
}

}  // namespace

TEST_CASE("poisson bracket normalization {x,y} = 1") {
  const auto a = grad_of("x"), b = grad_of("y");
  CHECK(poisson_bracket(a, b, 0.3, -0.7) == 1.0);
  CHECK(poisson_bracket(a, a, 0.3, -0.7) == 0.0);  // antisymmetry diagonal
  const auto c = grad_of("x^2"), d = grad_of("y^2");
  CHECK(poisson_bracket(c, d, 1.0, 2.0) == doctest::Approx(8.0).epsilon(1e-15));
}

TEST_CASE("poisson bracket antisymmetry on random fields") {
  const auto a = grad_of("sin(x*y) + x^2"), b = grad_of("exp(x - y) + y^3");
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> pt(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const double x = pt(rng), y = pt(rng);
    CHECK(poisson_bracket(a, b, x, y) == -poisson_bracket(b, a, x, y));
  }
}

TEST_CASE("curvature of a constant-Hessian potential vanishes") {
  const auto f = field_of("(x^2 + y^2)/2", {-2, 2, -2, 2});
  CHECK(hessian_curvature(*f, 0.3, 0.4) == 0.0);
  CHECK(flatness_residual(*f, 0.3, 0.4) == 0.0);
}

TEST_CASE("half-plane potential is flat at (1,1)") {
  const auto f = field_of("x^2/(2*y) + y*log(y)/4", {-1, 1, 0.5, 2});
  CHECK(std::abs(hessian_curvature(*f, 1.0, 1.0)) < 1e-12);
}

TEST_CASE("non-flat control: K(0.5,0.5) = 16/110.25") {
  const auto f = field_of("x^2 + y^2 + x^2*y^2", {-0.8, 0.8, -0.8, 0.8});
  const double K = hessian_curvature(*f, 0.5, 0.5);
  CHECK(K == doctest::Approx(16.0 / 110.25).epsilon(1e-12));
  CHECK(flatness_residual(*f, 0.5, 0.5) == doctest::Approx(-16.0).epsilon(1e-12));
}

TEST_CASE("indefinite Hessians are rejected with trace and det") {
  const auto f = field_of("x^2 - y^2", {-1, 1, -1, 1});
  CHECK_THROWS_AS(hessian_curvature(*f, 0.2, 0.2), NotPositiveDefinite);
  try {
    hessian_curvature(*f, 0.2, 0.2);
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.trace == doctest::Approx(0.0));
    CHECK(e.det == doctest::Approx(-4.0));
  }
}

TEST_CASE("Brioschi oracle: Euclidean and polar-form metrics are flat") {
  const auto one = parse_expression("1");
  const auto zero = parse_expression("0");
  const auto eucl = MetricTriple::from_exprs(one, zero, one, {-1, 1, -1, 1});
  CHECK(brioschi_oracle(eucl, 0.1, 0.2) == doctest::Approx(0.0).epsilon(1e-15));

  const auto polar = MetricTriple::from_exprs(
      parse_expression("1"), parse_expression("0"), parse_expression("x^2"),
      {0.5, 2.0, -1, 1});
  CHECK(std::abs(brioschi_oracle(polar, 1.3, 0.0)) < 1e-12);
}

TEST_CASE("Brioschi oracle agrees with the Hessian curvature formula") {
  // symbolic second-derivative triple of the non-flat control
  CompiledPotential pot(parse_expression("x^2 + y^2 + x^2*y^2"));
  const auto triple = MetricTriple::from_potential(pot, {-0.8, 0.8, -0.8, 0.8});
  const auto f = field_of("x^2 + y^2 + x^2*y^2", {-0.8, 0.8, -0.8, 0.8});
  const double kb = brioschi_oracle(triple, 0.5, 0.5);
  const double kh = hessian_curvature(*f, 0.5, 0.5);
  CHECK(std::abs(kb - kh) < 1e-6);

  // and through value-only components with finite-difference jets
  const auto fd = MetricTriple::from_functions(
      [&](double x, double y) { return pot.bundle(x, y).fxx; },
      [&](double x, double y) { return pot.bundle(x, y).fxy; },
      [&](double x, double y) { return pot.bundle(x, y).fyy; }, 1e-4,
      {-0.8, 0.8, -0.8, 0.8});
  CHECK(std::abs(brioschi_oracle(fd, 0.5, 0.5) - kh) < 1e-5);
}

TEST_CASE("oracle agreement on random smooth positive-definite fixtures") {
  // c0 (x^2+y^2) + smooth perturbations keep the Hessian positive definite
  const char* sources[] = {
      "2*(x^2 + y^2) + 0.2*sin(x)*cos(y)",
      "x^2 + y^2 + 0.1*exp(x/2)*cos(y)",
      "3*x^2 + 2*y^2 + 0.3*cosh(x/2) + 0.2*x*y",
  };
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> pt(-0.6, 0.6);
  for (const char* src : sources) {
    CompiledPotential pot(parse_expression(src));
    const auto f = field_of(src, {-1, 1, -1, 1});
    const auto fd = MetricTriple::from_functions(
        [&](double x, double y) { return pot.bundle(x, y).fxx; },
        [&](double x, double y) { return pot.bundle(x, y).fxy; },
        [&](double x, double y) { return pot.bundle(x, y).fyy; }, 1e-4,
        {-1, 1, -1, 1});
    for (int i = 0; i < 8; ++i) {
      const double x = pt(rng), y = pt(rng);
      CHECK(std::abs(hessian_curvature(*f, x, y) - brioschi_oracle(fd, x, y)) <
            1e-5);
    }
  }
}

TEST_CASE("numerator equivalence on random quartic potentials") {
  std::mt19937 rng(555);
  std::uniform_real_distribution<double> coeff(-0.2, 0.2), pt(-0.5, 0.5);
  for (int trial = 0; trial < 25; ++trial) {
    // PD base plus a small random quartic
    std::string src = "x^2 + y^2";
    const char* monos[] = {"x^3", "x^2*y", "x*y^2", "y^3", "x^4", "x^2*y^2", "y^4"};
    for (const char* m : monos) {
      char buf[64];
      std::snprintf(buf, sizeof buf, " + %.6f*%s", coeff(rng), m);
      src += buf;
    }
    const auto f = field_of(src.c_str(), {-1, 1, -1, 1});
    const double x = pt(rng), y = pt(rng);
    // hessian_curvature internally asserts the two numerator forms agree to
    // 1e-9 relative and throws otherwise
    CHECK_NOTHROW(hessian_curvature(*f, x, y));
  }
}

TEST_CASE("curvature scales as 1/c when the potential scales by c") {
  const auto f = field_of("x^2 + y^2 + x^2*y^2", {-0.8, 0.8, -0.8, 0.8});
  for (double c : {2.0, 5.0, 0.25}) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g*(x^2 + y^2 + x^2*y^2)", c);
    const auto fc = field_of(buf, {-0.8, 0.8, -0.8, 0.8});
    const double k1 = hessian_curvature(*f, 0.4, 0.3);
    const double kc = hessian_curvature(*fc, 0.4, 0.3);
    CHECK(kc == doctest::Approx(k1 / c).epsilon(1e-10));
  }
}

TEST_CASE("flatness residual of a separable potential vanishes identically") {
  const auto f = field_of("exp(x) + exp(y)", {-1, 1, -1, 1});
  for (double x : {-0.7, 0.0, 0.9})
    for (double y : {-0.5, 0.3})
      CHECK(flatness_residual(*f, x, y) == 0.0);  // middle row vanishes
}

TEST_CASE("flatness residual of the half-plane potential over its grid") {
  const auto f = field_of("x^2/(2*y) + y*log(y)/4", {-1, 1, 0.5, 2});
  const GridSpec g{-1, 1, 0.5, 2, 41, 41};
  double worst = 0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      worst = std::max(worst, std::abs(flatness_residual(*f, g.x(i), g.y(j))));
  CHECK(worst < 1e-9);
}

TEST_CASE("cone identity for the half-plane potential") {
  CompiledPotential pot(parse_expression("x^2/(2*y) + y*log(y)/4"));
  const auto m = MetricTriple::from_potential(pot, {-1, 1, 0.5, 2});
  // P(a,b,c) = a^2 - 4 a c + 4 b^2
  const ConeWitness w(2, {{2, 0, 0, 1.0}, {1, 0, 1, -4.0}, {0, 2, 0, 4.0}});
  CHECK(cone_identity_check(m, w, {-1, 1, 0.5, 2, 41, 41}) < 1e-12);
}

TEST_CASE("trivial cone witness a - c on the Euclidean triple") {
  const auto m = MetricTriple::from_exprs(parse_expression("1"),
                                          parse_expression("0"),
                                          parse_expression("1"), {-1, 1, -1, 1});
  const ConeWitness w(1, {{1, 0, 0, 1.0}, {0, 0, 1, -1.0}});
  CHECK(cone_identity_check(m, w, {-1, 1, -1, 1, 11, 11}) == 0.0);
  CHECK_THROWS_AS(cone_identity_check(m, w, {-1, 1, -1, 1, 0, 0}),
                  NumericalError);  // empty grid
  // mixed-degree witnesses are rejected at construction
  CHECK_THROWS_AS(ConeWitness(2, {{1, 0, 0, 1.0}}), NumericalError);
}

TEST_CASE("non-flat control fails the quadratic cone identity") {
  CompiledPotential pot(parse_expression("x^2 + y^2 + x^2*y^2"));
  const auto m = MetricTriple::from_potential(pot, {-0.8, 0.8, -0.8, 0.8});
  const ConeWitness w(2, {{2, 0, 0, 1.0}, {1, 0, 1, -4.0}, {0, 2, 0, 4.0}});
  CHECK(cone_identity_check(m, w, {0.3, 0.7, 0.3, 0.7, 21, 21}) > 1e-2);
}

TEST_CASE("normalized rank test separates flat from non-flat triples") {
  CompiledPotential flat(parse_expression("x^2/(2*y) + y*log(y)/4"));
  const auto mf = MetricTriple::from_potential(flat, {-1, 1, 0.5, 2});
  CHECK(normalized_rank_test(mf, {-0.2, 0.2, 0.9, 1.1, 41, 41}) < 1e-6);

  const auto mc = MetricTriple::from_exprs(parse_expression("2"),
                                           parse_expression("0"),
                                           parse_expression("2"), {-1, 1, -1, 1});
  CHECK(normalized_rank_test(mc, {-1, 1, -1, 1, 41, 41}) == 0.0);

  CompiledPotential nonflat(parse_expression("x^2 + y^2 + x^2*y^2"));
  const auto mn = MetricTriple::from_potential(nonflat, {-0.8, 0.8, -0.8, 0.8});
  CHECK(normalized_rank_test(mn, {0.3, 0.7, 0.3, 0.7, 41, 41}) > 1e-3);

  CHECK_THROWS_AS(normalized_rank_test(mf, {-0.2, 0.2, 0.9, 1.1, 4, 4}),
                  NumericalError);  // too small for the stencil
}

TEST_CASE("Euler identity for homogeneous potentials") {
  const auto pts = catalog::annulus_points(0.5, 1.0, 15, 24);
  const auto r4 = field_of("(x^2 + y^2)^2", {-1.2, 1.2, -1.2, 1.2});
  CHECK(euler_homogeneity_residual(*r4, 4.0, pts) < 1e-10);

  const auto r2 = field_of("5*(x^2 + y^2)", {-1.2, 1.2, -1.2, 1.2});
  CHECK(euler_homogeneity_residual(*r2, 2.0, pts) == 0.0);  // constant Hessian

  const auto bad = field_of("x^2 + y^2 + x^2*y^2", {-1.2, 1.2, -1.2, 1.2});
  CHECK(euler_homogeneity_residual(*bad, 2.0, pts) > 0.1);

  CHECK_THROWS_AS(
      euler_homogeneity_residual(*r4, 4.0, {{0.5, 0.5}, {0.0, 0.0}}),
      NumericalError);  // origin in grid
}

TEST_CASE("radial fit recovers C and rejects the right fixtures") {
  const auto good = field_of("3*(x^2 + y^2)", {-1, 1, -1, 1});
  const auto fit = radial_flat_fit(*good, {});
  CHECK(fit.C == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(fit.residual < 1e-12);

  // Hessian of r^4 vanishes at the centre: hypothesis failure, not flatness
  const auto r4 = field_of("(x^2 + y^2)^2", {-1, 1, -1, 1});
  CHECK_THROWS_AS(radial_flat_fit(*r4, {}), NotPositiveDefinite);

  // positive definite on the disk but curved
  const auto curved = field_of("3*(x^2 + y^2) + 0.01*(x^2 + y^2)^2", {-1, 1, -1, 1});
  CHECK_THROWS_AS(radial_flat_fit(*curved, {}), NotFlat);

  const auto skew = field_of("3*(x^2 + y^2) + 0.1*x^3", {-1, 1, -1, 1});
  CHECK_THROWS_AS(radial_flat_fit(*skew, {}), NotRadiallySymmetric);
}

TEST_CASE("flat-fixture suite: every catalog fixture tagged flat has |K| < 1e-8") {
  for (const auto& fx : catalog::all()) {
    if (!fx.expect_flat) continue;
    const auto rep = catalog::verify(fx);
    INFO("fixture ", fx.name, ": ", rep.detail);
    CHECK(rep.curvature_max < 1e-8);
    CHECK(rep.pass);
  }
}

TEST_CASE("non-flat fixture is detected") {
  const auto rep = catalog::verify(*catalog::find("nonflat-x2y2"));
  CHECK(rep.pass);  // pass means "correctly detected as curved"
  CHECK(rep.curvature_max > 1e-3);
}

TEST_CASE("sampled fields reproduce closed-form bundles") {
  // wrap samples of the half-plane potential and compare third derivatives
  CompiledPotential pot(parse_expression("x^2/(2*y) + y*log(y)/4"));
  const int nx = 121, ny = 121;
  const double x0 = -0.5, y0 = 0.8, hx = 1.0 / (nx - 1), hy = 0.5 / (ny - 1);
  std::vector<double> vals(std::size_t(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      vals[std::size_t(j) * nx + i] = pot.bundle(x0 + i * hx, y0 + j * hy).f;
  SampledField sf(x0, hx, nx, y0, hy, ny, std::move(vals));
  const double qx = 0.05, qy = 1.05;
  const DiffBundle a = sf.bundle(qx, qy), b = pot.bundle(qx, qy);
  CHECK(a.fxx == doctest::Approx(b.fxx).epsilon(1e-7));
  CHECK(a.fxy == doctest::Approx(b.fxy).epsilon(1e-7));
  CHECK(a.fyy == doctest::Approx(b.fyy).epsilon(1e-7));
  CHECK(a.fxxx == doctest::Approx(b.fxxx).epsilon(2e-4));
  CHECK(a.fyyy == doctest::Approx(b.fyyy).epsilon(2e-4));
}
