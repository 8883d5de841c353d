#include "hesseflat/catalog.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "hesseflat/errors.hpp"

namespace hesseflat::catalog {

std::shared_ptr<ClosedFormField> Fixture::field() const {
  return std::make_shared<ClosedFormField>(parse_expression(source), domain);
}

namespace {

std::vector<Fixture> build_catalog() {
  std::vector<Fixture> v;

  {
    Fixture fx;
    fx.name = "example-4.2";
    fx.source = "x^2/(2*y) + y*log(y)/4";
    fx.domain = {-1.0, 1.0, 0.5, 2.0};
    fx.grid = {-1.0, 1.0, 0.5, 2.0, 101, 101};
    fx.expect_flat = true;
    // E^2 - 4 E G + 4 F^2 vanishes identically for this potential.
    fx.witness = geometry::ConeWitness(
        2, {{2, 0, 0, 1.0}, {1, 0, 1, -4.0}, {0, 2, 0, 4.0}});
    fx.reconstruct_window = chart::StarDomain{-0.15, 0.15, 0.62, 0.92, 41, 41};
    v.push_back(std::move(fx));
  }
  {
    Fixture fx;
    fx.name = "homogeneous-r4";
    fx.source = "(x^2 + y^2)^2";
    fx.domain = {-1.0, 1.0, -1.0, 1.0};
    // grid unused for the sweep; flatness is checked on annulus points
    fx.grid = {0.4, 0.75, 0.4, 0.75, 41, 41};
    fx.expect_flat = true;
    fx.homogeneity_degree = 4.0;
    v.push_back(std::move(fx));
  }
  {
    Fixture fx;
    fx.name = "separable-exp";
    fx.source = "exp(x) + exp(y)";
    fx.domain = {-1.0, 1.0, -1.0, 1.0};
    fx.grid = {-1.0, 1.0, -1.0, 1.0, 41, 41};
    fx.expect_flat = true;
    v.push_back(std::move(fx));
  }
  {
    Fixture fx;
    fx.name = "radial-Cr2";
    fx.source = "3*(x^2 + y^2)";
    fx.domain = {-1.0, 1.0, -1.0, 1.0};
    fx.grid = {-0.6, 0.6, -0.6, 0.6, 41, 41};
    fx.expect_flat = true;
    fx.radial = true;
    fx.expected_radial_C = 3.0;
    v.push_back(std::move(fx));
  }
  {
    Fixture fx;
    fx.name = "nonflat-x2y2";
    fx.source = "x^2 + y^2 + x^2*y^2";
    fx.domain = {-0.8, 0.8, -0.8, 0.8};
    fx.grid = {-0.8, 0.8, -0.8, 0.8, 41, 41};
    fx.expect_flat = false;
    v.push_back(std::move(fx));
  }
  return v;
}

}  // namespace

const std::vector<Fixture>& all() {
  static const std::vector<Fixture> cat = build_catalog();
  return cat;
}

const Fixture* find(const std::string& name) {
  for (const auto& fx : all())
    if (fx.name == name) return &fx;
  return nullptr;
}

std::vector<std::string> names() {
  std::vector<std::string> out;
  for (const auto& fx : all()) out.push_back(fx.name);
  return out;
}

std::vector<std::pair<double, double>> annulus_points(double r_lo, double r_hi,
                                                      int nr, int ntheta) {
  std::vector<std::pair<double, double>> pts;
  constexpr double two_pi = 6.283185307179586476925286766559;
  for (int ir = 0; ir < nr; ++ir) {
    const double r = r_lo + (r_hi - r_lo) * double(ir) / double(nr - 1);
    for (int ia = 0; ia < ntheta; ++ia) {
      const double th = two_pi * double(ia) / double(ntheta);
      pts.emplace_back(r * std::cos(th), r * std::sin(th));
    }
  }
  return pts;
}

FixtureReport verify(const Fixture& fx) {
  FixtureReport rep;
  rep.name = fx.name;
  const auto field = fx.field();
  const auto triple =
      MetricTriple::from_potential(field->potential(), fx.domain);

  if (fx.homogeneity_degree) {
    // Homogeneous potentials are checked on an annulus that avoids the origin.
    const auto pts = annulus_points(0.5, 1.0, 21, 48);
    rep.euler_residual =
        geometry::euler_homogeneity_residual(*field, *fx.homogeneity_degree, pts);
    double kmax = 0, fmax = 0;
    double tr = std::numeric_limits<double>::infinity(),
           de = std::numeric_limits<double>::infinity();
    for (const auto& [x, y] : pts) {
      kmax = std::max(kmax, std::abs(geometry::hessian_curvature(*field, x, y)));
      fmax = std::max(fmax, std::abs(geometry::flatness_residual(*field, x, y)));
      const DiffBundle d = field->bundle(x, y);
      tr = std::min(tr, d.fxx + d.fyy);
      de = std::min(de, d.fxx * d.fyy - d.fxy * d.fxy);
    }
    rep.curvature_max = kmax;
    rep.flatness_max = fmax;
    rep.pd_min_trace = tr;
    rep.pd_min_det = de;
  } else {
    const auto sweep = geometry::flatness_grid(*field, fx.grid);
    rep.curvature_max = sweep.curvature_max;
    rep.flatness_max = sweep.flatness_max;
    rep.pd_min_trace = sweep.pd_min_trace;
    rep.pd_min_det = sweep.pd_min_det;
  }

  if (fx.witness)
    rep.cone_residual = geometry::cone_identity_check(triple, *fx.witness, fx.grid);
  if (!fx.witness && fx.expect_flat && !fx.homogeneity_degree)
    rep.rank_residual = geometry::normalized_rank_test(triple, fx.grid);
  if (fx.radial) rep.radial_fit = geometry::radial_flat_fit(*field, {});

  if (fx.reconstruct_window) {
    const auto& pot = field->potential();
    const Domain2D dom = fx.domain;
    chart::MetricFn H = [&pot, dom](double x, double y, double* E, double* F,
                                    double* G) {
      if (x < dom.x_lo || x > dom.x_hi || y < dom.y_lo || y > dom.y_hi)
        throw OutsideChart(x, y, "outside the fixture domain");
      const DiffBundle d = pot.bundle(x, y);
      *E = d.fxx;
      *F = d.fxy;
      *G = d.fyy;
    };
    const auto& win = *fx.reconstruct_window;
    const double bx = 0.5 * (win.x_lo + win.x_hi);
    const double by = 0.5 * (win.y_lo + win.y_hi);
    const auto rp = chart::reconstruct_potential(H, bx, by, win);
    rep.roundtrip = chart::verify_roundtrip(rp, H, &triple);
  }

  const bool pd_ok = rep.pd_min_trace > 0 && rep.pd_min_det > 0;
  bool pass = pd_ok;
  if (fx.expect_flat) {
    pass = pass && rep.curvature_max < 1e-8;
    if (rep.cone_residual) pass = pass && *rep.cone_residual < 1e-10;
    if (rep.rank_residual) pass = pass && *rep.rank_residual < 1e-6;
    if (rep.euler_residual) pass = pass && *rep.euler_residual < 1e-10;
    if (fx.radial && rep.radial_fit)
      pass = pass && std::abs(rep.radial_fit->C - fx.expected_radial_C) < 1e-9 &&
             rep.radial_fit->residual < 1e-10;
    if (rep.roundtrip)
      pass = pass && rep.roundtrip->hessian_rel_err < 1e-5 &&
             rep.roundtrip->integrability_max < 1e-10 &&
             rep.roundtrip->curvature_max < 1e-9;
  } else {
    // a non-flat fixture passes when the diagnostics detect curvature
    pass = pass && rep.curvature_max > 1e-3;
  }
  rep.pass = pass;

  char buf[160];
  std::snprintf(buf, sizeof buf, "max|K|=%.3e pd(min tr %.3e, min det %.3e)",
                rep.curvature_max, rep.pd_min_trace, rep.pd_min_det);
  rep.detail = buf;
  return rep;
}

}  // namespace hesseflat::catalog
