#include "hesseflat/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hesseflat/errors.hpp"

namespace hesseflat::geometry {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double poisson_bracket(const GradField& a, const GradField& b, double x, double y) {
  const Gradient ga = a(x, y), gb = b(x, y);
  return ga.fx * gb.fy - ga.fy * gb.fx;
}

namespace {

double det3_from_bundle(const DiffBundle& d) {
  // det [[E, E_x, E_y], [F, F_x, F_y], [G, G_x, G_y]] with
  // (E,F,G) = (fxx, fxy, fyy); row derivatives are third derivatives of f.
  const double a11 = d.fxx, a12 = d.fxxx, a13 = d.fxxy;
  const double a21 = d.fxy, a22 = d.fxxy, a23 = d.fxyy;
  const double a31 = d.fyy, a32 = d.fxyy, a33 = d.fyyy;
  return a11 * (a22 * a33 - a23 * a32) - a12 * (a21 * a33 - a23 * a31) +
         a13 * (a21 * a32 - a22 * a31);
}

double poisson_numerator(const DiffBundle& d) {
  // fxx {fxy,fyy} + fxy {fyy,fxx} + fyy {fxx,fxy}
  const double b1 = d.fxxy * d.fyyy - d.fxyy * d.fxyy;  // {fxy, fyy}
  const double b2 = d.fxyy * d.fxxy - d.fyyy * d.fxxx;  // {fyy, fxx}
  const double b3 = d.fxxx * d.fxyy - d.fxxy * d.fxxy;  // {fxx, fxy}
  return d.fxx * b1 + d.fxy * b2 + d.fyy * b3;
}

void require_inside(const ScalarField2D& f, double x, double y) {
  if (!f.domain().contains(x, y, 1e-12))
    throw NumericalError("point outside the field's declared domain");
}

}  // namespace

double flatness_residual(const ScalarField2D& f, double x, double y) {
  require_inside(f, x, y);
  return det3_from_bundle(f.bundle(x, y));
}

double hessian_curvature(const ScalarField2D& f, double x, double y) {
  require_inside(f, x, y);
  const DiffBundle d = f.bundle(x, y);
  if (!positive_definite(d.fxx, d.fxy, d.fyy)) {
    throw NotPositiveDefinite(d.fxx + d.fyy, d.fxx * d.fyy - d.fxy * d.fxy, x, y,
                              "Hessian not positive definite (trace " +
                                  std::to_string(d.fxx + d.fyy) + ", det " +
                                  std::to_string(d.fxx * d.fyy - d.fxy * d.fxy) +
                                  ")");
  }
  const double det3 = det3_from_bundle(d);
  const double pnum = poisson_numerator(d);
  // The two displayed forms of the numerator are algebraically identical;
  // disagreement beyond roundoff indicates a broken derivative path. Roundoff
  // scales with the largest triple product in the determinant expansion.
  const double scale =
      std::max({std::abs(det3), std::abs(pnum),
                std::abs(d.fxx * d.fxxy * d.fyyy), std::abs(d.fxx * d.fxyy * d.fxyy),
                std::abs(d.fxxx * d.fxy * d.fyyy), std::abs(d.fxxx * d.fxyy * d.fyy),
                std::abs(d.fxxy * d.fxy * d.fxyy), std::abs(d.fxxy * d.fxxy * d.fyy),
                1e-300});
  if (std::abs(det3 - pnum) > 1e-9 * scale)
    throw NumericalError("determinant and Poisson-bracket numerators disagree");
  const double det2 = d.fxx * d.fyy - d.fxy * d.fxy;
  return -det3 / (4.0 * det2 * det2);
}

double brioschi_oracle(const MetricTriple& m, double x, double y) {
  const Jet2 E = m.E->jet(x, y), F = m.F->jet(x, y), G = m.G->jet(x, y);
  if (!positive_definite(E.v, F.v, G.v))
    throw NotPositiveDefinite(E.v + G.v, E.v * G.v - F.v * F.v, x, y,
                              "metric not positive definite");
  const double m1[3][3] = {
      {-0.5 * E.yy + F.xy - 0.5 * G.xx, 0.5 * E.x, F.x - 0.5 * E.y},
      {F.y - 0.5 * G.x, E.v, F.v},
      {0.5 * G.y, F.v, G.v}};
  const double m2[3][3] = {{0.0, 0.5 * E.y, 0.5 * G.x},
                           {0.5 * E.y, E.v, F.v},
                           {0.5 * G.x, F.v, G.v}};
  auto det = [](const double a[3][3]) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  };
  const double det2 = E.v * G.v - F.v * F.v;
  return (det(m1) - det(m2)) / (det2 * det2);
}

ConeWitness::ConeWitness(int degree, std::vector<Monomial> monomials)
    : degree_(degree), monomials_(std::move(monomials)) {
  for (const auto& mo : monomials_)
    if (mo.i < 0 || mo.j < 0 || mo.k < 0 || mo.i + mo.j + mo.k != degree_)
      throw NumericalError("ConeWitness: monomial degree mismatch");
}

double ConeWitness::eval(double a, double b, double c) const {
  auto ipow = [](double v, int n) {
    double r = 1;
    for (int i = 0; i < n; ++i) r *= v;
    return r;
  };
  double s = 0;
  for (const auto& mo : monomials_)
    s += mo.coeff * ipow(a, mo.i) * ipow(b, mo.j) * ipow(c, mo.k);
  return s;
}

double cone_identity_check(const MetricTriple& m, const ConeWitness& w,
                           const GridSpec& grid) {
  if (grid.nx < 1 || grid.ny < 1) throw NumericalError("empty grid");
  double worst = 0;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const double x = grid.x(i), y = grid.y(j);
      const double E = m.e(x, y), F = m.f(x, y), G = m.g(x, y);
      const double s = std::max({std::abs(E), std::abs(F), std::abs(G)});
      if (!(s > 0)) throw NumericalError("vanishing metric triple on grid");
      worst = std::max(worst,
                       std::abs(w.eval(E, F, G)) / std::pow(s, double(w.degree())));
    }
  return worst;
}

double normalized_rank_test(const MetricTriple& m, const GridSpec& grid) {
  if (grid.nx < 5 || grid.ny < 5)
    throw NumericalError("grid too small for the finite-difference stencil");
  const int nx = grid.nx, ny = grid.ny;
  std::vector<double> N[3];
  for (auto& v : N) v.assign(std::size_t(nx) * ny, 0.0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double x = grid.x(i), y = grid.y(j);
      const double E = m.e(x, y), F = m.f(x, y), G = m.g(x, y);
      const double r = std::sqrt(E * E + F * F + G * G);
      if (!(r > 0)) throw NumericalError("vanishing metric triple on grid");
      const std::size_t id = std::size_t(j) * nx + i;
      N[0][id] = E / r;
      N[1][id] = F / r;
      N[2][id] = G / r;
    }
  const double hx = grid.hx(), hy = grid.hy();
  double worst = 0;
  for (int j = 2; j < ny - 2; ++j)
    for (int i = 2; i < nx - 2; ++i) {
      double dx[3], dy[3];
      for (int c = 0; c < 3; ++c) {
        double sx[5], sy[5];
        for (int k = -2; k <= 2; ++k) {
          sx[k + 2] = N[c][std::size_t(j) * nx + (i + k)];
          sy[k + 2] = N[c][std::size_t(j + k) * nx + i];
        }
        dx[c] = num::d1_central5(sx + 2, hx);
        dy[c] = num::d1_central5(sy + 2, hy);
      }
      const double cx = dx[1] * dy[2] - dx[2] * dy[1];
      const double cy = dx[2] * dy[0] - dx[0] * dy[2];
      const double cz = dx[0] * dy[1] - dx[1] * dy[0];
      worst = std::max(worst, std::sqrt(cx * cx + cy * cy + cz * cz));
    }
  return worst;
}

double euler_homogeneity_residual(const ScalarField2D& f, double degree,
                                  const std::vector<std::pair<double, double>>& pts) {
  double worst = 0, hmax = 0;
  for (const auto& [x, y] : pts) {
    if (x == 0 && y == 0) throw NumericalError("origin in grid");
    const DiffBundle d = f.bundle(x, y);
    const double r1 = (2 - degree) * d.fxx + x * d.fxxx + y * d.fxxy;
    const double r2 = (2 - degree) * d.fxy + x * d.fxxy + y * d.fxyy;
    const double r3 = (2 - degree) * d.fyy + x * d.fxyy + y * d.fyyy;
    worst = std::max({worst, std::abs(r1), std::abs(r2), std::abs(r3)});
    hmax = std::max({hmax, std::abs(d.fxx), std::abs(d.fxy), std::abs(d.fyy)});
  }
  if (!(hmax > 0)) throw NumericalError("vanishing Hessian on grid");
  return worst / hmax;
}

RadialFitResult radial_flat_fit(const ScalarField2D& f, const DiskSpec& disk,
                                double flat_tol) {
  const double R = disk.radius;
  std::vector<std::pair<double, double>> pts;
  pts.emplace_back(0.0, 0.0);
  for (int ir = 1; ir < disk.nr; ++ir) {
    const double r = R * double(ir) / double(disk.nr - 1);
    for (int ia = 0; ia < disk.ntheta; ++ia) {
      const double th = kTwoPi * double(ia) / double(disk.ntheta);
      pts.emplace_back(r * std::cos(th), r * std::sin(th));
    }
  }

  // 1. radial symmetry: a quarter rotation must leave f unchanged.
  for (const auto& [x, y] : pts) {
    const double d = std::abs(f.value(x, y) - f.value(-y, x));
    if (d > 1e-9)
      throw NotRadiallySymmetric("not radially symmetric: |f(x,y) - f(-y,x)| = " +
                                 std::to_string(d));
  }
  // 2. positive definiteness on the full disk, centre included.
  for (const auto& [x, y] : pts) {
    const DiffBundle d = f.bundle(x, y);
    if (!positive_definite(d.fxx, d.fxy, d.fyy))
      throw NotPositiveDefinite(
          d.fxx + d.fyy, d.fxx * d.fyy - d.fxy * d.fxy, x, y,
          "Hessian not positive definite on the disk (trace " +
              std::to_string(d.fxx + d.fyy) + ", det " +
              std::to_string(d.fxx * d.fyy - d.fxy * d.fxy) + ")");
  }
  // 3. flatness.
  double kmax = 0;
  for (const auto& [x, y] : pts)
    kmax = std::max(kmax, std::abs(hessian_curvature(f, x, y)));
  if (kmax > flat_tol)
    throw NotFlat(kmax, "metric is not flat: max |K| = " + std::to_string(kmax));

  // 4. least-squares C over the grid, affine jet at the centre removed.
  const DiffBundle c0 = f.bundle(0, 0);
  double num = 0, den = 0;
  for (const auto& [x, y] : pts) {
    const double r2 = x * x + y * y;
    const double ft = f.value(x, y) - c0.f - c0.fx * x - c0.fy * y;
    num += ft * r2;
    den += r2 * r2;
  }
  const double C = num / den;
  double resid = 0;
  for (const auto& [x, y] : pts) {
    const double r2 = x * x + y * y;
    const double ft = f.value(x, y) - c0.f - c0.fx * x - c0.fy * y;
    resid = std::max(resid, std::abs(ft - C * r2));
  }
  return RadialFitResult{C, resid};
}

FlatnessGridReport flatness_grid(const ScalarField2D& f, const GridSpec& grid) {
  FlatnessGridReport rep;
  rep.pd_min_trace = std::numeric_limits<double>::infinity();
  rep.pd_min_det = std::numeric_limits<double>::infinity();
  rep.rows.reserve(std::size_t(grid.nx) * grid.ny);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const double x = grid.x(i), y = grid.y(j);
      const DiffBundle d = f.bundle(x, y);
      const double det2 = d.fxx * d.fyy - d.fxy * d.fxy;
      const double det3 = det3_from_bundle(d);
      double K = std::numeric_limits<double>::quiet_NaN();
      if (det2 != 0.0) K = -det3 / (4.0 * det2 * det2);
      rep.rows.push_back({x, y, d.fxx, d.fxy, d.fyy, K, det3});
      rep.pd_min_trace = std::min(rep.pd_min_trace, d.fxx + d.fyy);
      rep.pd_min_det = std::min(rep.pd_min_det, det2);
      if (std::isfinite(K)) rep.curvature_max = std::max(rep.curvature_max, std::abs(K));
      rep.flatness_max = std::max(rep.flatness_max, std::abs(det3));
    }
  return rep;
}

}  // namespace hesseflat::geometry
