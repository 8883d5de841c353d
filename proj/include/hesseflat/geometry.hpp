#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "hesseflat/field.hpp"

namespace hesseflat::geometry {

struct GridSpec {
  double x_lo, x_hi, y_lo, y_hi;
  int nx, ny;
  double hx() const { return (x_hi - x_lo) / (nx - 1); }
  double hy() const { return (y_hi - y_lo) / (ny - 1); }
  double x(int i) const { return x_lo + i * hx(); }
  double y(int j) const { return y_lo + j * hy(); }
};

/// Gradient of a differentiable field at a point.
struct Gradient {
  double fx, fy;
};
using GradField = std::function<Gradient(double, double)>;

/// Poisson bracket {a,b} = a_x b_y - a_y b_x, normalized so {x,y} = 1.
double poisson_bracket(const GradField& a, const GradField& b, double x, double y);

/// The 3x3 determinant det[(E,F,G), (E,F,G)_x, (E,F,G)_y] built from the
/// second and third derivatives of f; zero iff the Hessian metric is flat
/// (when the Hessian is positive definite). Unnormalized.
double flatness_residual(const ScalarField2D& f, double x, double y);

/// Gaussian curvature K = -det3 / (4 (EG-F^2)^2) of the Hessian metric of f.
/// Cross-checks the determinant against its Poisson-bracket expansion to
/// 1e-9 relative and throws NotPositiveDefinite when the Hessian is not PD.
double hessian_curvature(const ScalarField2D& f, double x, double y);

/// Gaussian curvature of E dx^2 + 2F dxdy + G dy^2 by the classical Brioschi
/// determinant formula; independent of any potential.
double brioschi_oracle(const MetricTriple& m, double x, double y);

/// Homogeneous polynomial witness P(a,b,c); all monomials share the degree.
class ConeWitness {
 public:
  struct Monomial {
    int i, j, k;  // a^i b^j c^k
    double coeff;
  };
  ConeWitness(int degree, std::vector<Monomial> monomials);
  double eval(double a, double b, double c) const;
  int degree() const { return degree_; }

 private:
  int degree_;
  std::vector<Monomial> monomials_;
};

/// max over the grid of |P(E,F,G)| / max(|E|,|F|,|G|)^degree.
double cone_identity_check(const MetricTriple& m, const ConeWitness& w,
                           const GridSpec& grid);

/// Cone-membership test without a witness: for N = (E,F,G)/|(E,F,G)| returns
/// max over interior grid nodes of |d_x N x d_y N| (partials by 4th-order
/// finite differences on the grid). Near zero iff the triple lies on a cone.
double normalized_rank_test(const MetricTriple& m, const GridSpec& grid);

/// max over points and Hessian entries of |(2-d) H + x H_x + y H_y|,
/// normalized by the largest |H| entry seen. Points must exclude the origin.
double euler_homogeneity_residual(const ScalarField2D& f, double degree,
                                  const std::vector<std::pair<double, double>>& pts);

struct DiskSpec {
  double radius = 0.9;
  int nr = 21, ntheta = 32;
};
struct RadialFitResult {
  double C, residual;
};

/// Least-squares fit f ~ C (x^2 + y^2) on a disk after removing the affine
/// jet at the centre (the Hessian-potential gauge). Validates radial symmetry,
/// positive-definiteness on the full disk including the centre, and flatness,
/// in that order.
RadialFitResult radial_flat_fit(const ScalarField2D& f, const DiskSpec& disk,
                                double flat_tol = 1e-8);

/// Grid sweep used by the check command: curvature, flatness residual and
/// positivity minima, with per-point rows for CSV export. Does not throw on
/// indefinite points; they show up in the minima.
struct FlatnessGridReport {
  double curvature_max = 0, flatness_max = 0;
  double pd_min_trace = 0, pd_min_det = 0;
  struct Row {
    double x, y, E, F, G, K, residual;
  };
  std::vector<Row> rows;
};
FlatnessGridReport flatness_grid(const ScalarField2D& f, const GridSpec& grid);

}  // namespace hesseflat::geometry
