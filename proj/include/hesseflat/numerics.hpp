#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace hesseflat::num {

// ---------------------------------------------------------------------------
// Finite-difference stencils on uniform grids, all O(h^4).
// The *_at variants pick a central stencil where possible and fall back to
// one-sided stencils of the same order near the ends.
// ---------------------------------------------------------------------------

/// f'(x0) from f[-2..2] around the centre pointer.
double d1_central5(const double* c, double h);
/// f''(x0) from f[-2..2].
double d2_central5(const double* c, double h);
/// f'''(x0) from f[-3..3].
double d3_central7(const double* c, double h);

double deriv1_at(const std::vector<double>& f, std::size_t i, double h);
double deriv2_at(const std::vector<double>& f, std::size_t i, double h);

// ---------------------------------------------------------------------------
// Quadrature and cumulative integration
// ---------------------------------------------------------------------------

/// Adaptive Simpson integration of `f` over [a,b] to absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth = 40);

/// Prefix integrals of uniformly sampled data: result[i] = \int_{x0}^{x_i} f.
/// Fourth order (per-cell cubic through the four nearest samples).
std::vector<double> cumulative_integral(const std::vector<double>& f, double h);

// ---------------------------------------------------------------------------
// Splines and interpolation
// ---------------------------------------------------------------------------

/// Natural cubic spline on a uniform grid x_i = x0 + i*h.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(double x0, double h, std::vector<double> y);
  double operator()(double x) const;
  double derivative(double x) const;

 private:
  double x0_ = 0, h_ = 1;
  std::vector<double> y_, m_;  // values and second derivatives
};

/// Strictly monotone map t(u) represented by nodes with exact slopes
/// (cubic Hermite per cell). Supports forward evaluation and Newton inversion.
class MonotoneHermiteMap {
 public:
  MonotoneHermiteMap() = default;
  /// u-grid is uniform: u_i = u0 + i*h. `t` strictly increasing, `dt` > 0.
  MonotoneHermiteMap(double u0, double h, std::vector<double> t,
                     std::vector<double> dt);
  double forward(double u) const;         // t(u)
  double forward_slope(double u) const;   // dt/du
  double inverse(double t) const;         // u(t), Newton with bisection guard
  double t_front() const { return t_.front(); }
  double t_back() const { return t_.back(); }
  double u_front() const { return u0_; }
  double u_back() const { return u0_ + h_ * double(t_.size() - 1); }

 private:
  void cell_coeffs(std::size_t i, double* a, double* b, double* c, double* d) const;
  double u0_ = 0, h_ = 1;
  std::vector<double> t_, dt_;
};

/// Bicubic interpolation (Keys convolution kernel, a = -1/2) of a field on a
/// uniform rectangular grid. C^1; provides value and first derivatives.
class Bicubic {
 public:
  Bicubic() = default;
  Bicubic(double x0, double hx, int nx, double y0, double hy, int ny,
          std::vector<double> values /* row-major, index = iy*nx + ix */);
  void evaluate(double x, double y, double* f, double* fx, double* fy) const;
  double operator()(double x, double y) const {
    double f;
    evaluate(x, y, &f, nullptr, nullptr);
    return f;
  }

 private:
  double at(int ix, int iy) const;
  double x0_ = 0, hx_ = 1, y0_ = 0, hy_ = 1;
  int nx_ = 0, ny_ = 0;
  std::vector<double> v_;
};

// ---------------------------------------------------------------------------
// ODE helpers
// ---------------------------------------------------------------------------

/// Classical RK4 for scalar ODEs y' = f(x, y).
double rk4_step(const std::function<double(double, double)>& f, double x,
                double y, double h);

/// Numerov recurrence for psi'' = Q(t) psi on a uniform grid, integrating
/// outward in both directions from an anchor node with Taylor-series start.
/// `Q` is sampled at the grid nodes; dQ0/ddQ0 are dQ/dt and d2Q/dt2 at the
/// anchor (used only for the O(h^5) starter).
template <class Scalar>
std::vector<Scalar> numerov(const std::vector<Scalar>& Q, double h,
                            std::size_t anchor, Scalar psi0, Scalar dpsi0,
                            Scalar dQ0, Scalar ddQ0);

extern template std::vector<double> numerov<double>(
    const std::vector<double>&, double, std::size_t, double, double, double, double);
extern template std::vector<std::complex<double>> numerov<std::complex<double>>(
    const std::vector<std::complex<double>>&, double, std::size_t,
    std::complex<double>, std::complex<double>, std::complex<double>,
    std::complex<double>);

}  // namespace hesseflat::num
