#include "hesseflat/numerics.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "hesseflat/errors.hpp"

namespace hesseflat::num {

double d1_central5(const double* c, double h) {
  return (c[-2] - 8.0 * c[-1] + 8.0 * c[1] - c[2]) / (12.0 * h);
}

double d2_central5(const double* c, double h) {
  return (-c[-2] + 16.0 * c[-1] - 30.0 * c[0] + 16.0 * c[1] - c[2]) /
         (12.0 * h * h);
}

double d3_central7(const double* c, double h) {
  return (c[-3] - 8.0 * c[-2] + 13.0 * c[-1] - 13.0 * c[1] + 8.0 * c[2] - c[3]) /
         (8.0 * h * h * h);
}

namespace {

// One-sided O(h^4) first derivative at the leftmost of five nodes.
double d1_forward5(const double* f, double h) {
  return (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) /
         (12.0 * h);
}

// One-sided O(h^4) second derivative at the leftmost of six nodes.
double d2_forward6(const double* f, double h) {
  return (45.0 * f[0] - 154.0 * f[1] + 214.0 * f[2] - 156.0 * f[3] +
          61.0 * f[4] - 10.0 * f[5]) /
         (12.0 * h * h);
}

}  // namespace

double deriv1_at(const std::vector<double>& f, std::size_t i, double h) {
  const std::size_t n = f.size();
  if (n < 5) throw NumericalError("grid too small for the 5-point stencil");
  if (i >= 2 && i + 2 < n) return d1_central5(f.data() + i, h);
  if (i < 2) {
    // shifted stencils at the left edge
    if (i == 0) return d1_forward5(f.data(), h);
    // i == 1: O(h^4) stencil biased one node in
    const double* p = f.data();
    return (-3.0 * p[0] - 10.0 * p[1] + 18.0 * p[2] - 6.0 * p[3] + p[4]) /
           (12.0 * h);
  }
  // mirror at the right edge
  const double* p = f.data() + (n - 5);
  const std::size_t k = i - (n - 5);
  if (k == 4)
    return -(-25.0 * p[4] + 48.0 * p[3] - 36.0 * p[2] + 16.0 * p[1] - 3.0 * p[0]) /
           (12.0 * h);
  // k == 3
  return -(-3.0 * p[4] - 10.0 * p[3] + 18.0 * p[2] - 6.0 * p[1] + p[0]) /
         (12.0 * h);
}

double deriv2_at(const std::vector<double>& f, std::size_t i, double h) {
  const std::size_t n = f.size();
  if (n < 6) throw NumericalError("grid too small for the 6-point stencil");
  if (i >= 2 && i + 2 < n) return d2_central5(f.data() + i, h);
  if (i < 2) {
    if (i == 0) return d2_forward6(f.data(), h);
    const double* p = f.data();
    // O(h^4) at the second node
    return (10.0 * p[0] - 15.0 * p[1] - 4.0 * p[2] + 14.0 * p[3] - 6.0 * p[4] +
            p[5]) /
           (12.0 * h * h);
  }
  const double* p = f.data() + (n - 6);
  const std::size_t k = i - (n - 6);
  if (k == 5)
    return (45.0 * p[5] - 154.0 * p[4] + 214.0 * p[3] - 156.0 * p[2] +
            61.0 * p[1] - 10.0 * p[0]) /
           (12.0 * h * h);
  // k == 4
  return (10.0 * p[5] - 15.0 * p[4] - 4.0 * p[3] + 14.0 * p[2] - 6.0 * p[1] +
          p[0]) /
         (12.0 * h * h);
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa,
               double b, double fb, double m, double fm) {
  (void)m;
  (void)f;
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                            double fa, double b, double fb, double m, double fm,
                            double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, fa, m, fm, lm, flm);
  const double right = simpson(f, m, fm, b, fb, rm, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol,
                              depth - 1) +
         adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol,
                              depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = simpson(f, a, fa, b, fb, m, fm);
  return adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

std::vector<double> cumulative_integral(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  if (n < 4) throw NumericalError("cumulative_integral needs at least 4 samples");
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double cell;
    if (i == 0) {
      cell = h * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]) / 24.0;
    } else if (i + 2 >= n) {
      cell = h * (9.0 * f[n - 1] + 19.0 * f[n - 2] - 5.0 * f[n - 3] + f[n - 4]) /
             24.0;
    } else {
      cell = h * (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2]) / 24.0;
    }
    out[i + 1] = out[i] + cell;
  }
  return out;
}

// ---------------------------------------------------------------------------

CubicSpline::CubicSpline(double x0, double h, std::vector<double> y)
    : x0_(x0), h_(h), y_(std::move(y)) {
  const std::size_t n = y_.size();
  if (n < 3) throw NumericalError("CubicSpline needs at least 3 samples");
  // Natural spline: tridiagonal (1,4,1) system for the second derivatives,
  // with m_0 = m_{n-1} = 0. Thomas algorithm.
  m_.assign(n, 0.0);
  std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
  b[0] = b[n - 1] = 1.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    a[i] = 1.0;
    b[i] = 4.0;
    c[i] = 1.0;
    d[i] = 6.0 * (y_[i + 1] - 2.0 * y_[i] + y_[i - 1]) / (h_ * h_);
  }
  for (std::size_t i = 1; i < n; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  m_[n - 1] = d[n - 1] / b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) m_[i] = (d[i] - c[i] * m_[i + 1]) / b[i];
}

double CubicSpline::operator()(double x) const {
  const std::size_t n = y_.size();
  double s = (x - x0_) / h_;
  std::size_t i = (s <= 0) ? 0 : std::min<std::size_t>(std::size_t(s), n - 2);
  const double dx = x - (x0_ + double(i) * h_);
  const double A = (h_ - dx) / h_, B = dx / h_;
  return A * y_[i] + B * y_[i + 1] +
         ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h_ * h_ / 6.0;
}

double CubicSpline::derivative(double x) const {
  const std::size_t n = y_.size();
  double s = (x - x0_) / h_;
  std::size_t i = (s <= 0) ? 0 : std::min<std::size_t>(std::size_t(s), n - 2);
  const double dx = x - (x0_ + double(i) * h_);
  const double A = (h_ - dx) / h_, B = dx / h_;
  return (y_[i + 1] - y_[i]) / h_ +
         (-(3.0 * A * A - 1.0) * m_[i] + (3.0 * B * B - 1.0) * m_[i + 1]) * h_ /
             6.0;
}

// ---------------------------------------------------------------------------

MonotoneHermiteMap::MonotoneHermiteMap(double u0, double h, std::vector<double> t,
                                       std::vector<double> dt)
    : u0_(u0), h_(h), t_(std::move(t)), dt_(std::move(dt)) {
  if (t_.size() != dt_.size() || t_.size() < 2)
    throw NumericalError("MonotoneHermiteMap: bad sample arrays");
  for (std::size_t i = 0; i + 1 < t_.size(); ++i)
    if (!(t_[i + 1] > t_[i]))
      throw NumericalError("MonotoneHermiteMap: samples not strictly increasing");
}

void MonotoneHermiteMap::cell_coeffs(std::size_t i, double* a, double* b,
                                     double* c, double* d) const {
  // Hermite cubic on [u_i, u_{i+1}] in the local variable s = (u-u_i)/h.
  const double t0 = t_[i], t1 = t_[i + 1];
  const double m0 = dt_[i] * h_, m1 = dt_[i + 1] * h_;
  *d = t0;
  *c = m0;
  *b = 3.0 * (t1 - t0) - 2.0 * m0 - m1;
  *a = 2.0 * (t0 - t1) + m0 + m1;
}

double MonotoneHermiteMap::forward(double u) const {
  const std::size_t n = t_.size();
  double s = (u - u0_) / h_;
  std::size_t i = (s <= 0) ? 0 : std::min<std::size_t>(std::size_t(s), n - 2);
  const double sl = (u - (u0_ + double(i) * h_)) / h_;
  double a, b, c, d;
  cell_coeffs(i, &a, &b, &c, &d);
  return d + sl * (c + sl * (b + sl * a));
}

double MonotoneHermiteMap::forward_slope(double u) const {
  const std::size_t n = t_.size();
  double s = (u - u0_) / h_;
  std::size_t i = (s <= 0) ? 0 : std::min<std::size_t>(std::size_t(s), n - 2);
  const double sl = (u - (u0_ + double(i) * h_)) / h_;
  double a, b, c, d;
  cell_coeffs(i, &a, &b, &c, &d);
  return (c + sl * (2.0 * b + sl * 3.0 * a)) / h_;
}

double MonotoneHermiteMap::inverse(double t) const {
  const std::size_t n = t_.size();
  if (t <= t_.front()) return u0_;
  if (t >= t_.back()) return u0_ + h_ * double(n - 1);
  // locate the bracketing cell
  std::size_t lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    (t_[mid] <= t ? lo : hi) = mid;
  }
  double a, b, c, d;
  cell_coeffs(lo, &a, &b, &c, &d);
  // Newton on the local cubic, bisection fallback keeps s in [0,1].
  double s = (t - t_[lo]) / (t_[lo + 1] - t_[lo]);
  double s_lo = 0.0, s_hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double val = d + s * (c + s * (b + s * a)) - t;
    if (val > 0)
      s_hi = s;
    else
      s_lo = s;
    const double der = c + s * (2.0 * b + 3.0 * a * s);
    double step = (der != 0.0) ? val / der : 0.0;
    double next = s - step;
    if (!(next > s_lo && next < s_hi)) next = 0.5 * (s_lo + s_hi);
    if (std::abs(next - s) < 1e-16) {
      s = next;
      break;
    }
    s = next;
  }
  return u0_ + (double(lo) + s) * h_;
}

// ---------------------------------------------------------------------------

Bicubic::Bicubic(double x0, double hx, int nx, double y0, double hy, int ny,
                 std::vector<double> values)
    : x0_(x0), hx_(hx), y0_(y0), hy_(hy), nx_(nx), ny_(ny), v_(std::move(values)) {
  if (nx_ < 2 || ny_ < 2 || v_.size() != std::size_t(nx_) * std::size_t(ny_))
    throw NumericalError("Bicubic: bad grid");
}

double Bicubic::at(int ix, int iy) const {
  ix = std::clamp(ix, 0, nx_ - 1);
  iy = std::clamp(iy, 0, ny_ - 1);
  return v_[std::size_t(iy) * nx_ + ix];
}

namespace {

// Catmull-Rom / Keys kernel: cubic through p1,p2 with slopes from p0,p3.
inline void spline1d(double p0, double p1, double p2, double p3, double s,
                     double* f, double* df) {
  const double a = 0.5 * (-p0 + 3.0 * p1 - 3.0 * p2 + p3);
  const double b = 0.5 * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3);
  const double c = 0.5 * (-p0 + p2);
  if (f) *f = p1 + s * (c + s * (b + s * a));
  if (df) *df = c + s * (2.0 * b + 3.0 * a * s);
}

}  // namespace

void Bicubic::evaluate(double x, double y, double* f, double* fx,
                       double* fy) const {
  double sx = (x - x0_) / hx_;
  double sy = (y - y0_) / hy_;
  int ix = int(std::floor(sx)), iy = int(std::floor(sy));
  ix = std::clamp(ix, 0, nx_ - 2);
  iy = std::clamp(iy, 0, ny_ - 2);
  const double tx = sx - ix, ty = sy - iy;
  double col[4], dcol[4];
  for (int r = -1; r <= 2; ++r) {
    double v, dv;
    spline1d(at(ix - 1, iy + r), at(ix, iy + r), at(ix + 1, iy + r),
             at(ix + 2, iy + r), tx, &v, &dv);
    col[r + 1] = v;
    dcol[r + 1] = dv;
  }
  double val, dvy;
  spline1d(col[0], col[1], col[2], col[3], ty, &val, &dvy);
  if (f) *f = val;
  if (fy) *fy = dvy / hy_;
  if (fx) {
    double dvx;
    spline1d(dcol[0], dcol[1], dcol[2], dcol[3], ty, &dvx, nullptr);
    *fx = dvx / hx_;
  }
}

// ---------------------------------------------------------------------------

double rk4_step(const std::function<double(double, double)>& f, double x,
                double y, double h) {
  const double k1 = f(x, y);
  const double k2 = f(x + 0.5 * h, y + 0.5 * h * k1);
  const double k3 = f(x + 0.5 * h, y + 0.5 * h * k2);
  const double k4 = f(x + h, y + h * k3);
  return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <class Scalar>
std::vector<Scalar> numerov(const std::vector<Scalar>& Q, double h,
                            std::size_t anchor, Scalar psi0, Scalar dpsi0,
                            Scalar dQ0, Scalar ddQ0) {
  const std::size_t n = Q.size();
  if (anchor >= n) throw NumericalError("numerov: anchor outside grid");
  std::vector<Scalar> psi(n, Scalar(0));
  psi[anchor] = psi0;

  // Taylor starter to O(h^5): psi'' = Q psi, with Q' and Q'' at the anchor.
  auto taylor = [&](double hh) -> Scalar {
    const Scalar q = Q[anchor];
    const Scalar d2 = q * psi0;
    const Scalar d3 = q * dpsi0 + dQ0 * psi0;
    const Scalar d4 = q * d2 + Scalar(2) * dQ0 * dpsi0 + ddQ0 * psi0;
    return psi0 + hh * dpsi0 + 0.5 * hh * hh * d2 + hh * hh * hh / 6.0 * d3 +
           hh * hh * hh * hh / 24.0 * d4;
  };

  const double h2 = h * h;
  auto advance = [&](std::ptrdiff_t dir) {
    std::ptrdiff_t i = std::ptrdiff_t(anchor);
    const std::ptrdiff_t last = (dir > 0) ? std::ptrdiff_t(n) - 1 : 0;
    if (i == last) return;
    psi[i + dir] = taylor(dir * h);
    std::ptrdiff_t prev = i, cur = i + dir;
    while (cur != last) {
      const std::ptrdiff_t next = cur + dir;
      const Scalar num = (Scalar(2) + Scalar(10.0 * h2 / 12.0) * Q[cur]) * psi[cur] -
                         (Scalar(1) - h2 / 12.0 * Q[prev]) * psi[prev];
      const Scalar den = Scalar(1) - h2 / 12.0 * Q[next];
      psi[next] = num / den;
      if (!std::isfinite(std::abs(psi[next])))
        throw NumericalError("numerov: overflow/NaN at node " + std::to_string(next));
      prev = cur;
      cur = next;
    }
  };
  advance(+1);
  advance(-1);
  return psi;
}

template std::vector<double> numerov<double>(const std::vector<double>&, double,
                                             std::size_t, double, double, double,
                                             double);
template std::vector<std::complex<double>> numerov<std::complex<double>>(
    const std::vector<std::complex<double>>&, double, std::size_t,
    std::complex<double>, std::complex<double>, std::complex<double>,
    std::complex<double>);

}  // namespace hesseflat::num
