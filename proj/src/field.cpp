#include "hesseflat/field.hpp"

#include <cmath>

#include "hesseflat/errors.hpp"

namespace hesseflat {

namespace {

// 4th-order finite-difference tables for a sampled grid.
std::vector<double> table_dx(const std::vector<double>& v, int nx, int ny,
                             double h, int order) {
  std::vector<double> out(v.size(), 0.0);
  std::vector<double> row(nx);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) row[ix] = v[std::size_t(iy) * nx + ix];
    for (int ix = 0; ix < nx; ++ix) {
      double d = 0;
      if (order == 1)
        d = num::deriv1_at(row, ix, h);
      else if (order == 2)
        d = num::deriv2_at(row, ix, h);
      else {  // order 3: central only; edge values clamped from the interior
        const int j = std::min(std::max(ix, 3), nx - 4);
        d = num::d3_central7(row.data() + j, h);
      }
      out[std::size_t(iy) * nx + ix] = d;
    }
  }
  return out;
}

std::vector<double> table_dy(const std::vector<double>& v, int nx, int ny,
                             double h, int order) {
  std::vector<double> out(v.size(), 0.0);
  std::vector<double> col(ny);
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) col[iy] = v[std::size_t(iy) * nx + ix];
    for (int iy = 0; iy < ny; ++iy) {
      double d = 0;
      if (order == 1)
        d = num::deriv1_at(col, iy, h);
      else if (order == 2)
        d = num::deriv2_at(col, iy, h);
      else {
        const int j = std::min(std::max(iy, 3), ny - 4);
        d = num::d3_central7(col.data() + j, h);
      }
      out[std::size_t(iy) * nx + ix] = d;
    }
  }
  return out;
}

}  // namespace

SampledField::SampledField(double x0, double hx, int nx, double y0, double hy,
                           int ny, std::vector<double> values)
    : ScalarField2D(
          Domain2D{x0 + 3 * hx, x0 + (nx - 4) * hx, y0 + 3 * hy, y0 + (ny - 4) * hy},
          Provenance::SampledGrid) {
  if (nx < 7 || ny < 7)
    throw NumericalError("SampledField: grid too small for the stencils");
  const auto& f = values;
  auto fx = table_dx(f, nx, ny, hx, 1);
  auto fy = table_dy(f, nx, ny, hy, 1);
  auto fxx = table_dx(f, nx, ny, hx, 2);
  auto fxy = table_dy(fx, nx, ny, hy, 1);
  auto fyy = table_dy(f, nx, ny, hy, 2);
  auto fxxx = table_dx(f, nx, ny, hx, 3);
  auto fxxy = table_dy(fxx, nx, ny, hy, 1);
  auto fxyy = table_dy(fxy, nx, ny, hy, 1);
  auto fyyy = table_dy(f, nx, ny, hy, 3);
  auto mk = [&](std::vector<double>& t) {
    return num::Bicubic(x0, hx, nx, y0, hy, ny, std::move(t));
  };
  tables_[0] = num::Bicubic(x0, hx, nx, y0, hy, ny, std::move(values));
  tables_[1] = mk(fx);
  tables_[2] = mk(fy);
  tables_[3] = mk(fxx);
  tables_[4] = mk(fxy);
  tables_[5] = mk(fyy);
  tables_[6] = mk(fxxx);
  tables_[7] = mk(fxxy);
  tables_[8] = mk(fxyy);
  tables_[9] = mk(fyyy);
}

DiffBundle SampledField::bundle(double x, double y) const {
  DiffBundle b;
  double* slot[10] = {&b.f,    &b.fx,   &b.fy,   &b.fxx,  &b.fxy,
                      &b.fyy,  &b.fxxx, &b.fxxy, &b.fxyy, &b.fyyy};
  for (int i = 0; i < 10; ++i) *slot[i] = tables_[i](x, y);
  return b;
}

namespace {

class ExprComponent final : public MetricComponent {
 public:
  explicit ExprComponent(ExprPtr e) {
    e_[0] = std::move(e);
    e_[1] = differentiate(e_[0], Var::X);
    e_[2] = differentiate(e_[0], Var::Y);
    e_[3] = differentiate(e_[1], Var::X);
    e_[4] = differentiate(e_[1], Var::Y);
    e_[5] = differentiate(e_[2], Var::Y);
  }
  Jet2 jet(double x, double y) const override {
    return Jet2{evaluate(e_[0], x, y), evaluate(e_[1], x, y),
                evaluate(e_[2], x, y), evaluate(e_[3], x, y),
                evaluate(e_[4], x, y), evaluate(e_[5], x, y)};
  }
  double value(double x, double y) const override { return evaluate(e_[0], x, y); }

 private:
  std::array<ExprPtr, 6> e_;
};

class FdComponent final : public MetricComponent {
 public:
  FdComponent(std::function<double(double, double)> f, double h)
      : f_(std::move(f)), h_(h) {}
  Jet2 jet(double x, double y) const override {
    const double h = h_;
    auto fv = [&](double a, double b) { return f_(a, b); };
    double sx[5], sy[5];
    for (int k = -2; k <= 2; ++k) {
      sx[k + 2] = fv(x + k * h, y);
      sy[k + 2] = fv(x, y + k * h);
    }
    Jet2 j;
    j.v = fv(x, y);
    j.x = num::d1_central5(sx + 2, h);
    j.y = num::d1_central5(sy + 2, h);
    j.xx = num::d2_central5(sx + 2, h);
    j.yy = num::d2_central5(sy + 2, h);
    // cross derivative: 4th-order tensor stencil
    double gx[5];
    for (int k = -2; k <= 2; ++k) {
      double s[5];
      for (int l = -2; l <= 2; ++l) s[l + 2] = fv(x + l * h, y + k * h);
      gx[k + 2] = num::d1_central5(s + 2, h);
    }
    j.xy = num::d1_central5(gx + 2, h);
    return j;
  }
  double value(double x, double y) const override { return f_(x, y); }

 private:
  std::function<double(double, double)> f_;
  double h_;
};

}  // namespace

MetricTriple MetricTriple::from_potential(const CompiledPotential& f, Domain2D d) {
  return from_exprs(f.deriv(2, 0), f.deriv(1, 1), f.deriv(0, 2), d);
}

MetricTriple MetricTriple::from_exprs(ExprPtr E, ExprPtr F, ExprPtr G, Domain2D d) {
  MetricTriple m;
  m.E = std::make_shared<ExprComponent>(std::move(E));
  m.F = std::make_shared<ExprComponent>(std::move(F));
  m.G = std::make_shared<ExprComponent>(std::move(G));
  m.domain = d;
  return m;
}

MetricTriple MetricTriple::from_functions(std::function<double(double, double)> E,
                                          std::function<double(double, double)> F,
                                          std::function<double(double, double)> G,
                                          double fd_step, Domain2D d) {
  MetricTriple m;
  m.E = std::make_shared<FdComponent>(std::move(E), fd_step);
  m.F = std::make_shared<FdComponent>(std::move(F), fd_step);
  m.G = std::make_shared<FdComponent>(std::move(G), fd_step);
  m.domain = d;
  return m;
}

bool positive_definite(double E, double F, double G, double tol) {
  const double s = std::max({std::abs(E), std::abs(F), std::abs(G)});
  if (!(s > 0)) return false;
  return E + G > tol * s && E * G - F * F > tol * s * s;
}

}  // namespace hesseflat
