#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "hesseflat/expr.hpp"
#include "hesseflat/numerics.hpp"

namespace hesseflat {

struct Domain2D {
  double x_lo, x_hi, y_lo, y_hi;
  bool contains(double x, double y, double pad = 0.0) const {
    return x >= x_lo - pad && x <= x_hi + pad && y >= y_lo - pad && y <= y_hi + pad;
  }
};

enum class Provenance { ClosedForm, SampledGrid };

/// A twice-to-thrice differentiable scalar field of two variables with a
/// uniform derivative-query interface. Queries inside the declared domain do
/// not raise domain errors.
class ScalarField2D {
 public:
  virtual ~ScalarField2D() = default;
  virtual DiffBundle bundle(double x, double y) const = 0;
  double value(double x, double y) const { return bundle(x, y).f; }
  const Domain2D& domain() const { return domain_; }
  Provenance provenance() const { return provenance_; }

 protected:
  ScalarField2D(Domain2D d, Provenance p) : domain_(d), provenance_(p) {}
  Domain2D domain_;
  Provenance provenance_;
};

/// Closed-form field: all ten derivative trees are exact symbolic expressions.
class ClosedFormField final : public ScalarField2D {
 public:
  ClosedFormField(ExprPtr f, Domain2D d)
      : ScalarField2D(d, Provenance::ClosedForm), pot_(std::move(f)) {}
  DiffBundle bundle(double x, double y) const override { return pot_.bundle(x, y); }
  const CompiledPotential& potential() const { return pot_; }

 private:
  CompiledPotential pot_;
};

/// Grid of samples wrapped with 4th-order finite-difference derivatives
/// (third derivatives from 7-point stencils). Derivative tables are built at
/// construction and interpolated bicubically, so off-node queries are valid;
/// the declared domain is inset by three cells for the widest stencil.
class SampledField final : public ScalarField2D {
 public:
  SampledField(double x0, double hx, int nx, double y0, double hy, int ny,
               std::vector<double> values /* row-major, iy*nx+ix */);
  DiffBundle bundle(double x, double y) const override;

 private:
  std::array<num::Bicubic, 10> tables_;  // f, fx, fy, fxx, fxy, fyy, fxxx, fxxy, fxyy, fyyy
};

/// One metric coefficient with value and derivatives through order 2.
struct Jet2 {
  double v, x, y, xx, xy, yy;
};

class MetricComponent {
 public:
  virtual ~MetricComponent() = default;
  virtual Jet2 jet(double x, double y) const = 0;
  virtual double value(double x, double y) const { return jet(x, y).v; }
};

/// The triple (E, F, G) = (f_xx, f_xy, f_yy) as fields on a domain, with
/// positivity metadata computed on demand.
struct MetricTriple {
  std::shared_ptr<const MetricComponent> E, F, G;
  Domain2D domain;

  double e(double x, double y) const { return E->value(x, y); }
  double f(double x, double y) const { return F->value(x, y); }
  double g(double x, double y) const { return G->value(x, y); }

  /// Second derivatives of a potential, kept symbolic (gives exact jets).
  static MetricTriple from_potential(const CompiledPotential& f, Domain2D d);
  static MetricTriple from_exprs(ExprPtr E, ExprPtr F, ExprPtr G, Domain2D d);
  /// Value-only callables; jets by central differences with step `fd_step`.
  static MetricTriple from_functions(std::function<double(double, double)> E,
                                     std::function<double(double, double)> F,
                                     std::function<double(double, double)> G,
                                     double fd_step, Domain2D d);
};

/// Positive-definiteness test with the scale-aware tolerance
/// E+G > tol*s and EG - F^2 > tol*s^2, s = max(|E|,|F|,|G|).
bool positive_definite(double E, double F, double G, double tol = 1e-12);

}  // namespace hesseflat
