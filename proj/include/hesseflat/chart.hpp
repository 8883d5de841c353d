#pragma once

#include <functional>
#include <vector>

#include "hesseflat/field.hpp"
#include "hesseflat/pipeline.hpp"

namespace hesseflat::chart {

/// Rectangular (t, theta) grid carrying the recovered Hesse coordinates and
/// the assembled metric. Immutable once built.
class ConformalChart {
 public:
  const std::vector<double>& tgrid() const { return t_; }
  const std::vector<double>& thgrid() const { return th_; }
  std::size_t nt() const { return t_.size(); }
  std::size_t nth() const { return th_.size(); }
  std::size_t idx(std::size_t it, std::size_t ith) const { return it * nth() + ith; }

  // node tables
  const std::vector<double>& u() const { return u_; }
  const std::vector<double>& v() const { return v_; }
  const std::vector<double>& psi() const { return psi_; }
  const std::vector<double>& y() const { return y_; }
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& y_r1() const { return y_r1_; }
  const std::vector<double>& y_r2() const { return y_r2_; }
  const std::vector<double>& E() const { return E_; }
  const std::vector<double>& F() const { return F_; }
  const std::vector<double>& G() const { return G_; }

  double lambda1_at(std::size_t it) const { return lam1_[it]; }
  double lambda2_at(std::size_t it) const { return lam2_[it]; }

  std::size_t base_it() const { return base_it_; }
  std::size_t base_ith() const { return base_ith_; }

  /// max |x_hv - x_vh| between the two sweep orders (path-independence
  /// diagnostic, doubles as a closedness cross-check).
  double cross_sweep_mismatch() const { return cross_sweep_mismatch_; }
  double closedness_residual() const { return closedness_residual_; }
  double closedness_scale() const { return closedness_scale_; }

  /// Forward chart map via the bicubic interpolants (exact at nodes).
  void forward(double t, double theta, double* x, double* y) const;

  /// Inverts the chart at (x, y): Newton on the bicubic interpolants from the
  /// nearest-node seed; returns (t, theta) and the derived (u, v).
  struct Query {
    double t, theta, u, v;
  };
  Query invert(double x, double y, double tol = 1e-12, int max_iter = 50) const;
  /// Same, Newton-seeded at (t_seed, theta_seed).
  Query invert_seeded(double x, double y, double t_seed, double theta_seed,
                      double tol = 1e-12, int max_iter = 50) const;

  /// Metric triple at a chart point, from the profile's closed forms.
  void metric_at(double t, double theta, double* E, double* F, double* G) const;

  const pipeline::Profile& profile() const { return profile_; }
  const pipeline::PhaseTable& phases() const { return phases_; }

 private:
  friend ConformalChart build_chart_from_psi(const pipeline::Profile& p,
                                             const pipeline::PhaseTable& pt,
                                             const pipeline::WaveData& wd,
                                             const pipeline::Grid2D& psi,
                                             double closedness_tol);
  std::vector<double> t_, th_;
  std::vector<double> u_, v_, psi_, y_, x_, y_r1_, y_r2_, E_, F_, G_;
  std::vector<double> lam1_, lam2_;  // per t-row
  std::size_t base_it_ = 0, base_ith_ = 0;
  double cross_sweep_mismatch_ = 0, closedness_residual_ = 0, closedness_scale_ = 0;
  double bb_[4] = {0, 0, 0, 0};  // x/y bounding box of the image
  num::Bicubic x_interp_, y_interp_;
  pipeline::Profile profile_;
  pipeline::PhaseTable phases_;
};

/// y = mu^-2 Psi on the shared t-grid.
pipeline::Grid2D recover_y(const pipeline::WaveData& wd, const pipeline::Grid2D& psi);

/// Builds the full chart: superposes the modes, recovers y and its invariant
/// derivatives, checks closedness of dx = -lambda2 y_r1 dr1 - lambda1 y_r2 dr2
/// (throws NotClosed), integrates x along grid lines from the base node
/// (x(base) = 0, horizontal then vertical, cross-order mismatch recorded) and
/// assembles E = phi e^v, F = u e^v, G = (1-phi) e^v (throws
/// PositivityViolation or SingularJacobian on degenerate nodes).
ConformalChart build_chart(const pipeline::Profile& p,
                           const pipeline::PhaseTable& pt,
                           const pipeline::WaveData& wd,
                           const std::vector<pipeline::SpectralMode>& modes,
                           double t_lo, double t_hi, std::size_t nt,
                           double th_lo, double th_hi, std::size_t nth,
                           double closedness_tol = 1e-6);

/// Same, from an externally supplied Psi grid (used by tests and the
/// fault-injection controls).
ConformalChart build_chart_from_psi(const pipeline::Profile& p,
                                    const pipeline::PhaseTable& pt,
                                    const pipeline::WaveData& wd,
                                    const pipeline::Grid2D& psi,
                                    double closedness_tol = 1e-6);

/// Metric as a function of the Hesse coordinates; throws OutsideChart beyond
/// the chart image.
using MetricFn =
    std::function<void(double x, double y, double* E, double* F, double* G)>;

MetricFn metric_function(const ConformalChart& c);

struct StarDomain {
  double x_lo, x_hi, y_lo, y_hi;
  std::size_t nx = 21, ny = 21;
};

/// Potential reconstructed by the radial double integration
///   f(base + d) = int_0^1 (1-s) d^T H(base + s d) d ds
/// over a star-shaped neighborhood; gauge f(base) = 0, grad f(base) = 0.
struct ReconstructedPotential {
  double base_x = 0, base_y = 0;
  StarDomain dom;
  std::vector<double> f;  // row-major iy*nx+ix
  double hx() const { return (dom.x_hi - dom.x_lo) / double(dom.nx - 1); }
  double hy() const { return (dom.y_hi - dom.y_lo) / double(dom.ny - 1); }
  double node_x(std::size_t i) const { return dom.x_lo + double(i) * hx(); }
  double node_y(std::size_t j) const { return dom.y_lo + double(j) * hy(); }
  num::Bicubic interp;
};

ReconstructedPotential reconstruct_potential(const MetricFn& H, double base_x,
                                             double base_y, const StarDomain& dom,
                                             double quad_tol = 1e-12);

/// Diagnostics of the reconstructed potential against the assembled metric.
struct RoundTripReport {
  double hessian_rel_err = 0;    // max |Hess f - (E,F,G)| / max |entry|
  double integrability_max = 0;  // max(|E_y - F_x|, |F_y - G_x|) relative
  double flatness_max = 0;       // max |det3(f)| (raw)
  double curvature_max = 0;      // max |K| (see below)
  double pd_min_trace = 0, pd_min_det = 0;
  double nondegeneracy_min = 0;  // min of {E+G,F}^2 and {E,F}^2 + {G,F}^2
  bool nondegeneracy_zero_crossing = false;
};

/// When `exact` carries the metric with derivative jets (closed-form cases),
/// integrability, curvature (Brioschi) and the bracket samples use the exact
/// jets; otherwise everything comes from finite differences of the sampled
/// fields and the f-grid, with curvature_max the |K| of the reconstructed f
/// on a strided interior subgrid.
RoundTripReport verify_roundtrip(const ReconstructedPotential& rp, const MetricFn& H,
                                 const MetricTriple* exact = nullptr);

}  // namespace hesseflat::chart
