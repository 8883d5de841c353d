#pragma once

#include <array>
#include <complex>
#include <vector>

#include "hesseflat/expr.hpp"
#include "hesseflat/numerics.hpp"

namespace hesseflat::pipeline {

using Complex = std::complex<double>;

/// Validated profile phi(u) with its derived closed-form quantities.
/// On the admissible interval: D = phi' u - phi is bounded away from zero,
/// the characteristic discriminant is positive, 0 < phi < 1 and
/// u^2 < phi (1 - phi) (positive-definiteness of the assembled triple).
class Profile {
 public:
  double u_lo() const { return u_lo_; }
  double u_hi() const { return u_hi_; }

  double phi(double u) const { return eval(phi_, u); }
  double dphi(double u) const { return eval(dphi_, u); }
  double D(double u) const { return eval(D_, u); }
  double discriminant(double u) const { return eval(disc_, u); }
  double lambda1(double u) const { return eval(lam_[0], u); }
  double lambda2(double u) const { return eval(lam_[1], u); }
  /// Riemann-invariant phase slopes dp_i/du for r_i = v + p_i(u).
  double p_slope(int i, double u) const { return eval(pslope_[i - 1], u); }
  /// du/dt along the conformal time coordinate 2t = p1(u) - p2(u).
  double du_dt(double u) const { return eval(uprime_, u); }
  /// Damping coefficient Gamma(t) expressed as a function of u.
  double gamma(double u) const { return eval(gamma_, u); }
  double dgamma_dt(double u) const { return eval(dgamma_dt_, u); }
  /// Schroedinger-side potential V = Gamma^2 - dGamma/dt as a function of u.
  double potential(double u) const { return eval(vpot_, u); }
  /// First-order theta coefficient a(t) of the reduced wave equation;
  /// identically zero exactly when phi is affine.
  double drift(double u) const { return eval(drift_, u); }
  double ddrift_dt(double u) const { return eval(ddrift_dt_, u); }

  const ExprPtr& phi_expr() const { return phi_; }

 private:
  friend Profile validate_profile(ExprPtr phi, double u_lo, double u_hi,
                                  int samples);
  static double eval(const ExprPtr& e, double u) { return evaluate(e, 0, 0, u); }

  ExprPtr phi_, dphi_, D_, disc_;
  std::array<ExprPtr, 2> lam_;
  std::array<ExprPtr, 2> pslope_;
  ExprPtr uprime_, gamma_, dgamma_dt_, vpot_, drift_, ddrift_dt_;
  double u_lo_ = 0, u_hi_ = 0;
};

/// Finds the largest sub-interval of [u_lo, u_hi] on which all Profile
/// invariants hold (sampled, then bisection-refined at the boundaries).
/// Throws EmptyAdmissibleInterval naming the first violated condition.
Profile validate_profile(ExprPtr phi, double u_lo, double u_hi,
                         int samples = 1001);

/// The 2x2 hydrodynamic coefficient matrix at u; trace phi'/D, det (1+D)/D.
std::array<std::array<double, 2>, 2> hydrodynamic_matrix(const Profile& p,
                                                         double u);

/// (lambda1, lambda2) with the fixed branch labels: i = 1 takes the -sqrt
/// branch of (phi' + (-1)^i sqrt(phi'^2 - 4D(1+D))) / (2D).
std::pair<double, double> characteristic_velocities(const Profile& p, double u);

/// Per-u samples of D, discriminant and the two characteristic velocities.
struct CharacteristicData {
  std::vector<double> u, D, disc, lambda1, lambda2;
};
CharacteristicData characteristic_data(const Profile& p, int n);

/// Integrated phases p_i(u) with p_i(u0) = 0 and the strictly monotone
/// conformal-time map 2t = p1(u) - p2(u) with its inverse u(t).
class PhaseTable {
 public:
  double u0() const { return u0_; }
  double t_lo() const { return map_.t_front(); }
  double t_hi() const { return map_.t_back(); }
  double t_of_u(double u) const { return map_.forward(u); }
  double u_of_t(double t) const { return map_.inverse(t); }
  double p1(double u) const { return p1_.forward(u); }
  double p2(double u) const { return -p2_.forward(u); }  // stored negated

 private:
  friend PhaseTable phase_table(const Profile& p, double u0, int n);
  double u0_ = 0;
  num::MonotoneHermiteMap map_;      // t(u), slopes (p1'-p2')/2
  num::MonotoneHermiteMap p1_, p2_;  // phases with exact slopes (p2 stored
                                     // sign-flipped internally when needed)
};

/// Integrates both phase ODEs (classical 4th-order one-step scheme) on an
/// n-point uniform u-grid; validates dp1/du > dp2/du everywhere.
PhaseTable phase_table(const Profile& p, double u0, int n = 2049);

/// Gamma, mu and the Schroedinger potential V sampled on a uniform t-grid
/// anchored at t0 = 0 (the image of u0). mu solves 2 mu' + Gamma mu = 0 by
/// adaptive quadrature with mu(t0) = 1.
struct WaveData {
  double t_lo = 0, h = 0;
  std::size_t anchor = 0;  // index of t0 = 0
  std::vector<double> t, gamma, mu, V, drift;

  double t_hi() const { return t.empty() ? 0.0 : t.back(); }
  double mu_at(double tt) const { return mu_spline(tt); }

  num::CubicSpline mu_spline;  // mu between grid nodes
};

WaveData wave_data(const Profile& p, const PhaseTable& pt,
                   const CharacteristicData& cd, int n = 4097);

/// Numerov integration of -psi'' + V psi = k^2 psi from the anchor node with
/// initial data (psi0, dpsi0). `V` must be sampled on the uniform grid
/// {t_lo + i*step}; the anchor is the node where t = t0.
std::vector<double> solve_schrodinger(const std::vector<double>& V, double t_lo,
                                      double step, std::size_t anchor, double k,
                                      double psi0, double dpsi0);

/// One separated mode of the reduced wave equation. For profiles with zero
/// drift the samples are real and solve -psi'' + V psi = k^2 psi; in general
/// w is complex and solves -w'' + (V - i a k) w = k^2 w.
struct SpectralMode {
  double A = 0, B = 0, k = 0;
  Complex psi0{1, 0}, dpsi0{0, 0};
  std::vector<Complex> w;    // on the WaveData grid
  std::vector<double> q;     // k = 0 drift correction (empty otherwise)
};

SpectralMode solve_mode(const Profile& p, const WaveData& wd, double A, double B,
                        double k, Complex psi0 = {1, 0}, Complex dpsi0 = {0, 0});

/// Psi(t, theta) = sum over modes of Re[(A - iB) e^{ik theta} w_k(t)];
/// k = 0 modes contribute A w0 + B (theta w0 + q).
struct Grid2D {
  std::vector<double> t, theta;
  std::vector<double> v;  // row-major: v[it * theta.size() + ith]
  double& at(std::size_t it, std::size_t ith) { return v[it * theta.size() + ith]; }
  double at(std::size_t it, std::size_t ith) const {
    return v[it * theta.size() + ith];
  }
};

Grid2D kg_superpose(const std::vector<SpectralMode>& modes, const WaveData& wd,
                    const std::vector<double>& tgrid,
                    const std::vector<double>& thetagrid);

/// Residual of the reduced wave equation
///   Psi_tt - Psi_thth + a(t) Psi_th - V(t) Psi = 0
/// on interior nodes (4th-order stencils), normalized by max |Psi|.
double kg_residual(const Grid2D& psi, const Profile& p, const PhaseTable& pt);

}  // namespace hesseflat::pipeline
