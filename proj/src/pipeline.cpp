#include "hesseflat/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hesseflat/errors.hpp"

namespace hesseflat::pipeline {

namespace {

constexpr double kAdmissibilityMargin = 1e-12;

struct ConditionCheck {
  const char* name;
  bool ok;
};

}  // namespace

Profile validate_profile(ExprPtr phi, double u_lo, double u_hi, int samples) {
  if (!(u_hi > u_lo)) throw NumericalError("empty u-interval requested");
  Profile p;
  p.phi_ = std::move(phi);
  p.dphi_ = differentiate(p.phi_, Var::U);

  const ExprPtr u = make_var(Var::U);
  const ExprPtr one = make_num(1), two = make_num(2);

  // D = phi' u - phi, nowhere vanishing on the admissible interval.
  p.D_ = make_sub(make_mul(p.dphi_, u), p.phi_);
  // discriminant phi'^2 - 4 D (1 + D)
  p.disc_ = make_sub(make_mul(p.dphi_, p.dphi_),
                     make_mul(make_num(4), make_mul(p.D_, make_add(one, p.D_))));
  const ExprPtr sqrt_disc = make_fun(Expr::Fn::Sqrt, p.disc_);
  const ExprPtr twoD = make_mul(two, p.D_);
  p.lam_[0] = make_div(make_sub(p.dphi_, sqrt_disc), twoD);  // (-1)^1 branch
  p.lam_[1] = make_div(make_add(p.dphi_, sqrt_disc), twoD);  // (-1)^2 branch

  // Riemann-invariant slopes for r_i = v + p_i(u):
  //   p_i' = (lambda_i D - phi' + u + phi phi') / (u^2 + phi^2 - phi).
  const ExprPtr denom = make_sub(make_add(make_mul(u, u), make_mul(p.phi_, p.phi_)),
                                 p.phi_);
  for (int i = 0; i < 2; ++i) {
    const ExprPtr numer = make_add(
        make_sub(make_mul(p.lam_[i], p.D_), p.dphi_),
        make_add(u, make_mul(p.phi_, p.dphi_)));
    p.pslope_[i] = make_div(numer, denom);
  }

  // du/dt = 2 (phi - phi^2 - u^2) / sqrt(disc)  (positive by admissibility)
  p.uprime_ = make_div(
      make_mul(two, make_sub(make_sub(p.phi_, make_mul(p.phi_, p.phi_)),
                             make_mul(u, u))),
      sqrt_disc);

  // lambda2 - lambda1 = sqrt(disc)/D and its u-derivative
  const ExprPtr lamdiff = make_div(sqrt_disc, p.D_);
  const ExprPtr dlamdiff = differentiate(lamdiff, Var::U);
  // Gamma = (dlam2/dt - dlam1/dt) / (2 (lam1 - lam2)) = -u' dlamdiff / (2 lamdiff)
  p.gamma_ = make_neg(
      make_div(make_mul(p.uprime_, dlamdiff), make_mul(two, lamdiff)));
  p.dgamma_dt_ = make_mul(differentiate(p.gamma_, Var::U), p.uprime_);
  // Schroedinger-side potential V = Gamma^2 - dGamma/dt
  p.vpot_ = make_sub(make_mul(p.gamma_, p.gamma_), p.dgamma_dt_);

  // drift a = (dlam1/dt + dlam2/dt) / (lam2 - lam1) = u' (lamsum)' / lamdiff
  const ExprPtr lamsum = make_div(p.dphi_, p.D_);
  p.drift_ = make_div(make_mul(p.uprime_, differentiate(lamsum, Var::U)), lamdiff);
  p.ddrift_dt_ = make_mul(differentiate(p.drift_, Var::U), p.uprime_);

  // --- admissibility scan -------------------------------------------------
  auto conditions = [&](double uu) -> std::vector<ConditionCheck> {
    try {
      const double ph = evaluate(p.phi_, 0, 0, uu);
      const double dD = evaluate(p.D_, 0, 0, uu);
      const double disc = evaluate(p.disc_, 0, 0, uu);
      const double pd = ph - ph * ph - uu * uu;
      return {
          {"D(u) = phi'u - phi nonvanishing", std::abs(dD) > kAdmissibilityMargin},
          {"discriminant phi'^2 - 4D(1+D) > 0", disc > kAdmissibilityMargin},
          {"0 < phi < 1", ph > kAdmissibilityMargin && ph < 1.0 - kAdmissibilityMargin},
          {"u^2 < phi(1-phi)", pd > kAdmissibilityMargin},
      };
    } catch (const EvalDomainError&) {
      return {{"phi evaluates on the interval", false}};
    }
  };
  auto admissible = [&](double uu) {
    for (const auto& c : conditions(uu))
      if (!c.ok) return false;
    return true;
  };

  const int n = std::max(samples, 3);
  std::vector<char> ok(n);
  for (int i = 0; i < n; ++i) {
    const double uu = u_lo + (u_hi - u_lo) * double(i) / double(n - 1);
    ok[i] = admissible(uu) ? 1 : 0;
  }
  // longest run of admissible samples
  int best_lo = -1, best_len = 0, run_lo = -1;
  for (int i = 0; i <= n; ++i) {
    if (i < n && ok[i]) {
      if (run_lo < 0) run_lo = i;
    } else if (run_lo >= 0) {
      if (i - run_lo > best_len) {
        best_len = i - run_lo;
        best_lo = run_lo;
      }
      run_lo = -1;
    }
  }
  if (best_len == 0) {
    const double u0 = u_lo;
    for (const auto& c : conditions(u0))
      if (!c.ok)
        throw EmptyAdmissibleInterval(
            c.name, u0,
            "no admissible sub-interval: first violated condition '" +
                std::string(c.name) + "' at u = " + std::to_string(u0));
    throw EmptyAdmissibleInterval("unknown", u0, "no admissible sub-interval");
  }
  const double step = (u_hi - u_lo) / double(n - 1);
  double lo = u_lo + best_lo * step;
  double hi = u_lo + (best_lo + best_len - 1) * step;
  // refine the boundaries by bisection into the inadmissible neighbours
  if (best_lo > 0) {
    double bad = lo - step, good = lo;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (bad + good);
      (admissible(mid) ? good : bad) = mid;
    }
    lo = good;
  }
  if (best_lo + best_len < n) {
    double good = hi, bad = hi + step;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (bad + good);
      (admissible(mid) ? good : bad) = mid;
    }
    hi = good;
  }
  p.u_lo_ = lo;
  p.u_hi_ = hi;
  return p;
}

std::array<std::array<double, 2>, 2> hydrodynamic_matrix(const Profile& p,
                                                         double u) {
  if (u < p.u_lo() || u > p.u_hi())
    throw NumericalError("u outside the admissible interval");
  const double ph = p.phi(u), dph = p.dphi(u), D = p.D(u);
  return {{{(u + ph * dph) / D, (u * u + ph * ph - ph) / D},
           {(-1.0 - dph * dph) / D, (dph - u - ph * dph) / D}}};
}

std::pair<double, double> characteristic_velocities(const Profile& p, double u) {
  if (u < p.u_lo() || u > p.u_hi())
    throw NumericalError("u outside the admissible interval");
  if (!(p.discriminant(u) > 0))
    throw NegativeDiscriminant(u, "negative discriminant at u = " +
                                      std::to_string(u));
  return {p.lambda1(u), p.lambda2(u)};
}

CharacteristicData characteristic_data(const Profile& p, int n) {
  CharacteristicData cd;
  cd.u.resize(n);
  cd.D.resize(n);
  cd.disc.resize(n);
  cd.lambda1.resize(n);
  cd.lambda2.resize(n);
  for (int i = 0; i < n; ++i) {
    const double u = p.u_lo() + (p.u_hi() - p.u_lo()) * double(i) / double(n - 1);
    cd.u[i] = u;
    cd.D[i] = p.D(u);
    cd.disc[i] = p.discriminant(u);
    cd.lambda1[i] = p.lambda1(u);
    cd.lambda2[i] = p.lambda2(u);
    // branch labeling must track sign(D): lambda2 - lambda1 = sqrt(disc)/D
    if ((cd.lambda2[i] - cd.lambda1[i] > 0) != (cd.D[i] > 0))
      throw NumericalError("characteristic branch ordering drifted");
  }
  return cd;
}

PhaseTable phase_table(const Profile& p, double u0, int n) {
  if (u0 < p.u_lo() || u0 > p.u_hi())
    throw NumericalError("u0 outside the admissible interval");
  if (n < 9) throw NumericalError("phase grid too small");

  PhaseTable pt;
  const double h = (p.u_hi() - p.u_lo()) / double(n - 1);
  // snap u0 to the nearest grid node so both integrations share the grid
  const int i0 =
      int(std::lround((u0 - p.u_lo()) / h));
  pt.u0_ = p.u_lo() + i0 * h;

  std::vector<double> p1(n), p2(n), dp1(n), dp2(n);
  for (int i = 0; i < n; ++i) {
    const double u = p.u_lo() + i * h;
    dp1[i] = p.p_slope(1, u);
    dp2[i] = p.p_slope(2, u);
    if (!std::isfinite(dp1[i]) || !std::isfinite(dp2[i]))
      throw PhaseSingularity(u, "phase slope singular at u = " + std::to_string(u));
    if (!(dp1[i] > dp2[i]))
      throw MonotonicityViolation(
          u, "dp1/du <= dp2/du at u = " + std::to_string(u));
  }
  // classical 4th-order one-step integration of dp_i/du from the base node
  auto integrate = [&](int which, std::vector<double>& out) {
    auto slope = [&](double u) { return p.p_slope(which, u); };
    out[i0] = 0.0;
    for (int i = i0; i + 1 < n; ++i) {
      const double u = p.u_lo() + i * h;
      out[i + 1] = out[i] + h / 6.0 *
                                (slope(u) + 4.0 * slope(u + 0.5 * h) +
                                 slope(u + h));
    }
    for (int i = i0; i > 0; --i) {
      const double u = p.u_lo() + i * h;
      out[i - 1] = out[i] - h / 6.0 *
                                (slope(u) + 4.0 * slope(u - 0.5 * h) +
                                 slope(u - h));
    }
  };
  integrate(1, p1);
  integrate(2, p2);

  std::vector<double> t(n), dt(n);
  for (int i = 0; i < n; ++i) {
    t[i] = 0.5 * (p1[i] - p2[i]);
    dt[i] = 0.5 * (dp1[i] - dp2[i]);
    if (i && !(t[i] > t[i - 1]))
      throw MonotonicityViolation(p.u_lo() + i * h,
                                  "t(u) failed to increase across a cell");
  }
  pt.map_ = num::MonotoneHermiteMap(p.u_lo(), h, std::move(t), std::move(dt));
  pt.p1_ = num::MonotoneHermiteMap(p.u_lo(), h, std::move(p1), std::move(dp1));
  // p2 is strictly decreasing; store its negation to reuse the monotone map.
  for (auto& v : p2) v = -v;
  for (auto& v : dp2) v = -v;
  pt.p2_ = num::MonotoneHermiteMap(p.u_lo(), h, std::move(p2), std::move(dp2));
  return pt;
}

WaveData wave_data(const Profile& p, const PhaseTable& pt,
                   const CharacteristicData& cd, int n) {
  (void)cd;  // samples retained by callers for export; closed forms used here
  WaveData wd;
  const double span = pt.t_hi() - pt.t_lo();
  if (!(span > 0)) throw NumericalError("empty t-interval");
  const double h = span / double(n - 1);
  // anchor the grid at t0 = 0 so Numerov and mu start on a node
  const std::size_t m_lo = std::size_t(std::floor((0.0 - pt.t_lo()) / h));
  const std::size_t m_hi = std::size_t(std::floor((pt.t_hi() - 0.0) / h));
  wd.h = h;
  wd.anchor = m_lo;
  wd.t_lo = -double(m_lo) * h;
  const std::size_t total = m_lo + m_hi + 1;
  wd.t.resize(total);
  wd.gamma.resize(total);
  wd.V.resize(total);
  wd.drift.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    const double t = wd.t_lo + double(i) * h;
    wd.t[i] = t;
    const double u = pt.u_of_t(t);
    wd.gamma[i] = p.gamma(u);
    wd.V[i] = p.potential(u);
    wd.drift[i] = p.drift(u);
  }
  // mu = exp(-1/2 int Gamma), cumulative adaptive quadrature per cell
  std::vector<double> acc(total, 0.0);
  auto gamma_of_t = [&](double t) { return p.gamma(pt.u_of_t(t)); };
  for (std::size_t i = wd.anchor; i + 1 < total; ++i)
    acc[i + 1] = acc[i] + num::adaptive_simpson(gamma_of_t, wd.t[i], wd.t[i + 1],
                                                1e-12);
  for (std::size_t i = wd.anchor; i > 0; --i)
    acc[i - 1] = acc[i] - num::adaptive_simpson(gamma_of_t, wd.t[i - 1], wd.t[i],
                                                1e-12);
  wd.mu.resize(total);
  for (std::size_t i = 0; i < total; ++i) wd.mu[i] = std::exp(-0.5 * acc[i]);
  wd.mu_spline = num::CubicSpline(wd.t_lo, h, wd.mu);
  return wd;
}

std::vector<double> solve_schrodinger(const std::vector<double>& V, double t_lo,
                                      double step, std::size_t anchor, double k,
                                      double psi0, double dpsi0) {
  (void)t_lo;
  if (V.size() < 2) throw NumericalError("step too large: fewer than two nodes");
  if (!(k * k >= 0)) throw NumericalError("total energy k^2 must be >= 0");
  std::vector<double> Q(V.size());
  for (std::size_t i = 0; i < V.size(); ++i) Q[i] = V[i] - k * k;
  // Taylor starter derivatives of Q at the anchor (finite differences)
  double dQ0 = 0, ddQ0 = 0;
  if (V.size() >= 5) {
    const std::size_t a = std::min(std::max<std::size_t>(anchor, 2), V.size() - 3);
    double s[5];
    for (int j = -2; j <= 2; ++j) s[j + 2] = Q[a + j];
    dQ0 = num::d1_central5(s + 2, step);
    ddQ0 = num::d2_central5(s + 2, step);
  }
  return num::numerov<double>(Q, step, anchor, psi0, dpsi0, dQ0, ddQ0);
}

SpectralMode solve_mode(const Profile& p, const WaveData& wd, double A, double B,
                        double k, Complex psi0, Complex dpsi0) {
  (void)p;  // sampled V/drift suffice; the profile stays in the signature so
            // callers hold consistent inputs together
  if (k < 0) throw NumericalError("mode wavenumber k must be >= 0");
  SpectralMode m;
  m.A = A;
  m.B = B;
  m.k = k;
  m.psi0 = psi0;
  m.dpsi0 = dpsi0;

  const std::size_t n = wd.t.size();
  std::vector<Complex> Q(n);
  for (std::size_t i = 0; i < n; ++i)
    Q[i] = Complex(wd.V[i] - k * k, -wd.drift[i] * k);
  // exact Q-derivatives at the anchor via the profile's closed forms
  const double u0 = 0.0;  // t0 = 0 maps to u0; derivatives evaluated there
  (void)u0;
  double dV = 0, ddV = 0, dA = 0, ddA = 0;
  {
    // finite differences of the sampled data are accurate enough for the
    // O(h^5) starter
    const std::size_t a = std::min(std::max<std::size_t>(wd.anchor, 2), n - 3);
    double sv[5], sa[5];
    for (int j = -2; j <= 2; ++j) {
      sv[j + 2] = wd.V[a + j];
      sa[j + 2] = wd.drift[a + j];
    }
    dV = num::d1_central5(sv + 2, wd.h);
    ddV = num::d2_central5(sv + 2, wd.h);
    dA = num::d1_central5(sa + 2, wd.h);
    ddA = num::d2_central5(sa + 2, wd.h);
  }
  const Complex dQ0(dV, -dA * k), ddQ0(ddV, -ddA * k);
  m.w = num::numerov<Complex>(Q, wd.h, wd.anchor, psi0, dpsi0, dQ0, ddQ0);

  if (k == 0.0 && B != 0.0) {
    // theta-part A + B theta; the drift forces a correction q with
    // q'' = V q - a w0, q(t0) = q'(t0) = 0.
    m.q.assign(n, 0.0);
    bool drift_zero = true;
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(wd.drift[i]) > 1e-14) {
        drift_zero = false;
        break;
      }
    if (!drift_zero) {
      num::CubicSpline vs(wd.t_lo, wd.h, wd.V);
      num::CubicSpline as(wd.t_lo, wd.h, wd.drift);
      num::CubicSpline wr(wd.t_lo, wd.h, [&] {
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) r[i] = m.w[i].real();
        return r;
      }());
      auto rhs = [&](double t, double q, double dq, double* out_q,
                     double* out_dq) {
        *out_q = dq;
        *out_dq = vs(t) * q - as(t) * wr(t);
      };
      // RK4 on the coupled first-order system, both directions from anchor
      auto sweep = [&](std::ptrdiff_t dir) {
        double q = 0, dq = 0;
        std::ptrdiff_t i = std::ptrdiff_t(wd.anchor);
        const std::ptrdiff_t last = dir > 0 ? std::ptrdiff_t(n) - 1 : 0;
        while (i != last) {
          const double t = wd.t[std::size_t(i)];
          const double hh = dir * wd.h;
          double k1q, k1d, k2q, k2d, k3q, k3d, k4q, k4d;
          rhs(t, q, dq, &k1q, &k1d);
          rhs(t + 0.5 * hh, q + 0.5 * hh * k1q, dq + 0.5 * hh * k1d, &k2q, &k2d);
          rhs(t + 0.5 * hh, q + 0.5 * hh * k2q, dq + 0.5 * hh * k2d, &k3q, &k3d);
          rhs(t + hh, q + hh * k3q, dq + hh * k3d, &k4q, &k4d);
          q += hh / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q);
          dq += hh / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
          i += dir;
          m.q[std::size_t(i)] = q;
        }
      };
      sweep(+1);
      sweep(-1);
    }
  }
  return m;
}

Grid2D kg_superpose(const std::vector<SpectralMode>& modes, const WaveData& wd,
                    const std::vector<double>& tgrid,
                    const std::vector<double>& thetagrid) {
  Grid2D g;
  g.t = tgrid;
  g.theta = thetagrid;
  g.v.assign(tgrid.size() * thetagrid.size(), 0.0);
  const std::size_t n = wd.t.size();
  for (const auto& m : modes) {
    if (m.w.size() != n)
      throw NumericalError("inconsistent t-grids across modes");
    std::vector<double> re(n), im(n);
    for (std::size_t i = 0; i < n; ++i) {
      re[i] = m.w[i].real();
      im[i] = m.w[i].imag();
    }
    num::CubicSpline sre(wd.t_lo, wd.h, re), sim(wd.t_lo, wd.h, im);
    num::CubicSpline sq = m.q.empty() ? num::CubicSpline()
                                      : num::CubicSpline(wd.t_lo, wd.h, m.q);
    for (std::size_t it = 0; it < tgrid.size(); ++it) {
      const double t = tgrid[it];
      const double wr = sre(t), wi = sim(t);
      for (std::size_t ith = 0; ith < thetagrid.size(); ++ith) {
        const double th = thetagrid[ith];
        double val;
        if (m.k == 0.0) {
          const double qv = m.q.empty() ? 0.0 : sq(t);
          val = m.A * wr + m.B * (th * wr + qv);
        } else {
          const double c = std::cos(m.k * th), s = std::sin(m.k * th);
          // Re[(A - iB)(cos + i sin)(wr + i wi)]
          val = (m.A * c + m.B * s) * wr - (m.A * s - m.B * c) * wi;
        }
        g.at(it, ith) += val;
      }
    }
  }
  return g;
}

double kg_residual(const Grid2D& psi, const Profile& p, const PhaseTable& pt) {
  const std::size_t nt = psi.t.size(), nth = psi.theta.size();
  if (nt < 5 || nth < 5) throw NumericalError("grid too small for KG residual");
  const double ht = psi.t[1] - psi.t[0];
  const double hth = psi.theta[1] - psi.theta[0];
  double scale = 0, worst = 0;
  for (std::size_t it = 0; it < nt; ++it)
    for (std::size_t ith = 0; ith < nth; ++ith)
      scale = std::max(scale, std::abs(psi.at(it, ith)));
  if (!(scale > 0)) return 0.0;
  for (std::size_t it = 2; it + 2 < nt; ++it) {
    const double u = pt.u_of_t(psi.t[it]);
    const double V = p.potential(u);
    const double a = p.drift(u);
    for (std::size_t ith = 2; ith + 2 < nth; ++ith) {
      double st[5], sth[5];
      for (int j = -2; j <= 2; ++j) {
        st[j + 2] = psi.at(it + j, ith);
        sth[j + 2] = psi.at(it, ith + j);
      }
      const double ptt = num::d2_central5(st + 2, ht);
      const double pthth = num::d2_central5(sth + 2, hth);
      const double pth = num::d1_central5(sth + 2, hth);
      const double r = ptt - pthth + a * pth - V * psi.at(it, ith);
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst / scale;
}

}  // namespace hesseflat::pipeline
