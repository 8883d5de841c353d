#include "hesseflat/chart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hesseflat/errors.hpp"
#include "hesseflat/geometry.hpp"

namespace hesseflat::chart {

pipeline::Grid2D recover_y(const pipeline::WaveData& wd,
                           const pipeline::Grid2D& psi) {
  pipeline::Grid2D y = psi;
  for (std::size_t it = 0; it < y.t.size(); ++it) {
    const double mu = wd.mu_at(y.t[it]);
    const double m2 = 1.0 / (mu * mu);
    for (std::size_t ith = 0; ith < y.theta.size(); ++ith) y.at(it, ith) *= m2;
  }
  return y;
}

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = lo + (hi - lo) * double(i) / double(n - 1);
  return v;
}

}  // namespace

ConformalChart build_chart(const pipeline::Profile& p,
                           const pipeline::PhaseTable& pt,
                           const pipeline::WaveData& wd,
                           const std::vector<pipeline::SpectralMode>& modes,
                           double t_lo, double t_hi, std::size_t nt,
                           double th_lo, double th_hi, std::size_t nth,
                           double closedness_tol) {
  pipeline::Grid2D psi = pipeline::kg_superpose(
      modes, wd, linspace(t_lo, t_hi, nt), linspace(th_lo, th_hi, nth));
  return build_chart_from_psi(p, pt, wd, psi, closedness_tol);
}

ConformalChart build_chart_from_psi(const pipeline::Profile& p,
                                    const pipeline::PhaseTable& pt,
                                    const pipeline::WaveData& wd,
                                    const pipeline::Grid2D& psi,
                                    double closedness_tol) {
  const std::size_t nt = psi.t.size(), nth = psi.theta.size();
  if (nt < 7 || nth < 7) throw NumericalError("chart grid too small");
  const double t_lo = psi.t.front(), t_hi = psi.t.back();
  const double th_lo = psi.theta.front();
  if (t_lo < wd.t.front() || t_hi > wd.t.back())
    throw NumericalError("chart t-range outside the wave-data interval");

  ConformalChart c;
  c.profile_ = p;
  c.phases_ = pt;
  c.t_ = psi.t;
  c.th_ = psi.theta;
  const double ht = c.t_[1] - c.t_[0];
  const double hth = c.th_[1] - c.th_[0];
  const std::size_t n = nt * nth;

  pipeline::Grid2D y = recover_y(wd, psi);
  c.psi_ = psi.v;
  c.y_ = y.v;
  c.u_.resize(n);
  c.v_.resize(n);
  c.lam1_.resize(nt);
  c.lam2_.resize(nt);
  std::vector<double> gamma_row(nt), drift_row(nt), lamdiff_row(nt);
  for (std::size_t it = 0; it < nt; ++it) {
    const double u = pt.u_of_t(c.t_[it]);
    c.lam1_[it] = p.lambda1(u);
    c.lam2_[it] = p.lambda2(u);
    gamma_row[it] = p.gamma(u);
    drift_row[it] = p.drift(u);
    lamdiff_row[it] = c.lam2_[it] - c.lam1_[it];
    const double pbar = 0.5 * (pt.p1(u) + pt.p2(u));
    for (std::size_t ith = 0; ith < nth; ++ith) {
      c.u_[c.idx(it, ith)] = u;
      c.v_[c.idx(it, ith)] = c.th_[ith] - pbar;
    }
  }

  // y_t and y_theta by 4th-order stencils, then the invariant derivatives
  std::vector<double> yt(n), yth(n);
  {
    std::vector<double> line;
    line.resize(std::max(nt, nth));
    for (std::size_t ith = 0; ith < nth; ++ith) {
      line.resize(nt);
      for (std::size_t it = 0; it < nt; ++it) line[it] = c.y_[c.idx(it, ith)];
      for (std::size_t it = 0; it < nt; ++it)
        yt[c.idx(it, ith)] = num::deriv1_at(line, it, ht);
    }
    for (std::size_t it = 0; it < nt; ++it) {
      line.resize(nth);
      for (std::size_t ith = 0; ith < nth; ++ith) line[ith] = c.y_[c.idx(it, ith)];
      for (std::size_t ith = 0; ith < nth; ++ith)
        yth[c.idx(it, ith)] = num::deriv1_at(line, ith, hth);
    }
  }
  c.y_r1_.resize(n);
  c.y_r2_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    c.y_r1_[i] = 0.5 * (yth[i] + yt[i]);
    c.y_r2_[i] = 0.5 * (yth[i] - yt[i]);
  }

  // closedness of dx = -lambda2 y_r1 dr1 - lambda1 y_r2 dr2 on the interior:
  //   1/4 [ (lam2-lam1)(y_thth - y_tt) - (dlam1+dlam2) y_th - (dlam2-dlam1) y_t ]
  // with dlam1+dlam2 = a (lam2-lam1) and dlam2-dlam1 = -2 Gamma (lam2-lam1).
  {
    double worst = 0, scale = 0;
    std::vector<double> line(std::max(nt, nth));
    for (std::size_t it = 2; it + 2 < nt; ++it) {
      const double dl = lamdiff_row[it];
      const double a = drift_row[it];
      const double g2 = -2.0 * gamma_row[it];
      for (std::size_t ith = 2; ith + 2 < nth; ++ith) {
        double st[5], sth[5];
        for (int j = -2; j <= 2; ++j) {
          st[j + 2] = c.y_[c.idx(it + j, ith)];
          sth[j + 2] = c.y_[c.idx(it, ith + j)];
        }
        const double ytt = num::d2_central5(st + 2, ht);
        const double ythth = num::d2_central5(sth + 2, hth);
        const std::size_t id = c.idx(it, ith);
        const double T1 = dl * (ythth - ytt);
        const double T2 = a * dl * yth[id];
        const double T3 = g2 * dl * yt[id];
        worst = std::max(worst, 0.25 * std::abs(T1 - T2 - T3));
        scale = std::max({scale, 0.25 * std::abs(dl * ythth),
                          0.25 * std::abs(dl * ytt), 0.25 * std::abs(T2),
                          0.25 * std::abs(T3)});
      }
    }
    c.closedness_residual_ = worst;
    c.closedness_scale_ = std::max(scale, 1e-300);
    if (worst > closedness_tol * c.closedness_scale_)
      throw NotClosed(worst, c.closedness_scale_,
                      "x-form not closed: residual " + std::to_string(worst) +
                          " vs scale " + std::to_string(c.closedness_scale_) +
                          " (Psi does not solve the reduced wave equation)");
  }

  // Jacobian degeneracy: det d(x,y)/d(r1,r2) = (lam1-lam2) y_r1 y_r2
  {
    double ymax = 0;
    for (std::size_t i = 0; i < n; ++i)
      ymax = std::max({ymax, std::abs(c.y_r1_[i]), std::abs(c.y_r2_[i])});
    if (!(ymax > 0)) throw NumericalError("y has vanishing invariant derivatives");
    for (std::size_t it = 0; it < nt; ++it)
      for (std::size_t ith = 0; ith < nth; ++ith) {
        const std::size_t id = c.idx(it, ith);
        if (std::abs(c.y_r1_[id]) < 1e-6 * ymax ||
            std::abs(c.y_r2_[id]) < 1e-6 * ymax)
          throw SingularJacobian(int(it), int(ith),
                                 "chart Jacobian singular at node (" +
                                     std::to_string(it) + ", " +
                                     std::to_string(ith) + ")");
      }
  }

  // x by line integration: dx = P dt + Q dtheta with
  //   P = -lambda2 y_r1 + lambda1 y_r2,  Q = -(lambda2 y_r1 + lambda1 y_r2)
  std::vector<double> P(n), Q(n);
  for (std::size_t it = 0; it < nt; ++it)
    for (std::size_t ith = 0; ith < nth; ++ith) {
      const std::size_t id = c.idx(it, ith);
      const double l1 = c.lam1_[it], l2 = c.lam2_[it];
      P[id] = -l2 * c.y_r1_[id] + l1 * c.y_r2_[id];
      Q[id] = -(l2 * c.y_r1_[id] + l1 * c.y_r2_[id]);
    }
  c.base_it_ = nt / 2;
  c.base_ith_ = nth / 2;
  auto sweep = [&](bool horizontal_first) {
    std::vector<double> x(n, 0.0);
    if (horizontal_first) {
      std::vector<double> row(nth);
      for (std::size_t ith = 0; ith < nth; ++ith)
        row[ith] = Q[c.idx(c.base_it_, ith)];
      const auto rowint = num::cumulative_integral(row, hth);
      std::vector<double> col(nt);
      for (std::size_t ith = 0; ith < nth; ++ith) {
        const double x_row = rowint[ith] - rowint[c.base_ith_];
        for (std::size_t it = 0; it < nt; ++it) col[it] = P[c.idx(it, ith)];
        const auto colint = num::cumulative_integral(col, ht);
        for (std::size_t it = 0; it < nt; ++it)
          x[c.idx(it, ith)] = x_row + colint[it] - colint[c.base_it_];
      }
    } else {
      std::vector<double> col(nt);
      for (std::size_t it = 0; it < nt; ++it) col[it] = P[c.idx(it, c.base_ith_)];
      const auto colint = num::cumulative_integral(col, ht);
      std::vector<double> row(nth);
      for (std::size_t it = 0; it < nt; ++it) {
        const double x_col = colint[it] - colint[c.base_it_];
        for (std::size_t ith = 0; ith < nth; ++ith) row[ith] = Q[c.idx(it, ith)];
        const auto rowint = num::cumulative_integral(row, hth);
        for (std::size_t ith = 0; ith < nth; ++ith)
          x[c.idx(it, ith)] = x_col + rowint[ith] - rowint[c.base_ith_];
      }
    }
    return x;
  };
  c.x_ = sweep(true);
  const auto x_alt = sweep(false);
  double mismatch = 0;
  for (std::size_t i = 0; i < n; ++i)
    mismatch = std::max(mismatch, std::abs(c.x_[i] - x_alt[i]));
  c.cross_sweep_mismatch_ = mismatch;

  // assemble the metric triple; positivity is implied by admissibility but
  // asserted to catch interval drift
  c.E_.resize(n);
  c.F_.resize(n);
  c.G_.resize(n);
  for (std::size_t it = 0; it < nt; ++it) {
    const double u = c.u_[c.idx(it, 0)];
    const double ph = p.phi(u);
    for (std::size_t ith = 0; ith < nth; ++ith) {
      const std::size_t id = c.idx(it, ith);
      const double ev = std::exp(c.v_[id]);
      c.E_[id] = ph * ev;
      c.F_[id] = u * ev;
      c.G_[id] = (1.0 - ph) * ev;
      if (!positive_definite(c.E_[id], c.F_[id], c.G_[id]))
        throw PositivityViolation(int(it), int(ith),
                                  "assembled metric not positive definite at (" +
                                      std::to_string(it) + ", " +
                                      std::to_string(ith) + ")");
    }
  }

  c.bb_[0] = *std::min_element(c.x_.begin(), c.x_.end());
  c.bb_[1] = *std::max_element(c.x_.begin(), c.x_.end());
  c.bb_[2] = *std::min_element(c.y_.begin(), c.y_.end());
  c.bb_[3] = *std::max_element(c.y_.begin(), c.y_.end());

  c.x_interp_ = num::Bicubic(th_lo, hth, int(nth), t_lo, ht, int(nt), [&] {
    // Bicubic expects row-major with x-fastest; our tables are theta-fastest
    std::vector<double> v(n);
    for (std::size_t it = 0; it < nt; ++it)
      for (std::size_t ith = 0; ith < nth; ++ith)
        v[it * nth + ith] = c.x_[c.idx(it, ith)];
    return v;
  }());
  c.y_interp_ = num::Bicubic(th_lo, hth, int(nth), t_lo, ht, int(nt), [&] {
    std::vector<double> v(n);
    for (std::size_t it = 0; it < nt; ++it)
      for (std::size_t ith = 0; ith < nth; ++ith)
        v[it * nth + ith] = c.y_[c.idx(it, ith)];
    return v;
  }());
  return c;
}

void ConformalChart::forward(double t, double theta, double* x, double* y) const {
  if (x) *x = x_interp_(theta, t);
  if (y) *y = y_interp_(theta, t);
}

void ConformalChart::metric_at(double t, double theta, double* E, double* F,
                               double* G) const {
  const double u = phases_.u_of_t(t);
  const double pbar = 0.5 * (phases_.p1(u) + phases_.p2(u));
  const double v = theta - pbar;
  const double ev = std::exp(v);
  const double ph = profile_.phi(u);
  if (E) *E = ph * ev;
  if (F) *F = u * ev;
  if (G) *G = (1.0 - ph) * ev;
}

ConformalChart::Query ConformalChart::invert(double x, double y, double tol,
                                             int max_iter) const {
  const double pad = 0.05 * std::max(bb_[1] - bb_[0], bb_[3] - bb_[2]);
  if (x < bb_[0] - pad || x > bb_[1] + pad || y < bb_[2] - pad || y > bb_[3] + pad)
    throw OutsideChart(x, y, "query outside the chart image bounding box");

  // nearest-node seed (strided scan; Newton bridges the remaining cells)
  const std::size_t stride = std::max<std::size_t>(1, std::min(nt(), nth()) / 32);
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < nt(); it += stride)
    for (std::size_t ith = 0; ith < nth(); ith += stride) {
      const std::size_t i = idx(it, ith);
      const double d = (x_[i] - x) * (x_[i] - x) + (y_[i] - y) * (y_[i] - y);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
  return invert_seeded(x, y, t_[best / nth()], th_[best % nth()], tol, max_iter);
}

ConformalChart::Query ConformalChart::invert_seeded(double x, double y,
                                                    double t_seed, double th_seed,
                                                    double tol,
                                                    int max_iter) const {
  const double pad = 0.05 * std::max(bb_[1] - bb_[0], bb_[3] - bb_[2]);
  if (x < bb_[0] - pad || x > bb_[1] + pad || y < bb_[2] - pad || y > bb_[3] + pad)
    throw OutsideChart(x, y, "query outside the chart image bounding box");
  double t = t_seed, th = th_seed;
  const double t_min = t_.front(), t_max = t_.back();
  const double th_min = th_.front(), th_max = th_.back();
  const double scale = std::max({1.0, std::abs(x), std::abs(y)});

  double last_res = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    double fx, fy, dxdth, dxdt, dydth, dydt;
    x_interp_.evaluate(th, t, &fx, &dxdth, &dxdt);
    y_interp_.evaluate(th, t, &fy, &dydth, &dydt);
    const double rx = fx - x, ry = fy - y;
    last_res = std::max(std::abs(rx), std::abs(ry));
    if (last_res < tol * scale) {
      const double u = phases_.u_of_t(t);
      const double pbar = 0.5 * (phases_.p1(u) + phases_.p2(u));
      return Query{t, th, u, th - pbar};
    }
    const double det = dxdt * dydth - dxdth * dydt;
    if (det == 0.0)
      throw NewtonDivergence(last_res, "singular Newton step in invert");
    double dt = (-rx * dydth + ry * dxdth) / det;
    double dth = (-ry * dxdt + rx * dydt) / det;
    t = std::clamp(t + dt, t_min, t_max);
    th = std::clamp(th + dth, th_min, th_max);
  }
  // converged onto the boundary means the query lies outside the image
  const bool on_edge = t <= t_min || t >= t_max || th <= th_min || th >= th_max;
  if (on_edge)
    throw OutsideChart(x, y, "no chart preimage (Newton pinned to the boundary)");
  throw NewtonDivergence(last_res,
                         "chart inversion did not converge (last residual " +
                             std::to_string(last_res) + ")");
}

MetricFn metric_function(const ConformalChart& c) {
  // warm-started inversion: consecutive queries along segments are close
  auto seed = std::make_shared<std::pair<double, double>>(
      c.tgrid()[c.nt() / 2], c.thgrid()[c.nth() / 2]);
  return [&c, seed](double x, double y, double* E, double* F, double* G) {
    ConformalChart::Query q{};
    try {
      q = c.invert_seeded(x, y, seed->first, seed->second);
    } catch (const NewtonDivergence&) {
      q = c.invert(x, y);
    }
    seed->first = q.t;
    seed->second = q.theta;
    c.metric_at(q.t, q.theta, E, F, G);
  };
}

ReconstructedPotential reconstruct_potential(const MetricFn& H, double base_x,
                                             double base_y, const StarDomain& dom,
                                             double quad_tol) {
  if (dom.nx < 7 || dom.ny < 7)
    throw NumericalError("reconstruction grid too small");
  ReconstructedPotential rp;
  rp.base_x = base_x;
  rp.base_y = base_y;
  rp.dom = dom;
  rp.f.assign(dom.nx * dom.ny, 0.0);

  // star-shape validation: every segment base -> node must stay in the image
  const int probes = 33;
  for (std::size_t j = 0; j < dom.ny; ++j)
    for (std::size_t i = 0; i < dom.nx; ++i) {
      const double px = rp.node_x(i), py = rp.node_y(j);
      for (int s = 0; s <= probes; ++s) {
        const double sr = double(s) / probes;
        double E, F, G;
        try {
          H(base_x + sr * (px - base_x), base_y + sr * (py - base_y), &E, &F, &G);
        } catch (const OutsideChart&) {
          throw NotStarShaped(px, py,
                              "segment to (" + std::to_string(px) + ", " +
                                  std::to_string(py) + ") leaves the chart image");
        }
      }
    }

  for (std::size_t j = 0; j < dom.ny; ++j)
    for (std::size_t i = 0; i < dom.nx; ++i) {
      const double dx = rp.node_x(i) - base_x, dy = rp.node_y(j) - base_y;
      if (dx == 0 && dy == 0) continue;
      auto integrand = [&](double s) {
        double E, F, G;
        H(base_x + s * dx, base_y + s * dy, &E, &F, &G);
        return (1.0 - s) * (dx * dx * E + 2.0 * dx * dy * F + dy * dy * G);
      };
      try {
        rp.f[j * dom.nx + i] =
            num::adaptive_simpson(integrand, 0.0, 1.0, quad_tol);
      } catch (const OutsideChart&) {
        // refinement stepped past the sampled probes near a wiggly boundary
        throw NotStarShaped(rp.node_x(i), rp.node_y(j),
                            "segment to (" + std::to_string(rp.node_x(i)) +
                                ", " + std::to_string(rp.node_y(j)) +
                                ") leaves the chart image");
      }
    }
  rp.interp = num::Bicubic(dom.x_lo, rp.hx(), int(dom.nx), dom.y_lo, rp.hy(),
                           int(dom.ny), rp.f);
  return rp;
}

RoundTripReport verify_roundtrip(const ReconstructedPotential& rp,
                                 const MetricFn& H, const MetricTriple* exact) {
  RoundTripReport rep;
  const std::size_t nx = rp.dom.nx, ny = rp.dom.ny;
  const double hx = rp.hx(), hy = rp.hy();

  // metric tables at the reconstruction nodes
  std::vector<double> E(nx * ny), F(nx * ny), G(nx * ny);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i)
      H(rp.node_x(i), rp.node_y(j), &E[j * nx + i], &F[j * nx + i],
        &G[j * nx + i]);

  double entry_scale = 0;
  for (std::size_t i = 0; i < E.size(); ++i)
    entry_scale = std::max(
        {entry_scale, std::abs(E[i]), std::abs(F[i]), std::abs(G[i])});

  // Hessian of the reconstructed f vs the assembled triple (interior nodes)
  {
    double worst = 0;
    std::vector<double> line(std::max(nx, ny));
    // fxx along rows, fyy along columns, fxy nested
    std::vector<double> fx(nx * ny);
    for (std::size_t j = 0; j < ny; ++j) {
      line.resize(nx);
      for (std::size_t i = 0; i < nx; ++i) line[i] = rp.f[j * nx + i];
      for (std::size_t i = 0; i < nx; ++i)
        fx[j * nx + i] = num::deriv1_at(line, i, hx);
    }
    for (std::size_t j = 2; j + 2 < ny; ++j)
      for (std::size_t i = 2; i + 2 < nx; ++i) {
        double sx[5], sy[5], sxy[5];
        for (int k = -2; k <= 2; ++k) {
          sx[k + 2] = rp.f[j * nx + (i + k)];
          sy[k + 2] = rp.f[(j + k) * nx + i];
          sxy[k + 2] = fx[(j + k) * nx + i];
        }
        const double fxx = num::d2_central5(sx + 2, hx);
        const double fyy = num::d2_central5(sy + 2, hy);
        const double fxy = num::d1_central5(sxy + 2, hy);
        worst = std::max({worst, std::abs(fxx - E[j * nx + i]),
                          std::abs(fxy - F[j * nx + i]),
                          std::abs(fyy - G[j * nx + i])});
      }
    rep.hessian_rel_err = worst / entry_scale;
  }

  // integrability of the assembled fields: E_y = F_x and F_y = G_x
  if (exact) {
    double worst = 0, dscale = 0;
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        const Jet2 je = exact->E->jet(rp.node_x(i), rp.node_y(j));
        const Jet2 jf = exact->F->jet(rp.node_x(i), rp.node_y(j));
        const Jet2 jg = exact->G->jet(rp.node_x(i), rp.node_y(j));
        worst = std::max({worst, std::abs(je.y - jf.x), std::abs(jf.y - jg.x)});
        dscale = std::max({dscale, std::abs(je.y), std::abs(jf.x),
                           std::abs(jf.y), std::abs(jg.x)});
      }
    rep.integrability_max = worst / std::max(dscale, 1e-300);
  } else {
    double worst = 0, dscale = 0;
    std::vector<double> line(std::max(nx, ny));
    auto ddx = [&](const std::vector<double>& tab, std::size_t i, std::size_t j) {
      line.resize(nx);
      for (std::size_t k = 0; k < nx; ++k) line[k] = tab[j * nx + k];
      return num::deriv1_at(line, i, hx);
    };
    auto ddy = [&](const std::vector<double>& tab, std::size_t i, std::size_t j) {
      line.resize(ny);
      for (std::size_t k = 0; k < ny; ++k) line[k] = tab[k * nx + i];
      return num::deriv1_at(line, j, hy);
    };
    for (std::size_t j = 2; j + 2 < ny; ++j)
      for (std::size_t i = 2; i + 2 < nx; ++i) {
        const double Ey = ddy(E, i, j), Fx = ddx(F, i, j);
        const double Fy = ddy(F, i, j), Gx = ddx(G, i, j);
        worst = std::max({worst, std::abs(Ey - Fx), std::abs(Fy - Gx)});
        dscale = std::max(
            {dscale, std::abs(Ey), std::abs(Fx), std::abs(Fy), std::abs(Gx)});
      }
    rep.integrability_max = worst / std::max(dscale, 1e-300);
  }

  // positivity minima
  {
    double tr = std::numeric_limits<double>::infinity(), de = tr;
    for (std::size_t i = 0; i < E.size(); ++i) {
      tr = std::min(tr, E[i] + G[i]);
      de = std::min(de, E[i] * G[i] - F[i] * F[i]);
    }
    rep.pd_min_trace = tr;
    rep.pd_min_det = de;
  }

  // flatness of f through a strided subgrid (wider effective step keeps the
  // third-derivative noise below the curvature tolerances)
  {
    const std::size_t stride = std::max<std::size_t>(1, (std::min(nx, ny) - 1) / 8);
    const std::size_t snx = (nx - 1) / stride + 1, sny = (ny - 1) / stride + 1;
    std::vector<double> sub(snx * sny);
    for (std::size_t j = 0; j < sny; ++j)
      for (std::size_t i = 0; i < snx; ++i)
        sub[j * snx + i] = rp.f[(j * stride) * nx + i * stride];
    SampledField sf(rp.dom.x_lo, hx * double(stride), int(snx), rp.dom.y_lo,
                    hy * double(stride), int(sny), std::move(sub));
    double kmax = 0, fmax = 0;
    for (std::size_t j = 3; j + 3 < sny; ++j)
      for (std::size_t i = 3; i + 3 < snx; ++i) {
        const double x = rp.dom.x_lo + double(i * stride) * hx;
        const double y = rp.dom.y_lo + double(j * stride) * hy;
        const DiffBundle d = sf.bundle(x, y);
        const double det2 = d.fxx * d.fyy - d.fxy * d.fxy;
        const double det3 =
            d.fxx * (d.fxxy * d.fyyy - d.fxyy * d.fxyy) -
            d.fxxx * (d.fxy * d.fyyy - d.fyy * d.fxyy) +
            d.fxxy * (d.fxy * d.fxyy - d.fyy * d.fxxy);
        fmax = std::max(fmax, std::abs(det3));
        if (det2 > 0) kmax = std::max(kmax, std::abs(det3 / (4.0 * det2 * det2)));
      }
    rep.flatness_max = fmax;
    rep.curvature_max = kmax;
  }

  // with exact jets the Gaussian curvature comes from the independent
  // Brioschi oracle instead of third differences of the f-grid
  if (exact) {
    double kmax = 0;
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i)
        kmax = std::max(kmax, std::abs(geometry::brioschi_oracle(
                                  *exact, rp.node_x(i), rp.node_y(j))));
    rep.curvature_max = kmax;
  }

  // nondegeneracy samples: brackets of the assembled fields
  {
    double worst = std::numeric_limits<double>::infinity();
    bool crossing = false;
    std::vector<double> line(std::max(nx, ny));
    auto ddx = [&](const std::vector<double>& tab, std::size_t i, std::size_t j) {
      line.resize(nx);
      for (std::size_t k = 0; k < nx; ++k) line[k] = tab[j * nx + k];
      return num::deriv1_at(line, i, hx);
    };
    auto ddy = [&](const std::vector<double>& tab, std::size_t i, std::size_t j) {
      line.resize(ny);
      for (std::size_t k = 0; k < ny; ++k) line[k] = tab[k * nx + i];
      return num::deriv1_at(line, j, hy);
    };
    for (std::size_t j = 2; j + 2 < ny; ++j)
      for (std::size_t i = 2; i + 2 < nx; ++i) {
        double Ex, Ey, Fx, Fy, Gx, Gy;
        if (exact) {
          const Jet2 je = exact->E->jet(rp.node_x(i), rp.node_y(j));
          const Jet2 jf = exact->F->jet(rp.node_x(i), rp.node_y(j));
          const Jet2 jg = exact->G->jet(rp.node_x(i), rp.node_y(j));
          Ex = je.x; Ey = je.y; Fx = jf.x; Fy = jf.y; Gx = jg.x; Gy = jg.y;
        } else {
          Ex = ddx(E, i, j); Ey = ddy(E, i, j);
          Fx = ddx(F, i, j); Fy = ddy(F, i, j);
          Gx = ddx(G, i, j); Gy = ddy(G, i, j);
        }
        const double b1 = (Ex + Gx) * Fy - (Ey + Gy) * Fx;  // {E+G, F}
        const double b2 = Ex * Fy - Ey * Fx;                // {E, F}
        const double b3 = Gx * Fy - Gy * Fx;                // {G, F}
        const double q1 = b1 * b1;
        const double q2 = b2 * b2 + b3 * b3;
        worst = std::min({worst, q1, q2});
        const double s = std::max({std::abs(Ex), std::abs(Ey), std::abs(Fx),
                                   std::abs(Fy), std::abs(Gx), std::abs(Gy)});
        if (q1 < 1e-12 * s * s * s * s || q2 < 1e-12 * s * s * s * s)
          crossing = true;
      }
    rep.nondegeneracy_min = worst;
    rep.nondegeneracy_zero_crossing = crossing;
  }
  return rep;
}

}  // namespace hesseflat::chart
