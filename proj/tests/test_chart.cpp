#include <doctest.h>

#include <cmath>
#include <random>

#include "hesseflat/chart.hpp"
#include "hesseflat/numerics.hpp"

using namespace hesseflat;
using namespace hesseflat::chart;
using pipeline::characteristic_data;
using pipeline::phase_table;
using pipeline::solve_mode;
using pipeline::validate_profile;
using pipeline::wave_data;

namespace {

struct HalfFixture {
  pipeline::Profile p;
  pipeline::PhaseTable pt;
  pipeline::WaveData wd;
  std::vector<pipeline::SpectralMode> modes;
};

HalfFixture half_fixture() {
  auto p = validate_profile(parse_expression("1/2"), -0.45, 0.45);
  auto pt = phase_table(p, 0.0, 2049);
  auto wd = wave_data(p, pt, characteristic_data(p, 101), 4097);
  std::vector<pipeline::SpectralMode> modes{solve_mode(p, wd, 1.0, 0.0, 1.0)};
  return {std::move(p), std::move(pt), std::move(wd), std::move(modes)};
}

// closed forms for the constant profile: u = tanh(t)/2, v = theta + log cosh t,
// y = cos(theta) cos(t), x = -sin(theta) sin(t) + const.
double x_closed(double t, double th) { return -std::sin(th) * std::sin(t); }
double y_closed(double t, double th) { return std::cos(th) * std::cos(t); }

}  // namespace

TEST_CASE("recover_y divides by mu^2 and is linear in Psi") {
  auto fx = half_fixture();
  pipeline::Grid2D psi;
  psi.t = {0.2, 0.25, 0.3, 0.35, 0.4};
  psi.theta = {1.0, 1.1, 1.2};
  psi.v.assign(15, 2.0);
  const auto y = recover_y(fx.wd, psi);
  // mu is identically one for the constant profile
  for (double v : y.v) CHECK(v == doctest::Approx(2.0).epsilon(1e-12));

  pipeline::Grid2D psi3 = psi;
  for (auto& v : psi3.v) v *= 3.0;
  const auto y3 = recover_y(fx.wd, psi3);
  for (std::size_t i = 0; i < y.v.size(); ++i)
    CHECK(y3.v[i] == doctest::Approx(3.0 * y.v[i]).epsilon(1e-14));
}

TEST_CASE("chart for the constant profile reproduces the closed forms") {
  auto fx = half_fixture();
  const auto ch = build_chart(fx.p, fx.pt, fx.wd, fx.modes, 0.2, 0.45, 129, 1.0,
                              1.4, 129);

  const std::size_t bi = ch.base_it(), bj = ch.base_ith();
  const double tc = ch.tgrid()[bi], thc = ch.thgrid()[bj];
  const double gauge = -x_closed(tc, thc);  // x(base) = 0

  double worst_x = 0, worst_y = 0, worst_v = 0, worst_u = 0;
  for (std::size_t it = 0; it < ch.nt(); ++it)
    for (std::size_t ith = 0; ith < ch.nth(); ++ith) {
      const double t = ch.tgrid()[it], th = ch.thgrid()[ith];
      const std::size_t id = ch.idx(it, ith);
      worst_x = std::max(worst_x,
                         std::abs(ch.x()[id] - (x_closed(t, th) + gauge)));
      worst_y = std::max(worst_y, std::abs(ch.y()[id] - y_closed(t, th)));
      worst_u = std::max(worst_u, std::abs(ch.u()[id] - 0.5 * std::tanh(t)));
      worst_v = std::max(worst_v,
                         std::abs(ch.v()[id] - (th + std::log(std::cosh(t)))));
    }
  CHECK(worst_y < 1e-10);
  CHECK(worst_x < 1e-6);   // line-integrated
  CHECK(worst_u < 1e-11);
  CHECK(worst_v < 1e-10);
  CHECK(ch.cross_sweep_mismatch() < 1e-8);
}

TEST_CASE("chart identity: v + p_i(u) equals r_i at every node") {
  auto fx = half_fixture();
  const auto ch = build_chart(fx.p, fx.pt, fx.wd, fx.modes, 0.2, 0.45, 65, 1.0,
                              1.4, 65);
  double worst = 0;
  for (std::size_t it = 0; it < ch.nt(); ++it)
    for (std::size_t ith = 0; ith < ch.nth(); ++ith) {
      const double t = ch.tgrid()[it], th = ch.thgrid()[ith];
      const std::size_t id = ch.idx(it, ith);
      const double u = ch.u()[id], v = ch.v()[id];
      const double r1 = th + t, r2 = th - t;
      worst = std::max({worst, std::abs(v + fx.pt.p1(u) - r1),
                        std::abs(v + fx.pt.p2(u) - r2)});
    }
  CHECK(worst < 1e-10);
}

TEST_CASE("linear-system residual: x_{r_i} + lambda_{3-i} y_{r_i} = 0") {
  auto fx = half_fixture();
  const auto ch = build_chart(fx.p, fx.pt, fx.wd, fx.modes, 0.2, 0.45, 129, 1.0,
                              1.4, 129);
  const double ht = ch.tgrid()[1] - ch.tgrid()[0];
  const double hth = ch.thgrid()[1] - ch.thgrid()[0];
  double worst = 0, scale = 0;
  for (std::size_t it = 2; it + 2 < ch.nt(); ++it)
    for (std::size_t ith = 2; ith + 2 < ch.nth(); ++ith) {
      double st[5], sth[5];
      for (int j = -2; j <= 2; ++j) {
        st[j + 2] = ch.x()[ch.idx(it + j, ith)];
        sth[j + 2] = ch.x()[ch.idx(it, ith + j)];
      }
      const double xt = num::d1_central5(st + 2, ht);
      const double xth = num::d1_central5(sth + 2, hth);
      const double x_r1 = 0.5 * (xth + xt), x_r2 = 0.5 * (xth - xt);
      const std::size_t id = ch.idx(it, ith);
      const double l1 = ch.lambda1_at(it), l2 = ch.lambda2_at(it);
      worst = std::max({worst, std::abs(x_r1 + l2 * ch.y_r1()[id]),
                        std::abs(x_r2 + l1 * ch.y_r2()[id])});
      scale = std::max({scale, std::abs(x_r1), std::abs(x_r2)});
    }
  CHECK(worst < 1e-6 * scale);
}

TEST_CASE("Jacobian factorization det = (lambda1 - lambda2) y_r1 y_r2") {
  auto fx = half_fixture();
  const auto ch = build_chart(fx.p, fx.pt, fx.wd, fx.modes, 0.2, 0.45, 129, 1.0,
                              1.4, 129);
  const double ht = ch.tgrid()[1] - ch.tgrid()[0];
  const double hth = ch.thgrid()[1] - ch.thgrid()[0];
  for (std::size_t it = 2; it + 2 < ch.nt(); it += 13)
    for (std::size_t ith = 2; ith + 2 < ch.nth(); ith += 13) {
      double xt5[5], xth5[5], yt5[5], yth5[5];
      for (int j = -2; j <= 2; ++j) {
        xt5[j + 2] = ch.x()[ch.idx(it + j, ith)];
        xth5[j + 2] = ch.x()[ch.idx(it, ith + j)];
        yt5[j + 2] = ch.y()[ch.idx(it + j, ith)];
        yth5[j + 2] = ch.y()[ch.idx(it, ith + j)];
      }
      const double xt = num::d1_central5(xt5 + 2, ht);
      const double xth = num::d1_central5(xth5 + 2, hth);
      const double yt = num::d1_central5(yt5 + 2, ht);
      const double yth = num::d1_central5(yth5 + 2, hth);
      // det d(x,y)/d(r1,r2) = det d(x,y)/d(t,theta) * det d(t,theta)/d(r1,r2)
      const double det_r = (xt * yth - xth * yt) * 0.5;
      const std::size_t id = ch.idx(it, ith);
      const double expect = (ch.lambda1_at(it) - ch.lambda2_at(it)) *
                            ch.y_r1()[id] * ch.y_r2()[id];
      CHECK(det_r == doctest::Approx(expect).epsilon(1e-8));
    }
}

TEST_CASE("chart inversion: nodes, closed-form queries, outside queries") {
  auto fx = half_fixture();
  const auto ch = build_chart(fx.p, fx.pt, fx.wd, fx.modes, 0.2, 0.45, 257, 1.0,
                              1.4, 257);
  // grid-node fixed point
  for (std::size_t it : {std::size_t(5), std::size_t(128), std::size_t(251)})
    for (std::size_t ith : {std::size_t(7), std::size_t(128), std::size_t(250)}) {
      const auto q = ch.invert(ch.x()[ch.idx(it, ith)], ch.y()[ch.idx(it, ith)]);
      CHECK(q.t == doctest::Approx(ch.tgrid()[it]).epsilon(1e-12));
      CHECK(q.theta == doctest::Approx(ch.thgrid()[ith]).epsilon(1e-12));
    }

  // closed-form query at (t, theta) = (0.3, 1.2), gauge included
  const double tc = ch.tgrid()[ch.base_it()], thc = ch.thgrid()[ch.base_ith()];
  const double xq = x_closed(0.3, 1.2) - x_closed(tc, thc);
  const double yq = y_closed(0.3, 1.2);
  const auto q = ch.invert(xq, yq);
  CHECK(q.t == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(q.theta == doctest::Approx(1.2).epsilon(1e-9));
  CHECK(q.u == doctest::Approx(0.5 * std::tanh(0.3)).epsilon(1e-9));
  CHECK(q.v == doctest::Approx(1.2 + std::log(std::cosh(0.3))).epsilon(1e-9));

  // far outside the bounding box
  CHECK_THROWS_AS(ch.invert(50.0, 50.0), OutsideChart);

  // forward-inverse round trip through the interpolants at random points
  std::mt19937 rng(90210);
  std::uniform_real_distribution<double> rt(0.21, 0.44), rth(1.01, 1.39);
  for (int i = 0; i < 40; ++i) {
    const double t = rt(rng), th = rth(rng);
    double x, y;
    ch.forward(t, th, &x, &y);
    const auto r = ch.invert(x, y);
    CHECK(r.t == doctest::Approx(t).epsilon(1e-9));
    CHECK(r.theta == doctest::Approx(th).epsilon(1e-9));
  }
}

TEST_CASE("assembled metric: E + G = e^v exactly, positivity, closed forms") {
  auto fx = half_fixture();
  const auto ch = build_chart(fx.p, fx.pt, fx.wd, fx.modes, 0.2, 0.45, 65, 1.0,
                              1.4, 65);
  for (std::size_t it = 0; it < ch.nt(); it += 7)
    for (std::size_t ith = 0; ith < ch.nth(); ith += 7) {
      const std::size_t id = ch.idx(it, ith);
      const double ev = std::exp(ch.v()[id]);
      CHECK(ch.E()[id] + ch.G()[id] == doctest::Approx(ev).epsilon(1e-15));
      CHECK(ch.F()[id] == doctest::Approx(ch.u()[id] * ev).epsilon(1e-14));
      CHECK(ch.E()[id] == doctest::Approx(0.5 * ev).epsilon(1e-14));
      CHECK(ch.E()[id] * ch.G()[id] - ch.F()[id] * ch.F()[id] > 0);
    }
  // u = 0 row (t = 0 is not in this window, so check via metric_at)
  double E, F, G;
  ch.metric_at(0.2, 1.0, &E, &F, &G);
  const double u = fx.pt.u_of_t(0.2);
  const double v = 1.0 - 0.5 * (fx.pt.p1(u) + fx.pt.p2(u));
  CHECK(F == doctest::Approx(u * std::exp(v)).epsilon(1e-13));
}

TEST_CASE("scaling Psi scales the recovered coordinates linearly") {
  auto fx = half_fixture();
  const auto ch1 = build_chart(fx.p, fx.pt, fx.wd, fx.modes, 0.2, 0.45, 65, 1.0,
                               1.4, 65);
  auto scaled = fx.modes;
  scaled[0].A = 2.5;
  const auto ch2 = build_chart(fx.p, fx.pt, fx.wd, scaled, 0.2, 0.45, 65, 1.0,
                               1.4, 65);
  for (std::size_t i = 0; i < ch1.x().size(); i += 17) {
    CHECK(ch2.y()[i] == doctest::Approx(2.5 * ch1.y()[i]).epsilon(1e-12));
    CHECK(ch2.x()[i] == doctest::Approx(2.5 * ch1.x()[i]).epsilon(1e-10));
  }
}

TEST_CASE("a Psi violating the wave equation is rejected as not closed") {
  auto fx = half_fixture();
  pipeline::Grid2D psi;
  const std::size_t n = 65;
  psi.t.resize(n);
  psi.theta.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    psi.t[i] = 0.2 + 0.25 * double(i) / double(n - 1);
    psi.theta[i] = 1.0 + 0.4 * double(i) / double(n - 1);
  }
  psi.v.resize(n * n);
  for (std::size_t it = 0; it < n; ++it)
    for (std::size_t ith = 0; ith < n; ++ith)
      psi.at(it, ith) = psi.t[it] * psi.t[it] * psi.theta[ith];  // t^2 theta
  CHECK_THROWS_AS(build_chart_from_psi(fx.p, fx.pt, fx.wd, psi), NotClosed);
}

TEST_CASE("reconstruction with the identity Hessian gives the paraboloid") {
  MetricFn H = [](double, double, double* E, double* F, double* G) {
    *E = 1.0;
    *F = 0.0;
    *G = 1.0;
  };
  StarDomain dom{-1.0, 1.0, -0.5, 1.5, 15, 15};
  const auto rp = reconstruct_potential(H, 0.2, 0.5, dom);
  for (std::size_t j = 0; j < dom.ny; ++j)
    for (std::size_t i = 0; i < dom.nx; ++i) {
      const double dx = rp.node_x(i) - 0.2, dy = rp.node_y(j) - 0.5;
      CHECK(rp.f[j * dom.nx + i] ==
            doctest::Approx(0.5 * (dx * dx + dy * dy)).epsilon(1e-12));
    }
}

TEST_CASE("closed-form reconstruction of the half-plane potential") {
  CompiledPotential pot(parse_expression("x^2/(2*y) + y*log(y)/4"));
  MetricFn H = [&pot](double x, double y, double* E, double* F, double* G) {
    if (y < 0.55 || y > 1.95 || x < -0.85 || x > 0.85)
      throw OutsideChart(x, y, "outside");
    const DiffBundle d = pot.bundle(x, y);
    *E = d.fxx;
    *F = d.fxy;
    *G = d.fyy;
  };
  const double bx = 0.0, by = 1.25;
  StarDomain dom{-0.8, 0.8, 0.6, 1.9, 21, 21};
  const auto rp = reconstruct_potential(H, bx, by, dom);

  // compare against the closed form with the affine jet at the base removed
  const DiffBundle b0 = pot.bundle(bx, by);
  double worst = 0;
  for (std::size_t j = 0; j < dom.ny; ++j)
    for (std::size_t i = 0; i < dom.nx; ++i) {
      const double x = rp.node_x(i), y = rp.node_y(j);
      const double target =
          pot.bundle(x, y).f - b0.f - b0.fx * (x - bx) - b0.fy * (y - by);
      worst = std::max(worst, std::abs(rp.f[j * dom.nx + i] - target));
    }
  CHECK(worst < 1e-8);

  // exact jets: integrability is an identity and the Brioschi curvature of
  // the metric is zero to roundoff
  const auto triple = MetricTriple::from_potential(pot, {-0.85, 0.85, 0.55, 1.95});
  const auto rep = verify_roundtrip(rp, H, &triple);
  CHECK(rep.integrability_max < 1e-10);
  CHECK(rep.curvature_max < 1e-9);
  CHECK(rep.pd_min_trace > 0);
  CHECK(rep.pd_min_det > 0);

  // the finite-difference route on a better-conditioned window
  StarDomain tight{-0.15, 0.15, 0.62, 0.92, 41, 41};
  const auto rp2 = reconstruct_potential(H, 0.0, 0.77, tight);
  const auto rep2 = verify_roundtrip(rp2, H);
  CHECK(rep2.hessian_rel_err < 1e-6);
  CHECK(rep2.integrability_max < 1e-6);
  CHECK(rep2.curvature_max < 1e-4);
}

TEST_CASE("round trip on the constant-profile chart fixture") {
  auto fx = half_fixture();
  const auto ch = build_chart(fx.p, fx.pt, fx.wd, fx.modes, 0.2, 0.45, 129, 1.0,
                              1.4, 129);
  const MetricFn H = metric_function(ch);
  const double bx = ch.x()[ch.idx(ch.base_it(), ch.base_ith())];
  const double by = ch.y()[ch.idx(ch.base_it(), ch.base_ith())];
  StarDomain dom{bx - 0.05, bx + 0.05, by - 0.07, by + 0.07, 21, 21};
  const auto rp = reconstruct_potential(H, bx, by, dom);
  const auto rep = verify_roundtrip(rp, H);
  CHECK(rep.hessian_rel_err < 1e-5);
  CHECK(rep.integrability_max < 1e-5);
  CHECK(rep.curvature_max < 1e-5);
  CHECK(rep.pd_min_trace > 0);
  CHECK(rep.pd_min_det > 0);
  CHECK(rep.nondegeneracy_min > 0);
}

TEST_CASE("corrupting F breaks integrability (negative control)") {
  auto fx = half_fixture();
  const auto ch = build_chart(fx.p, fx.pt, fx.wd, fx.modes, 0.2, 0.45, 129, 1.0,
                              1.4, 129);
  const MetricFn base = metric_function(ch);
  const double bx = ch.x()[ch.idx(ch.base_it(), ch.base_ith())];
  const double by = ch.y()[ch.idx(ch.base_it(), ch.base_ith())];
  // non-constant perturbation: a constant offset would cancel in E_y - F_x
  const MetricFn bad = [&](double x, double y, double* E, double* F, double* G) {
    base(x, y, E, F, G);
    *F += 1e-3 * std::sin(40 * (x - bx)) * std::cos(40 * (y - by));
  };
  StarDomain dom{bx - 0.05, bx + 0.05, by - 0.07, by + 0.07, 21, 21};
  const auto rp = reconstruct_potential(bad, bx, by, dom);
  const auto rep = verify_roundtrip(rp, bad);
  CHECK(rep.integrability_max > 1e-4);
}

TEST_CASE("curved profile with a k = 0 mode builds a closed chart") {
  // the k = 0 theta-part A + B theta needs the drift-forced correction q on
  // curved profiles; closedness of the x-form validates it end to end
  const auto p = validate_profile(parse_expression("1/2 + u^2/8"), -0.45, 0.45);
  const auto pt = phase_table(p, 0.0, 2049);
  const auto wd = wave_data(p, pt, characteristic_data(p, 101), 4097);
  std::vector<pipeline::SpectralMode> modes;
  modes.push_back(solve_mode(p, wd, 1.0, 0.0, 1.0));
  modes.push_back(solve_mode(p, wd, 0.3, 0.2, 0.0));
  const auto ch = build_chart(p, pt, wd, modes, 0.2, 0.45, 65, 1.0, 1.4, 65);
  CHECK(ch.closedness_residual() < 1e-6 * ch.closedness_scale());
  CHECK(ch.cross_sweep_mismatch() < 1e-8);

  const MetricFn H = metric_function(ch);
  const double bx = ch.x()[ch.idx(ch.base_it(), ch.base_ith())];
  const double by = ch.y()[ch.idx(ch.base_it(), ch.base_ith())];
  StarDomain dom{bx - 0.03, bx + 0.03, by - 0.04, by + 0.04, 15, 15};
  const auto rp = reconstruct_potential(H, bx, by, dom);
  const auto rep = verify_roundtrip(rp, H);
  CHECK(rep.integrability_max < 1e-4);
  CHECK(rep.curvature_max < 1e-3);
  CHECK(rep.pd_min_det > 0);
}

TEST_CASE("asymmetric profile: full pipeline round trip") {
  // nothing in the construction may rely on the evenness of phi
  const auto p = validate_profile(parse_expression("1/2 + u^2/8 + u^3/40"),
                                  -0.4, 0.4);
  CHECK(p.u_hi() - p.u_lo() > 0.79);
  const auto pt = phase_table(p, 0.5 * (p.u_lo() + p.u_hi()), 2049);
  const auto wd = wave_data(p, pt, characteristic_data(p, 101), 4097);
  std::vector<pipeline::SpectralMode> modes;
  modes.push_back(solve_mode(p, wd, 1.0, 0.0, 1.0));
  modes.push_back(solve_mode(p, wd, 0.0, 0.5, 2.0));
  const auto ch = build_chart(p, pt, wd, modes, 0.15, 0.4, 129, 1.0, 1.4, 129);
  CHECK(ch.closedness_residual() < 1e-6 * ch.closedness_scale());
  CHECK(pipeline::kg_residual(
            [&] {
              pipeline::Grid2D g;
              g.t = ch.tgrid();
              g.theta = ch.thgrid();
              g.v = ch.psi();
              return g;
            }(),
            p, pt) < 1e-6);

  const MetricFn H = metric_function(ch);
  const double bx = ch.x()[ch.idx(ch.base_it(), ch.base_ith())];
  const double by = ch.y()[ch.idx(ch.base_it(), ch.base_ith())];
  StarDomain dom{bx - 0.04, bx + 0.04, by - 0.05, by + 0.05, 21, 21};
  const auto rp = reconstruct_potential(H, bx, by, dom);
  const auto rep = verify_roundtrip(rp, H);
  CHECK(rep.integrability_max < 1e-4);
  CHECK(rep.hessian_rel_err < 1e-4);
  CHECK(rep.curvature_max < 1e-4);
  CHECK(rep.pd_min_trace > 0);
  CHECK(rep.pd_min_det > 0);
}

TEST_CASE("rays leaving the chart image are reported as not star-shaped") {
  auto fx = half_fixture();
  const auto ch = build_chart(fx.p, fx.pt, fx.wd, fx.modes, 0.2, 0.45, 65, 1.0,
                              1.4, 65);
  const MetricFn H = metric_function(ch);
  const double bx = ch.x()[ch.idx(ch.base_it(), ch.base_ith())];
  const double by = ch.y()[ch.idx(ch.base_it(), ch.base_ith())];
  StarDomain dom{bx - 2.0, bx + 2.0, by - 2.0, by + 2.0, 9, 9};  // way too big
  CHECK_THROWS_AS(reconstruct_potential(H, bx, by, dom), NotStarShaped);
}
