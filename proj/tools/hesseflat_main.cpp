// hesseflat: flatness diagnostics and constructive generation of flat
// Hessian potentials on two-dimensional domains.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hesseflat/catalog.hpp"
#include "hesseflat/chart.hpp"
#include "hesseflat/errors.hpp"
#include "hesseflat/expr.hpp"
#include "hesseflat/geometry.hpp"
#include "hesseflat/pipeline.hpp"
#include "hesseflat/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hesseflat;

namespace {

struct Options {
  std::string task;
  std::string potential, profile, catalog_name, out_dir = "out";
  std::string modes_text, grid_text, inject;
  std::vector<double> urange, xrange, yrange, trange, thetarange;
  double u0 = std::numeric_limits<double>::quiet_NaN();
  double tol = std::numeric_limits<double>::quiet_NaN();
  std::string config_path;
};

struct ModeSpec {
  double A, B, k;
};

std::vector<ModeSpec> parse_modes(const std::string& text) {
  std::vector<ModeSpec> out;
  std::string cur;
  auto flush = [&](const std::string& triple) {
    if (triple.empty()) return;
    double a, b, k;
    if (std::sscanf(triple.c_str(), "%lf,%lf,%lf", &a, &b, &k) != 3)
      throw NumericalError("bad mode spec '" + triple + "' (want A,B,k)");
    if (k < 0) throw NumericalError("mode wavenumber k must be >= 0");
    out.push_back({a, b, k});
  };
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ';') {
      flush(text.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::pair<std::size_t, std::size_t> parse_grid(const std::string& text,
                                               std::size_t def_a,
                                               std::size_t def_b) {
  if (text.empty()) return {def_a, def_b};
  unsigned long a = 0, b = 0;
  if (std::sscanf(text.c_str(), "%lux%lu", &a, &b) != 2 || a < 2 || b < 2)
    throw NumericalError("bad grid spec '" + text + "' (want NTxNTH)");
  return {a, b};
}

void merge_config(Options& o, const CLI::App& app) {
  if (o.config_path.empty()) return;
  std::ifstream in(o.config_path);
  if (!in) throw NumericalError("cannot open config file: " + o.config_path);
  json cfg = json::parse(in);
  auto given = [&](const std::string& flag) {
    const auto* opt = app.get_option_no_throw(flag);
    return opt && opt->count() > 0;
  };
  auto fill_str = [&](const char* key, const char* flag, std::string& dst) {
    if (!given(flag) && cfg.contains(key)) dst = cfg[key].get<std::string>();
  };
  auto fill_num = [&](const char* key, const char* flag, double& dst) {
    if (!given(flag) && cfg.contains(key)) dst = cfg[key].get<double>();
  };
  auto fill_vec = [&](const char* key, const char* flag, std::vector<double>& dst) {
    if (!given(flag) && cfg.contains(key))
      dst = cfg[key].get<std::vector<double>>();
  };
  fill_str("potential", "--potential", o.potential);
  fill_str("profile", "--profile", o.profile);
  fill_str("catalog", "--catalog", o.catalog_name);
  fill_str("out", "--out", o.out_dir);
  fill_str("modes", "--modes", o.modes_text);
  fill_str("grid", "--grid", o.grid_text);
  fill_str("inject", "--inject", o.inject);
  fill_num("u0", "--u0", o.u0);
  fill_num("tol", "--tol", o.tol);
  fill_vec("urange", "--urange", o.urange);
  fill_vec("xrange", "--xrange", o.xrange);
  fill_vec("yrange", "--yrange", o.yrange);
  fill_vec("trange", "--trange", o.trange);
  fill_vec("thetarange", "--thetarange", o.thetarange);
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--potential", o.potential, "potential expression f(x, y)");
  cmd->add_option("--profile", o.profile, "profile expression phi(u)");
  cmd->add_option("--catalog", o.catalog_name, "named catalog fixture");
  cmd->add_option("--modes", o.modes_text, "mode list A,B,k[;A,B,k...]");
  cmd->add_option("--urange", o.urange, "u-interval lo,hi")->delimiter(',');
  cmd->add_option("--u0", o.u0, "phase base point (default: interval midpoint)");
  cmd->add_option("--xrange", o.xrange, "x-interval lo,hi")->delimiter(',');
  cmd->add_option("--yrange", o.yrange, "y-interval lo,hi")->delimiter(',');
  cmd->add_option("--trange", o.trange, "chart t-interval lo,hi")->delimiter(',');
  cmd->add_option("--thetarange", o.thetarange, "chart theta-interval lo,hi")
      ->delimiter(',');
  cmd->add_option("--grid", o.grid_text, "grid size NXxNY / NTxNTH");
  cmd->add_option("--tol", o.tol, "tolerance override");
  cmd->add_option("--out", o.out_dir, "output directory (default: out)");
  cmd->add_option("--config", o.config_path, "JSON config file (flags override)");
  cmd->add_option("--inject", o.inject,
                  "fault injection for negative controls: "
                  "corrupt-metric-f[=amp] | kg-violation");
}

void ensure_out(const Options& o) { fs::create_directories(o.out_dir); }

void emit_json(const Options& o, const std::string& name, const std::string& body) {
  ensure_out(o);
  report::write_text((fs::path(o.out_dir) / name).string(), body);
}

int fail_payload(const Options& o, const std::string& code, const std::string& msg,
                 int exit_code, json extra = json::object()) {
  json payload = extra;
  payload["error"] = code;
  payload["message"] = msg;
  const std::string body = payload.dump(2) + "\n";
  std::cout << body;
  try {
    emit_json(o, "error.json", body);
  } catch (...) {
  }
  std::cerr << "error: " << msg << "\n";
  return exit_code;
}

std::shared_ptr<ClosedFormField> load_potential(const Options& o,
                                                geometry::GridSpec* grid_out) {
  const catalog::Fixture* fx =
      o.catalog_name.empty() ? nullptr : catalog::find(o.catalog_name);
  if (!o.catalog_name.empty() && !fx) {
    std::string names;
    for (const auto& n : catalog::names()) names += " " + n;
    throw NumericalError("unknown catalog fixture '" + o.catalog_name +
                         "'; available:" + names);
  }
  std::string source = o.potential;
  Domain2D dom{-1, 1, -1, 1};
  geometry::GridSpec grid{-1, 1, -1, 1, 101, 101};
  if (fx) {
    source = fx->source;
    dom = fx->domain;
    grid = fx->grid;
  }
  if (source.empty()) throw NumericalError("no potential given (--potential or --catalog)");
  if (!o.xrange.empty()) {
    dom.x_lo = grid.x_lo = o.xrange.at(0);
    dom.x_hi = grid.x_hi = o.xrange.at(1);
  }
  if (!o.yrange.empty()) {
    dom.y_lo = grid.y_lo = o.yrange.at(0);
    dom.y_hi = grid.y_hi = o.yrange.at(1);
  }
  const auto [gx, gy] = parse_grid(o.grid_text, grid.nx, grid.ny);
  grid.nx = int(gx);
  grid.ny = int(gy);
  if (grid_out) *grid_out = grid;
  return std::make_shared<ClosedFormField>(parse_expression(source), dom);
}

// ---------------------------------------------------------------------------

int cmd_check(const Options& o) {
  geometry::GridSpec grid{};
  const auto field = load_potential(o, &grid);
  const auto rep = geometry::flatness_grid(*field, grid);
  const double tol = std::isnan(o.tol) ? 1e-8 : o.tol;
  const bool pd_ok = rep.pd_min_trace > 0 && rep.pd_min_det > 0;
  const bool pass = pd_ok && rep.curvature_max < tol;

  emit_json(o, "grid.csv", report::flatness_grid_csv(rep));
  json j;
  j["curvature_max"] = rep.curvature_max;
  j["flatness_max"] = rep.flatness_max;
  j["pd_min_trace"] = rep.pd_min_trace;
  j["pd_min_det"] = rep.pd_min_det;
  j["tolerance"] = tol;
  j["pass"] = pass;
  emit_json(o, "report.json", j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return pass ? 0 : 1;
}

int cmd_cone(const Options& o) {
  geometry::GridSpec grid{};
  const auto field = load_potential(o, &grid);
  const auto triple =
      MetricTriple::from_potential(field->potential(), field->domain());
  const catalog::Fixture* fx =
      o.catalog_name.empty() ? nullptr : catalog::find(o.catalog_name);

  json j;
  bool pass = false;
  if (fx && fx->witness) {
    const double r = geometry::cone_identity_check(triple, *fx->witness, grid);
    const double tol = std::isnan(o.tol) ? 1e-10 : o.tol;
    pass = r < tol;
    j["cone_residual"] = r;
    j["tolerance"] = tol;
  } else {
    const double r = geometry::normalized_rank_test(triple, grid);
    const double tol = std::isnan(o.tol) ? 1e-6 : o.tol;
    pass = r < tol;
    j["rank_residual"] = r;
    j["tolerance"] = tol;
  }
  j["pass"] = pass;
  emit_json(o, "report.json", j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return pass ? 0 : 1;
}

int cmd_catalog(const Options& o) {
  if (o.catalog_name.empty()) {
    std::cout << "available fixtures:\n";
    for (const auto& n : catalog::names()) std::cout << "  " << n << "\n";
    return 0;
  }
  const catalog::Fixture* fx = catalog::find(o.catalog_name);
  if (!fx) {
    std::string names;
    for (const auto& n : catalog::names()) names += " " + n;
    std::cerr << "unknown fixture '" << o.catalog_name << "'; available:" << names
              << "\n";
    return 2;
  }
  const auto rep = catalog::verify(*fx);
  std::printf("%-16s %-6s %s\n", "fixture", "result", "detail");
  std::printf("%-16s %-6s %s\n", rep.name.c_str(), rep.pass ? "pass" : "FAIL",
              rep.detail.c_str());
  if (rep.cone_residual) std::printf("  cone identity residual  %.3e\n", *rep.cone_residual);
  if (rep.rank_residual) std::printf("  normalized rank residual %.3e\n", *rep.rank_residual);
  if (rep.euler_residual) std::printf("  Euler identity residual %.3e\n", *rep.euler_residual);
  if (rep.radial_fit)
    std::printf("  radial fit C = %.12g (residual %.3e)\n", rep.radial_fit->C,
                rep.radial_fit->residual);
  if (rep.roundtrip)
    std::printf("  round trip: hessian %.3e, integrability %.3e, |K| %.3e\n",
                rep.roundtrip->hessian_rel_err, rep.roundtrip->integrability_max,
                rep.roundtrip->curvature_max);
  json j;
  j["fixture"] = rep.name;
  j["pass"] = rep.pass;
  j["curvature_max"] = rep.curvature_max;
  j["flatness_max"] = rep.flatness_max;
  j["pd_min_trace"] = rep.pd_min_trace;
  j["pd_min_det"] = rep.pd_min_det;
  if (rep.cone_residual) j["cone_residual"] = *rep.cone_residual;
  if (rep.rank_residual) j["rank_residual"] = *rep.rank_residual;
  if (rep.euler_residual) j["euler_residual"] = *rep.euler_residual;
  if (rep.radial_fit) {
    j["radial_C"] = rep.radial_fit->C;
    j["radial_residual"] = rep.radial_fit->residual;
  }
  emit_json(o, "report.json", j.dump(2) + "\n");
  return rep.pass ? 0 : 1;
}

// shared by pipeline and reconstruct
int run_roundtrip(const Options& o, const chart::MetricFn& H, double base_x,
                  double base_y, const chart::StarDomain& dom, json& extra_report,
                  double curvature_tol, const MetricTriple* exact = nullptr) {
  auto rp = chart::reconstruct_potential(H, base_x, base_y, dom);
  const auto rep = chart::verify_roundtrip(rp, H, exact);
  const bool pass = rep.pd_min_trace > 0 && rep.pd_min_det > 0 &&
                    rep.hessian_rel_err < 1e-4 && rep.integrability_max < 1e-4 &&
                    rep.curvature_max < curvature_tol;
  emit_json(o, "potential.csv", report::potential_csv(rp));
  json j = json::parse(report::roundtrip_json(rep, pass));
  for (auto& [k, v] : extra_report.items()) j[k] = v;
  emit_json(o, "report.json", j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  if (!pass) {
    json payload = j;
    return fail_payload(o, "RoundTripFailure",
                        "round-trip verification exceeded tolerances", 1, payload);
  }
  return 0;
}

int cmd_pipeline(const Options& o) {
  if (o.profile.empty()) throw NumericalError("pipeline requires --profile");
  const auto modes_spec = parse_modes(o.modes_text);
  if (modes_spec.empty())
    throw NumericalError("pipeline requires a non-empty --modes list");
  const double u_lo = o.urange.empty() ? -0.45 : o.urange.at(0);
  const double u_hi = o.urange.empty() ? 0.45 : o.urange.at(1);

  const auto profile = pipeline::validate_profile(parse_expression(o.profile),
                                                  u_lo, u_hi);
  const double u0 = std::isnan(o.u0) ? 0.5 * (profile.u_lo() + profile.u_hi())
                                     : o.u0;
  const auto phases = pipeline::phase_table(profile, u0);
  const auto cd = pipeline::characteristic_data(profile, 1001);
  const auto wave = pipeline::wave_data(profile, phases, cd);

  std::vector<pipeline::SpectralMode> modes;
  for (const auto& ms : modes_spec)
    modes.push_back(pipeline::solve_mode(profile, wave, ms.A, ms.B, ms.k));

  const auto [gnt, gnth] = parse_grid(o.grid_text, 129, 129);
  double t_lo = o.trange.empty() ? 0.2 : o.trange.at(0);
  double t_hi = o.trange.empty() ? 0.45 : o.trange.at(1);
  const double th_lo = o.thetarange.empty() ? 1.0 : o.thetarange.at(0);
  const double th_hi = o.thetarange.empty() ? 1.4 : o.thetarange.at(1);

  ensure_out(o);
  emit_json(o, "wave.csv", report::wave_csv(wave));
  for (std::size_t i = 0; i < modes.size(); ++i)
    emit_json(o, "mode_" + std::to_string(i) + ".csv",
              report::mode_csv(wave, modes[i]));

  chart::ConformalChart ch = [&] {
    if (o.inject.rfind("kg-violation", 0) == 0) {
      // negative control: Psi = t^2 theta is not a solution of the reduced
      // wave equation; closedness must reject it
      pipeline::Grid2D psi;
      psi.t.resize(gnt);
      psi.theta.resize(gnth);
      for (std::size_t i = 0; i < gnt; ++i)
        psi.t[i] = t_lo + (t_hi - t_lo) * double(i) / double(gnt - 1);
      for (std::size_t i = 0; i < gnth; ++i)
        psi.theta[i] = th_lo + (th_hi - th_lo) * double(i) / double(gnth - 1);
      psi.v.resize(gnt * gnth);
      for (std::size_t it = 0; it < gnt; ++it)
        for (std::size_t ith = 0; ith < gnth; ++ith)
          psi.at(it, ith) = psi.t[it] * psi.t[it] * psi.theta[ith];
      return chart::build_chart_from_psi(profile, phases, wave, psi);
    }
    return chart::build_chart(profile, phases, wave, modes, t_lo, t_hi, gnt,
                              th_lo, th_hi, gnth);
  }();
  emit_json(o, "chart.csv", report::chart_csv(ch));

  chart::MetricFn H = chart::metric_function(ch);
  if (o.inject.rfind("corrupt-metric-f", 0) == 0) {
    double amp = 1e-3;
    const auto eq = o.inject.find('=');
    if (eq != std::string::npos) amp = std::stod(o.inject.substr(eq + 1));
    const chart::MetricFn base = H;
    const double x0 = ch.x()[ch.idx(ch.base_it(), ch.base_ith())];
    const double y0 = ch.y()[ch.idx(ch.base_it(), ch.base_ith())];
    H = [base, amp, x0, y0](double x, double y, double* E, double* F, double* G) {
      base(x, y, E, F, G);
      // non-constant perturbation: a constant shift would leave the
      // integrability residual unchanged
      *F += amp * std::sin(40.0 * (x - x0)) * std::cos(40.0 * (y - y0));
    };
  }

  // inscribed star domain about the base node's image: shrink a rectangle
  // until its whole perimeter inverts inside the chart image
  const double bx = ch.x()[ch.idx(ch.base_it(), ch.base_ith())];
  const double by = ch.y()[ch.idx(ch.base_it(), ch.base_ith())];
  double xmin = ch.x()[0], xmax = ch.x()[0], ymin = ch.y()[0], ymax = ch.y()[0];
  for (std::size_t i = 0; i < ch.x().size(); ++i) {
    xmin = std::min(xmin, ch.x()[i]);
    xmax = std::max(xmax, ch.x()[i]);
    ymin = std::min(ymin, ch.y()[i]);
    ymax = std::max(ymax, ch.y()[i]);
  }
  const chart::MetricFn probe = chart::metric_function(ch);
  auto rect_ok = [&](const chart::StarDomain& r) {
    const int k = 17;
    try {
      for (int i = 0; i <= k; ++i) {
        const double fx2 = r.x_lo + (r.x_hi - r.x_lo) * i / double(k);
        const double fy2 = r.y_lo + (r.y_hi - r.y_lo) * i / double(k);
        double E, F, G;
        probe(fx2, r.y_lo, &E, &F, &G);
        probe(fx2, r.y_hi, &E, &F, &G);
        probe(r.x_lo, fy2, &E, &F, &G);
        probe(r.x_hi, fy2, &E, &F, &G);
      }
    } catch (const Error&) {
      return false;
    }
    return true;
  };
  chart::StarDomain dom{};
  bool found = false;
  for (double s = 0.42; s >= 0.05 && !found; s -= 0.02) {
    const double wx = s * (xmax - xmin), wy = s * (ymax - ymin);
    chart::StarDomain cand{bx - wx, bx + wx, by - wy, by + wy, 25, 25};
    if (rect_ok(cand)) {
      dom = cand;
      found = true;
    }
  }
  if (!found)
    throw NotStarShaped(bx, by, "no inscribed star-shaped rectangle found");

  json extra;
  extra["closedness_residual"] = ch.closedness_residual();
  extra["closedness_scale"] = ch.closedness_scale();
  extra["cross_sweep_mismatch"] = ch.cross_sweep_mismatch();
  extra["t_interval"] = {wave.t.front(), wave.t.back()};
  const double ktol = std::isnan(o.tol) ? 1e-4 : o.tol;
  return run_roundtrip(o, H, bx, by, dom, extra, ktol);
}

int cmd_reconstruct(const Options& o) {
  geometry::GridSpec grid{};
  const auto field = load_potential(o, &grid);
  const auto& pot = field->potential();
  // closed-form Hessian; no chart involved
  chart::MetricFn H = [&pot, field](double x, double y, double* E, double* F,
                                    double* G) {
    if (!field->domain().contains(x, y))
      throw OutsideChart(x, y, "outside the potential's domain");
    const DiffBundle d = pot.bundle(x, y);
    *E = d.fxx;
    *F = d.fxy;
    *G = d.fyy;
  };
  const Domain2D dom = field->domain();
  const double mx = 0.05 * (dom.x_hi - dom.x_lo), my = 0.05 * (dom.y_hi - dom.y_lo);
  chart::StarDomain star{dom.x_lo + mx, dom.x_hi - mx, dom.y_lo + my,
                         dom.y_hi - my, 25, 25};
  const double bx = 0.5 * (dom.x_lo + dom.x_hi), by = 0.5 * (dom.y_lo + dom.y_hi);
  const auto triple = MetricTriple::from_potential(pot, dom);
  json extra;
  extra["potential"] = o.catalog_name.empty() ? o.potential : o.catalog_name;
  const double ktol = std::isnan(o.tol) ? 1e-4 : o.tol;
  return run_roundtrip(o, H, bx, by, star, extra, ktol, &triple);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flat Hessian potential toolkit"};
  app.require_subcommand(1);
  Options o;

  auto* c_check = app.add_subcommand(
      "check", "curvature/flatness diagnostics for a potential");
  auto* c_cone = app.add_subcommand(
      "cone", "cone-identity or normalized-rank diagnostics");
  auto* c_pipe = app.add_subcommand(
      "pipeline", "generate a flat potential from a profile and wave modes");
  auto* c_rec = app.add_subcommand(
      "reconstruct", "double-integration reconstruction from a closed-form Hessian");
  auto* c_cat = app.add_subcommand("catalog", "run a named fixture's verification");
  for (auto* c : {c_check, c_cone, c_pipe, c_rec, c_cat}) add_common(c, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    merge_config(o, *sub);
    if (sub == c_check) return cmd_check(o);
    if (sub == c_cone) return cmd_cone(o);
    if (sub == c_pipe) return cmd_pipeline(o);
    if (sub == c_rec) return cmd_reconstruct(o);
    if (sub == c_cat) return cmd_catalog(o);
    return 2;
  } catch (const ParseError& e) {
    json extra;
    extra["offset"] = e.offset;
    return fail_payload(o, e.code(), e.what(), 2, extra);
  } catch (const EvalDomainError& e) {
    json extra;
    extra["subexpression"] = e.subexpr;
    extra["point"] = {e.x, e.y, e.u};
    return fail_payload(o, e.code(), e.what(), 2, extra);
  } catch (const EmptyAdmissibleInterval& e) {
    json extra;
    extra["condition"] = e.condition;
    extra["at_u"] = e.at_u;
    return fail_payload(o, e.code(), e.what(), 1, extra);
  } catch (const NotClosed& e) {
    json extra;
    extra["residual"] = e.residual;
    extra["scale"] = e.scale;
    return fail_payload(o, e.code(), e.what(), 1, extra);
  } catch (const NotPositiveDefinite& e) {
    json extra;
    extra["trace"] = e.trace;
    extra["det"] = e.det;
    extra["point"] = {e.x, e.y};
    return fail_payload(o, e.code(), e.what(), 1, extra);
  } catch (const NotStarShaped& e) {
    json extra;
    extra["ray"] = {e.ray_x, e.ray_y};
    return fail_payload(o, e.code(), e.what(), 1, extra);
  } catch (const SingularJacobian& e) {
    json extra;
    extra["node"] = {e.it, e.itheta};
    return fail_payload(o, e.code(), e.what(), 1, extra);
  } catch (const PositivityViolation& e) {
    json extra;
    extra["node"] = {e.it, e.itheta};
    return fail_payload(o, e.code(), e.what(), 1, extra);
  } catch (const MonotonicityViolation& e) {
    return fail_payload(o, e.code(), e.what(), 1);
  } catch (const PhaseSingularity& e) {
    return fail_payload(o, e.code(), e.what(), 1);
  } catch (const NotFlat& e) {
    return fail_payload(o, e.code(), e.what(), 1);
  } catch (const NotRadiallySymmetric& e) {
    return fail_payload(o, e.code(), e.what(), 1);
  } catch (const OutsideChart& e) {
    return fail_payload(o, e.code(), e.what(), 1);
  } catch (const Error& e) {
    return fail_payload(o, e.code(), e.what(), 2);
  } catch (const std::exception& e) {
    return fail_payload(o, "InternalError", e.what(), 2);
  } catch (...) {
    return fail_payload(o, "InternalError", "unknown failure", 2);
  }
}
