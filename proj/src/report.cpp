#include "hesseflat/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "hesseflat/errors.hpp"

namespace hesseflat::report {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  // shortest round-trip representation
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NumericalError("cannot open output file: " + path);
  out << body;
}

std::string flatness_grid_csv(const geometry::FlatnessGridReport& rep) {
  std::string s = "x,y,E,F,G,K,residual\n";
  for (const auto& r : rep.rows) {
    s += fmt(r.x) + "," + fmt(r.y) + "," + fmt(r.E) + "," + fmt(r.F) + "," +
         fmt(r.G) + "," + fmt(r.K) + "," + fmt(r.residual) + "\n";
  }
  return s;
}

std::string wave_csv(const pipeline::WaveData& wd) {
  std::string s = "t,gamma,mu,V\n";
  for (std::size_t i = 0; i < wd.t.size(); ++i)
    s += fmt(wd.t[i]) + "," + fmt(wd.gamma[i]) + "," + fmt(wd.mu[i]) + "," +
         fmt(wd.V[i]) + "\n";
  return s;
}

std::string mode_csv(const pipeline::WaveData& wd, const pipeline::SpectralMode& m) {
  bool complex_mode = false;
  for (const auto& w : m.w)
    if (w.imag() != 0.0) {
      complex_mode = true;
      break;
    }
  std::string s = complex_mode ? "t,psi_re,psi_im\n" : "t,psi\n";
  for (std::size_t i = 0; i < wd.t.size(); ++i) {
    s += fmt(wd.t[i]) + "," + fmt(m.w[i].real());
    if (complex_mode) s += "," + fmt(m.w[i].imag());
    s += "\n";
  }
  return s;
}

std::string chart_csv(const chart::ConformalChart& c) {
  std::string s = "t,theta,u,v,x,y,E,F,G\n";
  for (std::size_t it = 0; it < c.nt(); ++it)
    for (std::size_t ith = 0; ith < c.nth(); ++ith) {
      const std::size_t id = c.idx(it, ith);
      s += fmt(c.tgrid()[it]) + "," + fmt(c.thgrid()[ith]) + "," +
           fmt(c.u()[id]) + "," + fmt(c.v()[id]) + "," + fmt(c.x()[id]) + "," +
           fmt(c.y()[id]) + "," + fmt(c.E()[id]) + "," + fmt(c.F()[id]) + "," +
           fmt(c.G()[id]) + "\n";
    }
  return s;
}

std::string potential_csv(const chart::ReconstructedPotential& rp) {
  std::string s = "x,y,f\n";
  for (std::size_t j = 0; j < rp.dom.ny; ++j)
    for (std::size_t i = 0; i < rp.dom.nx; ++i)
      s += fmt(rp.node_x(i)) + "," + fmt(rp.node_y(j)) + "," +
           fmt(rp.f[j * rp.dom.nx + i]) + "\n";
  return s;
}

std::string roundtrip_json(const chart::RoundTripReport& rep, bool pass) {
  std::string s = "{\n";
  s += "  \"hessian_rel_err\": " + fmt(rep.hessian_rel_err) + ",\n";
  s += "  \"integrability_max\": " + fmt(rep.integrability_max) + ",\n";
  s += "  \"flatness_max\": " + fmt(rep.flatness_max) + ",\n";
  s += "  \"curvature_max\": " + fmt(rep.curvature_max) + ",\n";
  s += "  \"pd_min_trace\": " + fmt(rep.pd_min_trace) + ",\n";
  s += "  \"pd_min_det\": " + fmt(rep.pd_min_det) + ",\n";
  s += "  \"nondegeneracy_min\": " + fmt(rep.nondegeneracy_min) + ",\n";
  s += std::string("  \"nondegeneracy_zero_crossing\": ") +
       (rep.nondegeneracy_zero_crossing ? "true" : "false") + ",\n";
  s += std::string("  \"pass\": ") + (pass ? "true" : "false") + "\n";
  s += "}\n";
  return s;
}

}  // namespace hesseflat::report
