#pragma once

#include <string>
#include <vector>

#include "hesseflat/catalog.hpp"
#include "hesseflat/chart.hpp"
#include "hesseflat/geometry.hpp"
#include "hesseflat/pipeline.hpp"

namespace hesseflat::report {

/// Deterministic double formatting shared by every CSV/JSON writer
/// (shortest representation that round-trips).
std::string fmt(double v);

void write_text(const std::string& path, const std::string& body);

/// CSV `x,y,E,F,G,K,residual` for a flatness sweep.
std::string flatness_grid_csv(const geometry::FlatnessGridReport& rep);

/// CSV `t,gamma,mu,V` for the wave data.
std::string wave_csv(const pipeline::WaveData& wd);

/// CSV `t,psi` (real modes) or `t,psi_re,psi_im` when the mode is complex.
std::string mode_csv(const pipeline::WaveData& wd, const pipeline::SpectralMode& m);

/// CSV `t,theta,u,v,x,y,E,F,G` per chart node.
std::string chart_csv(const chart::ConformalChart& c);

/// CSV `x,y,f` for a reconstructed potential.
std::string potential_csv(const chart::ReconstructedPotential& rp);

/// JSON object for a round-trip verification report, with the fixed keys
/// hessian_rel_err, integrability_max, flatness_max, curvature_max,
/// pd_min_trace, pd_min_det, nondegeneracy_min.
std::string roundtrip_json(const chart::RoundTripReport& rep, bool pass);

}  // namespace hesseflat::report
