#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hesseflat/chart.hpp"
#include "hesseflat/geometry.hpp"

namespace hesseflat::catalog {

/// A named potential with its verification recipe.
struct Fixture {
  std::string name;
  std::string source;          // expression text for f(x, y)
  Domain2D domain;             // rectangle on which the potential is smooth
  geometry::GridSpec grid;     // default sweep grid inside the domain
  bool expect_flat;
  std::optional<geometry::ConeWitness> witness;  // cone identity, when known
  std::optional<double> homogeneity_degree;      // Euler identity, when known
  bool radial = false;                           // radial uniqueness fit
  double expected_radial_C = 0;                  // for radial fixtures
  std::optional<chart::StarDomain> reconstruct_window;  // round-trip check

  std::shared_ptr<ClosedFormField> field() const;
};

const std::vector<Fixture>& all();
const Fixture* find(const std::string& name);
std::vector<std::string> names();

/// Annulus sample points r_lo <= r <= r_hi (used by the homogeneous fixture).
std::vector<std::pair<double, double>> annulus_points(double r_lo, double r_hi,
                                                      int nr, int ntheta);

/// Result of running a fixture's full verification.
struct FixtureReport {
  std::string name;
  bool pass = false;
  double curvature_max = 0;      // max |K| over the sweep grid (NaN-free points)
  double flatness_max = 0;       // max |det3|
  double pd_min_trace = 0, pd_min_det = 0;
  std::optional<double> cone_residual;
  std::optional<double> rank_residual;
  std::optional<double> euler_residual;
  std::optional<geometry::RadialFitResult> radial_fit;
  std::optional<chart::RoundTripReport> roundtrip;
  std::string detail;            // one-line human summary
};

/// Runs the named fixture's verification (flatness sweep, cone identity or
/// rank test, Euler identity, radial fit — whichever apply).
FixtureReport verify(const Fixture& fx);

}  // namespace hesseflat::catalog
