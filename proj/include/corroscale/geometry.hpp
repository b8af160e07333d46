#ifndef CORROSCALE_GEOMETRY_HPP
#define CORROSCALE_GEOMETRY_HPP

#include <cmath>
#include <numbers>

#include "corroscale/core.hpp"
#include "corroscale/errors.hpp"

namespace corroscale {

enum class Phase { Solid, Water, Air };

inline const char* phase_name(Phase p) {
  switch (p) {
    case Phase::Solid: return "solid";
    case Phase::Water: return "water";
    case Phase::Air: return "air";
  }
  return "?";
}

/// Unit-cell layout. The solid grain is a ball of radius r_solid centered in
/// Y = [0,1]^dim, wrapped by a water film out to r_water; the rest is air.
///
/// Annulus keeps the film closed (water is disconnected from its periodic
/// copies, air percolates). BridgedWater adds four axis-aligned water
/// channels of width bridge_width joining the film to the cell faces, so the
/// water phase connects across cells. Neither solid nor water may touch the
/// cell boundary, hence r_water < 1/2.
enum class CellVariant { Annulus, BridgedWater };

struct CellGeometry {
  int dim = 2;
  double r_solid = 0.2;
  double r_water = 0.35;
  CellVariant variant = CellVariant::Annulus;
  double bridge_width = 0.0;

  bool operator==(const CellGeometry&) const = default;
};

/// Exact phase volumes and interface measures of the continuum geometry.
struct PhaseMeasures {
  double vol_solid = 0, vol_water = 0, vol_air = 0;
  double area_sw = 0;  // solid-water interface
  double area_wa = 0;  // water-air interface
};

namespace bridged_detail {
// Half opening angle of one channel mouth on the circle r_water, and the
// abscissa where the channel wall meets that circle.
inline double theta_b(const CellGeometry& g) { return std::asin(0.5 * g.bridge_width / g.r_water); }
inline double x_b(const CellGeometry& g) {
  const double hw = 0.5 * g.bridge_width;
  return std::sqrt(g.r_water * g.r_water - hw * hw);
}
}  // namespace bridged_detail

inline CellGeometry build_geometry(int dim, double r_solid, double r_water,
                                   CellVariant variant = CellVariant::Annulus,
                                   double bridge_width = 0.0) {
  if (dim != 2 && dim != 3)
    fail(ErrorCode::UnsupportedDim, "cell dimension must be 2 or 3, got " + std::to_string(dim));
  if (!(r_solid > 0.0 && r_solid < r_water && r_water < 0.5))
    fail(ErrorCode::RadiusOrdering,
         "geometry invariant 0 < r_solid < r_water < 1/2 violated (r_solid=" +
             std::to_string(r_solid) + ", r_water=" + std::to_string(r_water) + ")");
  if (variant == CellVariant::BridgedWater) {
    if (dim != 2)
      fail(ErrorCode::UnsupportedDim, "BridgedWater is only provided for dim = 2");
    const double hw = 0.5 * bridge_width;
    if (!(hw > 0.0 && hw < r_solid && hw < r_water * std::numbers::sqrt2 / 2.0))
      fail(ErrorCode::InvalidConfig,
           "bridge_width must satisfy 0 < bridge_width/2 < min(r_solid, r_water/sqrt(2))");
  } else if (bridge_width != 0.0) {
    fail(ErrorCode::InvalidConfig, "bridge_width is only meaningful for the BridgedWater variant");
  }
  CellGeometry g;
  g.dim = dim;
  g.r_solid = r_solid;
  g.r_water = r_water;
  g.variant = variant;
  g.bridge_width = variant == CellVariant::BridgedWater ? bridge_width : 0.0;
  return g;
}

/// Phase of a point of Y (coordinates taken mod 1 by the caller if needed).
inline Phase phase_at(const CellGeometry& g, Vec2 y) {
  const double dx = y[0] - 0.5, dy = y[1] - 0.5;
  const double r2 = dx * dx + dy * dy;
  if (r2 <= g.r_solid * g.r_solid) return Phase::Solid;
  if (r2 <= g.r_water * g.r_water) return Phase::Water;
  if (g.variant == CellVariant::BridgedWater) {
    const double hw = 0.5 * g.bridge_width;
    if (std::abs(dx) <= hw || std::abs(dy) <= hw) return Phase::Water;
  }
  return Phase::Air;
}

inline PhaseMeasures analytic_measures(const CellGeometry& g) {
  const double pi = std::numbers::pi;
  PhaseMeasures m;
  if (g.dim == 3) {
    // Only the annular layout is supported in 3d.
    m.vol_solid = 4.0 / 3.0 * pi * std::pow(g.r_solid, 3);
    m.vol_water = 4.0 / 3.0 * pi * (std::pow(g.r_water, 3) - std::pow(g.r_solid, 3));
    m.vol_air = 1.0 - m.vol_solid - m.vol_water;
    m.area_sw = 4.0 * pi * g.r_solid * g.r_solid;
    m.area_wa = 4.0 * pi * g.r_water * g.r_water;
    return m;
  }
  m.vol_solid = pi * g.r_solid * g.r_solid;
  m.area_sw = 2.0 * pi * g.r_solid;
  if (g.variant == CellVariant::Annulus) {
    m.vol_water = pi * (g.r_water * g.r_water - g.r_solid * g.r_solid);
    m.area_wa = 2.0 * pi * g.r_water;
  } else {
    const double w = g.bridge_width;
    const double tb = bridged_detail::theta_b(g);
    const double xb = bridged_detail::x_b(g);
    // Channel area outside the disk r_water: union of the two full-width
    // strips minus their intersection with the disk.
    m.vol_water = pi * (g.r_water * g.r_water - g.r_solid * g.r_solid) + 2.0 * w -
                  2.0 * w * xb - 4.0 * g.r_water * g.r_water * tb;
    // Circle minus the four channel mouths, plus eight straight channel walls.
    m.area_wa = 2.0 * pi * g.r_water - 8.0 * tb * g.r_water + 8.0 * (0.5 - xb);
  }
  m.vol_air = 1.0 - m.vol_solid - m.vol_water;
  return m;
}

}  // namespace corroscale

#endif
