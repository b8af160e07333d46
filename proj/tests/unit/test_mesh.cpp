#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "corroscale/mesh.hpp"

using namespace corroscale;
using Catch::Approx;

namespace {

CellMesh annulus_mesh(double h = 0.02) {
  return mesh_cell(build_geometry(2, 0.2, 0.35, CellVariant::Annulus), h);
}

CellMesh bridged_mesh(double h = 0.02) {
  return mesh_cell(build_geometry(2, 0.2, 0.35, CellVariant::BridgedWater, 0.125), h);
}

double min_tri_area(const CellMesh& m) {
  double lo = 1e300;
  for (int t = 0; t < (int)m.tris.size(); ++t) lo = std::min(lo, m.tri_area(t));
  return lo;
}

}  // namespace

TEST_CASE("mesh areas track the continuum measures", "[mesh]") {
  for (bool bridged : {false, true}) {
    const CellMesh m = bridged ? bridged_mesh() : annulus_mesh();
    const PhaseMeasures exact = analytic_measures(m.geom);
    const PhaseMeasures got = phase_measures(m);
    INFO((bridged ? "bridged" : "annulus"));
    // polygonal boundary cuts the circular arcs short: O(h^2) area defect
    CHECK(got.vol_solid == Approx(exact.vol_solid).epsilon(2e-3));
    CHECK(got.vol_water == Approx(exact.vol_water).epsilon(2e-3));
    CHECK(got.vol_air == Approx(exact.vol_air).epsilon(2e-3));
    CHECK(got.vol_solid + got.vol_water + got.vol_air == Approx(1.0).epsilon(1e-12));
    CHECK(got.area_sw == Approx(exact.area_sw).epsilon(2e-3));
    CHECK(got.area_wa == Approx(exact.area_wa).epsilon(2e-3));
    CHECK(min_tri_area(m) > 0.0);
  }
}

TEST_CASE("boundary area defect shrinks under refinement", "[mesh]") {
  const PhaseMeasures exact = analytic_measures(build_geometry(2, 0.2, 0.35, CellVariant::Annulus));
  const double e1 = std::abs(phase_measures(annulus_mesh(0.04)).vol_water - exact.vol_water);
  const double e2 = std::abs(phase_measures(annulus_mesh(0.02)).vol_water - exact.vol_water);
  CHECK(e2 < e1);
  CHECK(e2 < 0.3 * e1);  // second-order boundary approximation
}

TEST_CASE("mesh has the full dihedral symmetry in exact arithmetic", "[mesh]") {
  const CellMesh m = annulus_mesh(0.04);
  std::set<std::pair<double, double>> node_set;
  for (const Vec2& p : m.nodes) node_set.insert({p[0], p[1]});
  // reflection across x = 1/2 and the diagonal swap must both be exact
  for (const Vec2& p : m.nodes) {
    REQUIRE(node_set.count({1.0 - p[0], p[1]}) == 1);
    REQUIRE(node_set.count({p[1], p[0]}) == 1);
  }
}

TEST_CASE("periodic pairs identify opposite boundary points", "[mesh]") {
  const CellMesh m = bridged_mesh(0.04);
  REQUIRE_FALSE(m.periodic_pairs.empty());
  for (const auto& pr : m.periodic_pairs) {
    const Vec2 a = m.nodes[pr[0]], b = m.nodes[pr[1]];
    const double ddx = std::abs(a[0] - b[0]), ddy = std::abs(a[1] - b[1]);
    const bool x_pair = ddx == 1.0 && ddy == 0.0;
    const bool y_pair = ddy == 1.0 && ddx == 0.0;
    REQUIRE((x_pair || y_pair));
  }
}

TEST_CASE("interface chains are closed and oriented", "[mesh]") {
  const CellMesh m = annulus_mesh();
  // every sw facet node appears exactly twice: the chain is a closed loop
  std::map<int, int> degree;
  for (const auto& f : m.sw_facets) {
    degree[f.a]++;
    degree[f.b]++;
  }
  for (const auto& [node, d] : degree) REQUIRE(d == 2);

  // sw normals point inward (toward the solid core), wa normals outward
  for (const auto& q : {interface_quadrature(m, InterfaceKind::SolidWater)}) {
    for (std::size_t i = 0; i < q.points.size(); ++i) {
      const Vec2 radial = q.points[i] - Vec2{0.5, 0.5};
      REQUIRE(dot(q.normals[i], radial) < 0.0);
      REQUIRE(norm(q.normals[i]) == Approx(1.0).epsilon(1e-12));
    }
  }
  const auto qwa = interface_quadrature(m, InterfaceKind::WaterAir);
  for (std::size_t i = 0; i < qwa.points.size(); ++i) {
    const Vec2 radial = qwa.points[i] - Vec2{0.5, 0.5};
    REQUIRE(dot(qwa.normals[i], radial) > 0.0);
  }
  const double total = [&] {
    double s = 0;
    for (double w : qwa.weights) s += w;
    return s;
  }();
  CHECK(total == Approx(2.0 * std::numbers::pi * 0.35).epsilon(2e-3));
}

TEST_CASE("full cell mesh covers the unit square with one phase", "[mesh]") {
  const CellMesh m = make_full_cell_mesh(0.05, Phase::Water);
  const PhaseMeasures pm = phase_measures(m);
  CHECK(pm.vol_water == Approx(1.0).epsilon(1e-13));
  CHECK(pm.vol_solid == 0.0);
  CHECK(pm.vol_air == 0.0);
  CHECK(m.sw_facets.empty());
  CHECK_THROWS_AS(interface_quadrature(m, InterfaceKind::SolidWater), Error);
}

TEST_CASE("degenerate mesh size is rejected", "[mesh]") {
  CHECK_THROWS_AS(mesh_cell(build_geometry(2, 0.2, 0.35, CellVariant::Annulus), 0.0), Error);
  CHECK_THROWS_AS(make_full_cell_mesh(0.0, Phase::Water), Error);
}
