#ifndef CORROSCALE_MESH_HPP
#define CORROSCALE_MESH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <unordered_map>
#include <vector>

#include "corroscale/errors.hpp"
#include "corroscale/geometry.hpp"

namespace corroscale {

/// Oriented interface segment between two mesh nodes. The normal is unit
/// length and points from the water side into the solid (sw) or into the
/// air (wa).
struct InterfaceFacet {
  int a = -1, b = -1;
  Vec2 normal{0, 0};
};

/// Conforming triangulation of the unit cell. Every triangle lies in exactly
/// one phase; both interfaces are chains of element edges; boundary nodes on
/// opposite faces match up exactly, stored in periodic_pairs as
/// (node on max face, node on min face) for each axis.
struct CellMesh {
  CellGeometry geom;
  double h = 0;
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> tris;
  std::vector<Phase> tri_phase;
  std::vector<std::array<int, 2>> periodic_pairs;
  std::vector<InterfaceFacet> sw_facets;
  std::vector<InterfaceFacet> wa_facets;

  double tri_area(int t) const {
    const Vec2& p = nodes[tris[t][0]];
    const Vec2& q = nodes[tris[t][1]];
    const Vec2& r = nodes[tris[t][2]];
    return 0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]));
  }
};

enum class InterfaceKind { SolidWater, WaterAir };

struct InterfaceQuadrature {
  std::vector<Vec2> points;
  std::vector<double> weights;  // segment lengths, midpoint rule
  std::vector<Vec2> normals;
};

namespace mesh_detail {

// One eighth of the cell, the sector 0 <= theta <= pi/4 about the center.
// The full mesh is produced by the dihedral symmetry maps. All coordinates
// are absolute (center at (1/2, 1/2)); points on the symmetry lines are
// constructed with exact y = 1/2 resp. x = y so the welding step sees
// bit-identical duplicates.
struct Proto {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> tris;
  std::vector<Phase> tri_phase;
  struct Facet {
    int a, b;
    Vec2 normal;
    InterfaceKind kind;
  };
  std::vector<Facet> facets;

  int add(Vec2 p) {
    nodes.push_back(p);
    return static_cast<int>(nodes.size()) - 1;
  }
  void tri(int a, int b, int c, Phase ph) {
    tris.push_back({a, b, c});
    tri_phase.push_back(ph);
  }
  void quad(int n00, int n10, int n11, int n01, Phase ph) {
    tri(n00, n10, n11, ph);
    tri(n00, n11, n01, ph);
  }
};

struct ThetaPt {
  double c, s;  // cos(theta), sin(theta)
};

// Angle samples over [0, pi/4] with exact endpoints. `split` >= 0 inserts an
// exact extra sample (the channel mouth angle for BridgedWater).
inline std::vector<ThetaPt> theta_samples(int n_lo, int n_hi, double c_split, double s_split,
                                          bool with_split) {
  std::vector<ThetaPt> th;
  const double quarter = std::numbers::pi / 4.0;
  if (!with_split) {
    const int n = n_hi;
    for (int j = 0; j <= n; ++j) {
      if (j == 0) {
        th.push_back({1.0, 0.0});
      } else if (j == n) {
        th.push_back({std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0});
      } else {
        const double t = quarter * j / n;
        th.push_back({std::cos(t), std::sin(t)});
      }
    }
    return th;
  }
  const double t_split = std::atan2(s_split, c_split);
  for (int j = 0; j <= n_lo; ++j) {
    if (j == 0)
      th.push_back({1.0, 0.0});
    else if (j == n_lo)
      th.push_back({c_split, s_split});
    else {
      const double t = t_split * j / n_lo;
      th.push_back({std::cos(t), std::sin(t)});
    }
  }
  for (int j = 1; j <= n_hi; ++j) {
    if (j == n_hi)
      th.push_back({std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0});
    else {
      const double t = t_split + (quarter - t_split) * j / n_hi;
      th.push_back({std::cos(t), std::sin(t)});
    }
  }
  return th;
}

// a + t*(b - a); exact at t = 0 and t = 1 for coordinates in [1/2, 1].
inline double lerp1(double a, double b, double t) { return a + t * (b - a); }
inline Vec2 lerp(Vec2 a, Vec2 b, double t) { return {lerp1(a[0], b[0], t), lerp1(a[1], b[1], t)}; }

inline Vec2 ring_pt(double rho, const ThetaPt& tp) {
  return {0.5 + rho * tp.c, 0.5 + rho * tp.s};
}

inline Vec2 inward_normal(Vec2 pa, Vec2 pb) {
  Vec2 m = 0.5 * (pa + pb);
  Vec2 d = Vec2{0.5, 0.5} - m;
  const double l = norm(d);
  return {d[0] / l, d[1] / l};
}

inline Proto build_sector(const CellGeometry& g, double h) {
  Proto P;
  const double rs = g.r_solid, rw = g.r_water;
  const bool bridged = g.variant == CellVariant::BridgedWater;
  const double hw = bridged ? 0.5 * g.bridge_width : 0.0;

  std::vector<ThetaPt> th;
  int j_split = -1;  // index of the channel mouth angle in `th`
  if (bridged) {
    const double xb = bridged_detail::x_b(g);
    const int n_ab = std::max(1, (int)std::ceil(hw / h));
    const double tb = bridged_detail::theta_b(g);
    const int n_aa = std::max(2, (int)std::ceil(std::max(0.5 - hw, (std::numbers::pi / 4 - tb) * rw) / h));
    th = theta_samples(n_ab, n_aa, xb / rw, hw / rw, true);
    j_split = n_ab;
  } else {
    const int n_a = std::max(3, (int)std::ceil(0.8 / h));
    th = theta_samples(0, n_a, 0, 0, false);
  }
  const int nt = static_cast<int>(th.size());  // angle sample count

  // Solid disk: center fan plus structured rings out to r_solid.
  const int ms = std::max(1, (int)std::ceil(rs / h));
  std::vector<std::vector<int>> ring(ms + 1, std::vector<int>(nt));
  const int center = P.add({0.5, 0.5});
  for (int j = 0; j < nt; ++j) ring[0][j] = center;
  for (int i = 1; i <= ms; ++i) {
    const double rho = rs * i / ms;
    for (int j = 0; j < nt; ++j) ring[i][j] = P.add(ring_pt(rho, th[j]));
  }
  for (int j = 0; j + 1 < nt; ++j) {
    P.tri(center, ring[1][j], ring[1][j + 1], Phase::Solid);
    for (int i = 1; i < ms; ++i)
      P.quad(ring[i][j], ring[i + 1][j], ring[i + 1][j + 1], ring[i][j + 1], Phase::Solid);
  }

  // Water annulus r_solid..r_water over the same angle samples.
  const int mw = std::max(1, (int)std::ceil((rw - rs) / h));
  std::vector<std::vector<int>> wring(mw + 1, std::vector<int>(nt));
  for (int i = 0; i <= mw; ++i) {
    const double rho = rs + (rw - rs) * i / mw;
    for (int j = 0; j < nt; ++j) wring[i][j] = P.add(ring_pt(rho, th[j]));
  }
  for (int j = 0; j + 1 < nt; ++j)
    for (int i = 0; i < mw; ++i)
      P.quad(wring[i][j], wring[i + 1][j], wring[i + 1][j + 1], wring[i][j + 1], Phase::Water);

  // Solid-water interface: the full r_solid ring.
  for (int j = 0; j + 1 < nt; ++j) {
    Vec2 pa = P.nodes[wring[0][j]], pb = P.nodes[wring[0][j + 1]];
    P.facets.push_back({wring[0][j], wring[0][j + 1], inward_normal(pa, pb), InterfaceKind::SolidWater});
  }

  auto outward = [&](int a, int b) {
    Vec2 n = inward_normal(P.nodes[a], P.nodes[b]);
    return Vec2{-n[0], -n[1]};
  };

  if (!bridged) {
    // Water-air interface: the full r_water ring.
    for (int j = 0; j + 1 < nt; ++j)
      P.facets.push_back({wring[mw][j], wring[mw][j + 1], outward(wring[mw][j], wring[mw][j + 1]),
                          InterfaceKind::WaterAir});
    // Air block between the circle and the cell boundary, radially blended.
    const int ma = std::max(2, (int)std::ceil((std::numbers::sqrt2 / 2 - rw) / h));
    std::vector<std::vector<int>> air(nt, std::vector<int>(ma + 1));
    for (int j = 0; j < nt; ++j) {
      const Vec2 A = ring_pt(rw, th[j]);
      const Vec2 F{1.0, 0.5 + 0.5 * (th[j].s / th[j].c)};
      air[j][0] = wring[mw][j];
      for (int k = 1; k <= ma; ++k) air[j][k] = P.add(lerp(A, F, (double)k / ma));
    }
    for (int j = 0; j + 1 < nt; ++j)
      for (int k = 0; k < ma; ++k)
        P.quad(air[j][k], air[j][k + 1], air[j + 1][k + 1], air[j + 1][k], Phase::Air);
    return P;
  }

  // BridgedWater: a water channel block hugs the axis, the air block sits
  // between the channel wall, the circle and the cell corner.
  const double xb = bridged_detail::x_b(g);
  const int n_len = std::max(1, (int)std::ceil(std::max(0.5 - xb, std::numbers::sqrt2 / 2 - rw) / h));

  // Channel block: horizontal rows from the circle to the face x = 1.
  std::vector<std::vector<int>> ch(j_split + 1, std::vector<int>(n_len + 1));
  for (int j = 0; j <= j_split; ++j) {
    const Vec2 A = ring_pt(rw, th[j]);
    ch[j][0] = wring[mw][j];
    for (int k = 1; k <= n_len; ++k)
      ch[j][k] = P.add({lerp1(A[0], 1.0, (double)k / n_len), A[1]});
  }
  for (int j = 0; j < j_split; ++j)
    for (int k = 0; k < n_len; ++k)
      P.quad(ch[j][k], ch[j][k + 1], ch[j + 1][k + 1], ch[j + 1][k], Phase::Water);
  // Channel wall is a water-air interface, normal straight up.
  for (int k = 0; k < n_len; ++k)
    P.facets.push_back({ch[j_split][k], ch[j_split][k + 1], Vec2{0.0, 1.0}, InterfaceKind::WaterAir});
  // Remaining circle arc (above the channel mouth) is water-air too.
  for (int j = j_split; j + 1 < nt; ++j)
    P.facets.push_back({wring[mw][j], wring[mw][j + 1], outward(wring[mw][j], wring[mw][j + 1]),
                        InterfaceKind::WaterAir});

  // Air block over angles [theta_b, pi/4].
  const int na = nt - 1 - j_split;  // angle intervals in the air part
  const double y_line = P.nodes[ch[j_split][0]][1];
  std::vector<std::vector<int>> air(na + 1, std::vector<int>(n_len + 1));
  for (int jj = 0; jj <= na; ++jj) {
    const int j = j_split + jj;
    const Vec2 A = ring_pt(rw, th[j]);
    const Vec2 F{1.0, lerp1(y_line, 1.0, (double)jj / na)};
    air[jj][0] = wring[mw][j];
    if (jj == 0) {
      for (int k = 0; k <= n_len; ++k) air[jj][k] = ch[j_split][k];
    } else {
      for (int k = 1; k <= n_len; ++k) air[jj][k] = P.add(lerp(A, F, (double)k / n_len));
    }
  }
  for (int jj = 0; jj < na; ++jj)
    for (int k = 0; k < n_len; ++k)
      P.quad(air[jj][k], air[jj][k + 1], air[jj + 1][k + 1], air[jj + 1][k], Phase::Air);
  return P;
}

// The eight symmetry maps of the square about its center: rotations by
// multiples of pi/2 and their compositions with the diagonal reflection.
// All are exact in floating point (coordinate swaps and 1 - x).
inline Vec2 apply_map(int m, Vec2 p) {
  const double x = p[0], y = p[1];
  switch (m) {
    case 0: return {x, y};
    case 1: return {y, x};
    case 2: return {1 - y, x};
    case 3: return {1 - x, y};
    case 4: return {1 - x, 1 - y};
    case 5: return {1 - y, 1 - x};
    case 6: return {y, 1 - x};
    default: return {x, 1 - y};
  }
}
inline Vec2 apply_map_linear(int m, Vec2 v) {
  const double x = v[0], y = v[1];
  switch (m) {
    case 0: return {x, y};
    case 1: return {y, x};
    case 2: return {-y, x};
    case 3: return {-x, y};
    case 4: return {-x, -y};
    case 5: return {-y, -x};
    case 6: return {y, -x};
    default: return {x, -y};
  }
}
inline bool map_flips_orientation(int m) { return m == 1 || m == 3 || m == 5 || m == 7; }

// Coordinate-keyed node welding. Duplicates coming from the symmetry maps
// are bit-identical or within a few ulp, far below the key resolution.
class Welder {
 public:
  explicit Welder(std::vector<Vec2>& nodes) : nodes_(nodes) {}

  int put(Vec2 p) {
    const std::int64_t ix = quant(p[0]), iy = quant(p[1]);
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        auto it = index_.find(key(ix + dx, iy + dy));
        if (it == index_.end()) continue;
        const Vec2 q = nodes_[it->second];
        if (std::abs(q[0] - p[0]) <= tol_ && std::abs(q[1] - p[1]) <= tol_) return it->second;
      }
    nodes_.push_back(p);
    const int id = static_cast<int>(nodes_.size()) - 1;
    index_.emplace(key(ix, iy), id);
    return id;
  }

 private:
  static constexpr double tol_ = 1e-9;
  static std::int64_t quant(double v) { return std::llround(v * 1e9); }
  static std::int64_t key(std::int64_t ix, std::int64_t iy) { return ix * 4000000019LL + iy; }
  std::vector<Vec2>& nodes_;
  std::unordered_map<std::int64_t, int> index_;
};

inline void fix_orientation(CellMesh& mesh) {
  for (std::size_t t = 0; t < mesh.tris.size(); ++t) {
    double a = mesh.tri_area(static_cast<int>(t));
    if (a < 0) {
      std::swap(mesh.tris[t][1], mesh.tris[t][2]);
      a = -a;
    }
    if (!(a > 1e-18)) fail(ErrorCode::MeshFailure, "degenerate triangle produced by the mesher");
  }
}

inline void build_periodic_pairs(CellMesh& mesh) {
  constexpr double tol = 1e-12;
  // Snap boundary coordinates exactly onto the faces first.
  for (auto& p : mesh.nodes)
    for (int d = 0; d < 2; ++d) {
      if (std::abs(p[d]) < tol) p[d] = 0.0;
      if (std::abs(p[d] - 1.0) < tol) p[d] = 1.0;
    }
  for (int axis = 0; axis < 2; ++axis) {
    std::vector<std::pair<double, int>> lo, hi;
    for (int i = 0; i < (int)mesh.nodes.size(); ++i) {
      if (mesh.nodes[i][axis] == 0.0) lo.emplace_back(mesh.nodes[i][1 - axis], i);
      if (mesh.nodes[i][axis] == 1.0) hi.emplace_back(mesh.nodes[i][1 - axis], i);
    }
    std::sort(lo.begin(), lo.end());
    std::sort(hi.begin(), hi.end());
    if (lo.size() != hi.size())
      fail(ErrorCode::MeshFailure, "periodic face node counts differ");
    for (std::size_t k = 0; k < lo.size(); ++k) {
      if (std::abs(lo[k].first - hi[k].first) > 1e-9)
        fail(ErrorCode::MeshFailure, "periodic face nodes do not line up");
      mesh.periodic_pairs.push_back({hi[k].second, lo[k].second});
    }
  }
}

}  // namespace mesh_detail

/// Conforming template mesh of the unit cell at target edge length h.
/// Deterministic: identical inputs give identical meshes.
inline CellMesh mesh_cell(const CellGeometry& g, double h) {
  if (g.dim != 2)
    fail(ErrorCode::UnsupportedDim, "meshing is implemented for dim = 2");
  if (!(h > 0.0 && h < 0.25))
    fail(ErrorCode::MeshFailure, "target mesh size must lie in (0, 0.25), got " + std::to_string(h));
  const double feature = std::min({g.r_solid, g.r_water - g.r_solid, 0.5 - g.r_water});
  if (h >= feature)
    fail(ErrorCode::MeshFailure,
         "h too coarse to resolve the phase layout (needs h < " + std::to_string(feature) + ")");

  const mesh_detail::Proto sector = mesh_detail::build_sector(g, h);

  CellMesh mesh;
  mesh.geom = g;
  mesh.h = h;
  mesh_detail::Welder weld(mesh.nodes);
  std::vector<int> remap(sector.nodes.size());
  for (int m = 0; m < 8; ++m) {
    for (std::size_t i = 0; i < sector.nodes.size(); ++i)
      remap[i] = weld.put(mesh_detail::apply_map(m, sector.nodes[i]));
    const bool flip = mesh_detail::map_flips_orientation(m);
    for (std::size_t t = 0; t < sector.tris.size(); ++t) {
      auto tr = sector.tris[t];
      if (flip) std::swap(tr[1], tr[2]);
      mesh.tris.push_back({remap[tr[0]], remap[tr[1]], remap[tr[2]]});
      mesh.tri_phase.push_back(sector.tri_phase[t]);
    }
    for (const auto& f : sector.facets) {
      InterfaceFacet g2;
      g2.a = remap[f.a];
      g2.b = remap[f.b];
      g2.normal = mesh_detail::apply_map_linear(m, f.normal);
      (f.kind == InterfaceKind::SolidWater ? mesh.sw_facets : mesh.wa_facets).push_back(g2);
    }
  }
  mesh_detail::fix_orientation(mesh);
  mesh_detail::build_periodic_pairs(mesh);
  return mesh;
}

/// Uniform triangulation of the full cell with a single phase label.
/// Covers the degenerate layout where one phase fills all of Y; there are no
/// interfaces.
inline CellMesh make_full_cell_mesh(double h, Phase phase) {
  if (!(h > 0.0 && h <= 0.5)) fail(ErrorCode::MeshFailure, "target mesh size must lie in (0, 1/2]");
  const int n = std::max(2, (int)std::ceil(1.0 / h));
  CellMesh mesh;
  mesh.h = 1.0 / n;
  mesh.nodes.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) mesh.nodes.push_back({(double)i / n, (double)j / n});
  auto id = [&](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      mesh.tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      mesh.tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
      mesh.tri_phase.push_back(phase);
      mesh.tri_phase.push_back(phase);
    }
  for (int j = 0; j <= n; ++j) mesh.periodic_pairs.push_back({id(n, j), id(0, j)});
  for (int i = 0; i <= n; ++i) mesh.periodic_pairs.push_back({id(i, n), id(i, 0)});
  return mesh;
}

/// Volumes and interface measures of the discrete mesh.
inline PhaseMeasures phase_measures(const CellMesh& mesh) {
  PhaseMeasures m;
  for (std::size_t t = 0; t < mesh.tris.size(); ++t) {
    const double a = mesh.tri_area(static_cast<int>(t));
    switch (mesh.tri_phase[t]) {
      case Phase::Solid: m.vol_solid += a; break;
      case Phase::Water: m.vol_water += a; break;
      case Phase::Air: m.vol_air += a; break;
    }
  }
  for (const auto& f : mesh.sw_facets) m.area_sw += norm(mesh.nodes[f.b] - mesh.nodes[f.a]);
  for (const auto& f : mesh.wa_facets) m.area_wa += norm(mesh.nodes[f.b] - mesh.nodes[f.a]);
  return m;
}

/// Midpoint quadrature over one interface of the mesh.
inline InterfaceQuadrature interface_quadrature(const CellMesh& mesh, InterfaceKind kind) {
  const auto& facets = kind == InterfaceKind::SolidWater ? mesh.sw_facets : mesh.wa_facets;
  if (facets.empty())
    fail(ErrorCode::MissingInterface,
         std::string("mesh has no ") +
             (kind == InterfaceKind::SolidWater ? "solid-water" : "water-air") + " interface");
  InterfaceQuadrature q;
  q.points.reserve(facets.size());
  for (const auto& f : facets) {
    const Vec2 pa = mesh.nodes[f.a], pb = mesh.nodes[f.b];
    q.points.push_back(0.5 * (pa + pb));
    q.weights.push_back(norm(pb - pa));
    q.normals.push_back(f.normal);
  }
  return q;
}

/// Debug dump; line oriented ASCII, not a stable interchange format.
inline void write_mesh_ascii(const CellMesh& mesh, std::ostream& os) {
  os << "corroscale-mesh 1\n";
  os << "nodes " << mesh.nodes.size() << "\n";
  for (const auto& p : mesh.nodes) os << p[0] << " " << p[1] << "\n";
  os << "triangles " << mesh.tris.size() << "\n";
  for (std::size_t t = 0; t < mesh.tris.size(); ++t)
    os << mesh.tris[t][0] << " " << mesh.tris[t][1] << " " << mesh.tris[t][2] << " "
       << phase_name(mesh.tri_phase[t]) << "\n";
  auto facets = [&os](const char* name, const std::vector<InterfaceFacet>& fs) {
    os << name << " " << fs.size() << "\n";
    for (const auto& f : fs)
      os << f.a << " " << f.b << " " << f.normal[0] << " " << f.normal[1] << "\n";
  };
  facets("sw_facets", mesh.sw_facets);
  facets("wa_facets", mesh.wa_facets);
  os << "periodic " << mesh.periodic_pairs.size() << "\n";
  for (const auto& pr : mesh.periodic_pairs) os << pr[0] << " " << pr[1] << "\n";
}

}  // namespace corroscale

#endif
