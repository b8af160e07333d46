#ifndef CORROSCALE_CELL_PROBLEM_HPP
#define CORROSCALE_CELL_PROBLEM_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "corroscale/mesh.hpp"
#include "corroscale/sparse.hpp"

namespace corroscale {

/// Diffusion coefficient of one species. The corrector problem only sees the
/// tensor on the species' own phase; a separable time factor does not change
/// the corrector and simply scales the effective tensor.
struct DiffusionSpec {
  enum class Kind { ConstantTensor, TimeSeparable, PerPhaseConstant };
  Kind kind = Kind::ConstantTensor;
  Mat2 tensor = Mat2::identity();
  Mat2 tensor_air = Mat2::identity();    // PerPhaseConstant only
  Mat2 tensor_solid = Mat2::identity();  // PerPhaseConstant only
  std::vector<double> times, factors;    // TimeSeparable only

  bool operator==(const DiffusionSpec&) const = default;

  Mat2 tensor_for(Phase p) const {
    if (kind != Kind::PerPhaseConstant) return tensor;
    switch (p) {
      case Phase::Water: return tensor;
      case Phase::Air: return tensor_air;
      case Phase::Solid: return tensor_solid;
    }
    return tensor;
  }

  double factor_at(double t) const {
    if (kind != Kind::TimeSeparable || times.empty()) return 1.0;
    if (t <= times.front()) return factors.front();
    if (t >= times.back()) return factors.back();
    for (std::size_t i = 1; i < times.size(); ++i)
      if (t <= times[i]) {
        const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
        return factors[i - 1] + w * (factors[i] - factors[i - 1]);
      }
    return factors.back();
  }
};

/// Corrector of one coordinate direction on one phase. Values live on all
/// mesh nodes (zero off the phase); the field is Y-periodic and has zero
/// volume mean over its phase, component by component.
struct CorrectorField {
  Phase phase = Phase::Water;
  int direction = 0;
  std::vector<double> node_values;
  double rel_residual = 0;
  int cg_iterations = 0;
};

struct EffectiveTensor {
  Mat2 d;
  Phase phase = Phase::Water;
  double phase_fraction = 0;
};

struct EffectiveValidation {
  double lambda_min = 0, lambda_max = 0;
  double symmetry_defect_rel = 0;
  double voigt_bound = 0;
  bool degenerate = false;       // lambda_min below threshold; expected for a
                                 // phase that does not percolate
  bool symmetry_defect = false;  // asymmetry beyond tolerance
  bool voigt_ok = true;          // lambda_max respects the phase-fraction bound
};

struct EffectiveRates {
  double k1 = 0, k2 = 0;  // cell averages of the bulk rates
  double a = 0, b = 0;    // water-air interface integrals of the exchange rates
};

namespace cell_detail {

struct P1Grad {
  Vec2 g[3];
  double area;
};

inline P1Grad p1_gradients(const CellMesh& mesh, int t) {
  const Vec2 p = mesh.nodes[mesh.tris[t][0]];
  const Vec2 q = mesh.nodes[mesh.tris[t][1]];
  const Vec2 r = mesh.nodes[mesh.tris[t][2]];
  P1Grad out;
  out.area = 0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]));
  const double inv = 1.0 / (2.0 * out.area);
  out.g[0] = {(q[1] - r[1]) * inv, (r[0] - q[0]) * inv};
  out.g[1] = {(r[1] - p[1]) * inv, (p[0] - r[0]) * inv};
  out.g[2] = {(p[1] - q[1]) * inv, (q[0] - p[0]) * inv};
  return out;
}

// Periodic identification and phase restriction: maps every node of the
// phase to a master degree of freedom, and labels the connected components
// of the phase on the torus (a disconnected phase gives one singular block
// per component).
struct PhaseDofs {
  std::vector<int> node_dof;    // mesh node -> dof, -1 off phase
  std::vector<int> dof_node;    // representative node per dof
  std::vector<int> dof_comp;    // component id per dof
  std::vector<int> tri_ids;     // triangles of the phase
  int n_dofs = 0, n_comps = 0;
};

inline PhaseDofs phase_dofs(const CellMesh& mesh, Phase phase) {
  const int nn = static_cast<int>(mesh.nodes.size());
  UnionFind periodic(nn);
  for (const auto& pr : mesh.periodic_pairs) periodic.unite(pr[0], pr[1]);

  PhaseDofs d;
  d.node_dof.assign(nn, -1);
  std::vector<char> on_phase(nn, 0);
  for (int t = 0; t < (int)mesh.tris.size(); ++t) {
    if (mesh.tri_phase[t] != phase) continue;
    d.tri_ids.push_back(t);
    for (int k = 0; k < 3; ++k) on_phase[mesh.tris[t][k]] = 1;
  }
  if (d.tri_ids.empty())
    fail(ErrorCode::SingularSystem,
         std::string("phase '") + phase_name(phase) + "' has no elements in this mesh");

  // Master nodes in ascending representative order keeps dof numbering
  // deterministic.
  for (int v = 0; v < nn; ++v) {
    if (!on_phase[v]) continue;
    const int root = periodic.find(v);
    if (d.node_dof[root] == -1) {
      d.node_dof[root] = d.n_dofs++;
      d.dof_node.push_back(root);
    }
  }
  for (int v = 0; v < nn; ++v)
    if (on_phase[v]) d.node_dof[v] = d.node_dof[periodic.find(v)];

  UnionFind comp(d.n_dofs);
  for (int t : d.tri_ids) {
    const auto& tr = mesh.tris[t];
    comp.unite(d.node_dof[tr[0]], d.node_dof[tr[1]]);
    comp.unite(d.node_dof[tr[0]], d.node_dof[tr[2]]);
  }
  std::vector<int> comp_id(d.n_dofs, -1);
  d.dof_comp.assign(d.n_dofs, -1);
  for (int i = 0; i < d.n_dofs; ++i) {
    const int root = comp.find(i);
    if (comp_id[root] == -1) comp_id[root] = d.n_comps++;
    d.dof_comp[i] = comp_id[root];
  }
  return d;
}

}  // namespace cell_detail

/// Corrector problems on one phase: for each direction e_i solve
///   -div(D (grad chi_i + e_i)) = 0 on the phase, Y-periodic,
/// with vanishing conormal flux on the internal interfaces (natural
/// condition) and zero mean per connected component.
inline std::vector<CorrectorField> solve_cell_problem(const CellMesh& mesh, Phase phase,
                                                      const Mat2& D) {
  if (!D.is_symmetric(1e-12))
    fail(ErrorCode::InvalidConfig, "diffusion tensor must be symmetric");
  if (!(sym_eigenvalues(D)[0] > 0))
    fail(ErrorCode::InvalidConfig, "diffusion tensor must be positive definite");

  const cell_detail::PhaseDofs dofs = cell_detail::phase_dofs(mesh, phase);
  const int n = dofs.n_dofs;

  CooBuilder builder(n);
  std::vector<std::vector<double>> rhs(2, std::vector<double>(n, 0.0));
  for (int t : dofs.tri_ids) {
    const auto grad = cell_detail::p1_gradients(mesh, t);
    int gd[3];
    for (int k = 0; k < 3; ++k) gd[k] = dofs.node_dof[mesh.tris[t][k]];
    for (int a = 0; a < 3; ++a) {
      const Vec2 Dga = D.apply(grad.g[a]);
      for (int b = 0; b < 3; ++b)
        builder.add(gd[a], gd[b], grad.area * dot(Dga, grad.g[b]));
      // load: -integral D e_i . grad(phi_a)
      rhs[0][gd[a]] -= grad.area * Dga[0];
      rhs[1][gd[a]] -= grad.area * Dga[1];
    }
  }
  const CsrMatrix K = builder.compress();

  // Mean-free projection per component keeps CG inside the range of the
  // singular periodic Neumann operator.
  std::vector<int> comp_count(dofs.n_comps, 0);
  for (int i = 0; i < n; ++i) ++comp_count[dofs.dof_comp[i]];
  std::function<void(std::vector<double>&)> project = [&](std::vector<double>& v) {
    std::vector<double> mean(dofs.n_comps, 0.0);
    for (int i = 0; i < n; ++i) mean[dofs.dof_comp[i]] += v[i];
    for (int c = 0; c < dofs.n_comps; ++c) mean[c] /= comp_count[c];
    for (int i = 0; i < n; ++i) v[i] -= mean[dofs.dof_comp[i]];
  };

  const int max_iter = std::max(200, (int)(50.0 * std::sqrt((double)n)));
  // A load below this is assembly roundoff, not a right-hand side: it happens
  // exactly when the phase tiles the cell uniformly, where the zero corrector
  // solves the problem. CG on such noise would report a meaningless relative
  // residual, so the solve is skipped and the residual test uses the same
  // floor as its scale.
  const double load_floor = 1e-12 * D.max_abs();
  std::vector<CorrectorField> out;
  for (int dir = 0; dir < 2; ++dir) {
    std::vector<double> x(n, 0.0);
    std::vector<double> b = rhs[dir];
    project(b);
    double bsq = 0;
    for (double v : b) bsq += v * v;
    CgResult cg;
    if (std::sqrt(bsq) > load_floor) cg = cg_solve(K, b, x, 1e-12, max_iter, &project);

    // Residual measured against the unprojected load; tolerance is part of
    // the solver contract.
    std::vector<double> Kx(n);
    K.mul(x, Kx);
    double rn = 0, bn = 0;
    for (int i = 0; i < n; ++i) {
      const double ri = rhs[dir][i] - Kx[i];
      rn += ri * ri;
      bn += rhs[dir][i] * rhs[dir][i];
    }
    rn = std::sqrt(rn);
    bn = std::sqrt(bn);
    const double rel = bn > load_floor ? rn / bn : 0.0;
    if (rel > 1e-10)
      fail(ErrorCode::NoConvergence,
           "cell problem direction " + std::to_string(dir + 1) + " stalled at relative residual " +
               std::to_string(rel) + " after " + std::to_string(cg.iterations) + " iterations");

    CorrectorField f;
    f.phase = phase;
    f.direction = dir;
    f.rel_residual = rel;
    f.cg_iterations = cg.iterations;
    f.node_values.assign(mesh.nodes.size(), 0.0);
    for (std::size_t v = 0; v < mesh.nodes.size(); ++v)
      if (dofs.node_dof[v] >= 0) f.node_values[v] = x[dofs.node_dof[v]];

    // Volume-weighted zero mean over the phase, per component.
    std::vector<double> vol(dofs.n_comps, 0.0), integral(dofs.n_comps, 0.0);
    for (int t : dofs.tri_ids) {
      const double area = mesh.tri_area(t);
      const auto& tr = mesh.tris[t];
      const int c = dofs.dof_comp[dofs.node_dof[tr[0]]];
      vol[c] += area;
      integral[c] +=
          area / 3.0 * (f.node_values[tr[0]] + f.node_values[tr[1]] + f.node_values[tr[2]]);
    }
    for (std::size_t v = 0; v < mesh.nodes.size(); ++v)
      if (dofs.node_dof[v] >= 0)
        f.node_values[v] -= integral[dofs.dof_comp[dofs.node_dof[v]]] /
                            vol[dofs.dof_comp[dofs.node_dof[v]]];
    out.push_back(std::move(f));
  }
  return out;
}

/// Volume mean of a corrector over its phase (diagnostic; ~0 after
/// normalization).
inline double corrector_mean(const CellMesh& mesh, const CorrectorField& f) {
  double vol = 0, integral = 0;
  for (int t = 0; t < (int)mesh.tris.size(); ++t) {
    if (mesh.tri_phase[t] != f.phase) continue;
    const double area = mesh.tri_area(t);
    const auto& tr = mesh.tris[t];
    vol += area;
    integral += area / 3.0 * (f.node_values[tr[0]] + f.node_values[tr[1]] + f.node_values[tr[2]]);
  }
  return integral / vol;
}

/// Effective tensor from the correctors,
///   d_ij = (1/|Y|) integral_phase (grad chi_i + e_i)^T D (grad chi_j + e_j),
/// which for exact correctors equals the standard row formula
/// (1/|Y|) integral (D_ij + sum_k D_ik d chi_j / d y_k); the symmetric form
/// is used because it keeps the discrete tensor symmetric. |Y| = 1.
inline EffectiveTensor effective_diffusion(const CellMesh& mesh,
                                           const std::vector<CorrectorField>& chi, const Mat2& D) {
  if (chi.size() != 2)
    fail(ErrorCode::MissingCorrector, "need one corrector per coordinate direction");
  for (int i = 0; i < 2; ++i) {
    if (chi[i].direction != i || chi[i].node_values.size() != mesh.nodes.size())
      fail(ErrorCode::MissingCorrector, "corrector fields do not match this mesh");
    if (chi[i].phase != chi[0].phase)
      fail(ErrorCode::MissingCorrector, "corrector fields come from different phases");
  }
  const Phase phase = chi[0].phase;
  double d[2][2] = {{0, 0}, {0, 0}};
  double vol = 0;
  for (int t = 0; t < (int)mesh.tris.size(); ++t) {
    if (mesh.tri_phase[t] != phase) continue;
    const auto grad = cell_detail::p1_gradients(mesh, t);
    const auto& tr = mesh.tris[t];
    Vec2 flux[2];
    for (int i = 0; i < 2; ++i) {
      Vec2 gchi{0, 0};
      for (int k = 0; k < 3; ++k) {
        const double v = chi[i].node_values[tr[k]];
        gchi[0] += v * grad.g[k][0];
        gchi[1] += v * grad.g[k][1];
      }
      gchi[i == 0 ? 0 : 1] += 1.0;
      flux[i] = gchi;
    }
    for (int i = 0; i < 2; ++i) {
      const Vec2 Df = D.apply(flux[i]);
      for (int j = 0; j < 2; ++j) d[j][i] += grad.area * dot(flux[j], Df);
    }
    vol += grad.area;
  }
  EffectiveTensor out;
  out.d = {d[0][0], d[0][1], d[1][0], d[1][1]};
  out.phase = phase;
  out.phase_fraction = vol;
  return out;
}

/// Sanity flags for an effective tensor. Degeneracy (a non-percolating
/// phase) is reported, not treated as an error.
inline EffectiveValidation validate_effective(const EffectiveTensor& t, const Mat2& D) {
  EffectiveValidation v;
  const auto ev = sym_eigenvalues(t.d);
  v.lambda_min = ev[0];
  v.lambda_max = ev[1];
  v.degenerate = ev[0] < 1e-6;
  const double scale = std::max(1e-300, t.d.max_abs());
  v.symmetry_defect_rel = t.d.symmetry_defect() / scale;
  v.symmetry_defect = t.d.symmetry_defect() > 1e-10 * scale;
  v.voigt_bound = t.phase_fraction * sym_eigenvalues(D)[1];
  v.voigt_ok = v.lambda_max <= v.voigt_bound + 1e-8;
  return v;
}

/// Cell averages of the bulk rates and interface integrals of the exchange
/// rates:
///   k_j = (1/|Y|) integral_Y k_j(y) dy,
///   a   = (1/|Y|) integral_{Gamma_wa} a(y) ds,   b alike.   |Y| = 1.
inline EffectiveRates effective_rates(const CellMesh& mesh,
                                      const std::function<double(Vec2)>& k1,
                                      const std::function<double(Vec2)>& k2,
                                      const std::function<double(Vec2)>& a,
                                      const std::function<double(Vec2)>& b) {
  EffectiveRates r;
  for (int t = 0; t < (int)mesh.tris.size(); ++t) {
    const auto& tr = mesh.tris[t];
    const Vec2 c = (1.0 / 3.0) * (mesh.nodes[tr[0]] + mesh.nodes[tr[1]] + mesh.nodes[tr[2]]);
    const double area = mesh.tri_area(t);
    const double v1 = k1(c), v2 = k2(c);
    if (v1 < 0 || v2 < 0)
      fail(ErrorCode::NegativeRate, "bulk rate sampled negative at a cell point");
    r.k1 += area * v1;
    r.k2 += area * v2;
  }
  const InterfaceQuadrature q = interface_quadrature(mesh, InterfaceKind::WaterAir);
  for (std::size_t i = 0; i < q.points.size(); ++i) {
    const double va = a(q.points[i]), vb = b(q.points[i]);
    if (va < 0 || vb < 0)
      fail(ErrorCode::NegativeRate, "exchange rate sampled negative on the water-air interface");
    r.a += q.weights[i] * va;
    r.b += q.weights[i] * vb;
  }
  return r;
}

inline EffectiveRates effective_rates_const(const CellMesh& mesh, double k1, double k2, double a,
                                            double b) {
  if (k1 < 0 || k2 < 0 || a < 0 || b < 0)
    fail(ErrorCode::NegativeRate, "rate constants must be nonnegative");
  auto c1 = [k1](Vec2) { return k1; };
  auto c2 = [k2](Vec2) { return k2; };
  auto ca = [a](Vec2) { return a; };
  auto cb = [b](Vec2) { return b; };
  return effective_rates(mesh, c1, c2, ca, cb);
}

}  // namespace corroscale

#endif
