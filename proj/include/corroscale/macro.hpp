#ifndef CORROSCALE_MACRO_HPP
#define CORROSCALE_MACRO_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "corroscale/cell_problem.hpp"
#include "corroscale/config.hpp"
#include "corroscale/kinetics.hpp"
#include "corroscale/sparse.hpp"

namespace corroscale {

/// Uniform cell-centered grid on the square [lo, hi]^2. Boundary tags apply
/// to the gas species u3 only; every other species is zero flux on every
/// face. Face order: left, right, bottom, top.
struct MacroGrid {
  double lo = 0.0, hi = 1.0;
  int n = 16;
  std::array<BcKind, 4> bc{BcKind::Neumann, BcKind::Neumann, BcKind::Neumann, BcKind::Neumann};

  double dx() const { return (hi - lo) / n; }
  int cells() const { return n * n; }
  int id(int i, int j) const { return j * n + i; }
  Vec2 center(int i, int j) const {
    const double d = dx();
    return {lo + (i + 0.5) * d, lo + (j + 0.5) * d};
  }
};

/// Quadrature of the solid-water interface carried along with the upscaled
/// model: the gypsum layer u5 keeps its microscale coordinate, resolved by
/// these points. Weights sum to the interface length |Gamma_sw|.
struct SwQuad {
  std::vector<double> w;
  std::vector<double> k3;
};

/// Coefficients of the upscaled system. Effective tensors are per species;
/// a separable time factor rescales them without changing the correctors.
struct EffectiveModel {
  std::array<Mat2, 4> d{};
  std::array<std::vector<double>, 4> d_times{}, d_factors{};
  double k1 = 0, k2 = 0;
  HenryLaw henry;
  RateLaw law;
  SwQuad sw;
  double u3_dirichlet_const = 0;
  std::vector<double> u3d_times, u3d_values;
  BoundsA4 bounds;

  double d_factor(int sp, double t) const {
    const auto& ts = d_times[sp];
    if (ts.empty()) return 1.0;
    const auto& fs = d_factors[sp];
    if (t <= ts.front()) return fs.front();
    if (t >= ts.back()) return fs.back();
    for (std::size_t i = 1; i < ts.size(); ++i)
      if (t <= ts[i]) {
        const double w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
        return fs[i - 1] + w * (fs[i] - fs[i - 1]);
      }
    return fs.back();
  }
  double u3_dirichlet(double t) const {
    if (u3d_times.empty()) return u3_dirichlet_const;
    if (t <= u3d_times.front()) return u3d_values.front();
    if (t >= u3d_times.back()) return u3d_values.back();
    for (std::size_t i = 1; i < u3d_times.size(); ++i)
      if (t <= u3d_times[i]) {
        const double w = (t - u3d_times[i - 1]) / (u3d_times[i] - u3d_times[i - 1]);
        return u3d_values[i - 1] + w * (u3d_values[i] - u3d_values[i - 1]);
      }
    return u3d_values.back();
  }
  double sw_weight_total() const {
    double s = 0;
    for (double w : sw.w) s += w;
    return s;
  }
};

/// Cell-centered fields u1..u4 plus the distributed gypsum u5 with one value
/// per (cell, interface quadrature point).
struct MacroState {
  double t = 0;
  int n = 0, nq = 0;
  std::array<std::vector<double>, 4> u;
  std::vector<double> u5;  // cell-major: u5[c * nq + q]

  double& u5_at(int c, int q) { return u5[c * nq + q]; }
  double u5_at(int c, int q) const { return u5[c * nq + q]; }
};

using FieldInit = std::function<double(Vec2)>;

/// Midpoint sampling of the initial data. u5 starts flat in the microscale
/// coordinate; NegativeInitialData if any sample is negative.
inline MacroState init_state(const MacroGrid& grid, const EffectiveModel& model,
                             const std::array<FieldInit, 5>& init) {
  MacroState s;
  s.n = grid.n;
  s.nq = static_cast<int>(model.sw.w.size());
  for (auto& f : s.u) f.assign(grid.cells(), 0.0);
  s.u5.assign(grid.cells() * s.nq, 0.0);
  for (int j = 0; j < grid.n; ++j)
    for (int i = 0; i < grid.n; ++i) {
      const Vec2 x = grid.center(i, j);
      const int c = grid.id(i, j);
      for (int sp = 0; sp < 4; ++sp) {
        const double v = init[sp](x);
        if (v < 0)
          fail(ErrorCode::NegativeInitialData,
               "u" + std::to_string(sp + 1) + " initial data negative at a cell center");
        s.u[sp][c] = v;
      }
      const double v5 = init[4](x);
      if (v5 < 0) fail(ErrorCode::NegativeInitialData, "u5 initial data negative at a cell center");
      for (int q = 0; q < s.nq; ++q) s.u5_at(c, q) = v5;
    }
  return s;
}

/// Quadrature form of the interface sink that removes acid where gypsum
/// grows: (1/|Y|) sum_q w_q k3_q R(u1) Q(u5_q), per cell. |Y| = 1.
inline std::vector<double> gypsum_sink(const MacroState& s, const EffectiveModel& m) {
  std::vector<double> sink(s.u[0].size(), 0.0);
  for (std::size_t c = 0; c < sink.size(); ++c) {
    const double R = eval_R(m.law, s.u[0][c]);
    double acc = 0;
    for (int q = 0; q < s.nq; ++q)
      acc += m.sw.w[q] * m.sw.k3[q] * R * eval_Q(m.law, s.u5_at(static_cast<int>(c), q));
    sink[c] = acc;
  }
  return sink;
}

struct StepReport {
  double dt_used = 0;
  int cg_iterations = 0;  // summed over species
};

/// One IMEX step: backward Euler finite-volume diffusion (two point flux,
/// tensor cross terms deferred explicitly), explicit reaction and exchange
/// couplings at start-of-step values, and the gypsum ODE advanced first by
/// its exact implicit update so that the acid sink equals the realized
/// gypsum increment. That pairing keeps total sulfur conservation exact up
/// to the linear-solver tolerance.
class MacroStepper {
 public:
  MacroStepper(const MacroGrid& grid, const EffectiveModel& model) : g_(grid), m_(model) {}

  /// Positivity bound for the explicit couplings: below this dt no explicit
  /// stage can push a nonnegative field negative.
  double dt_stable() const {
    double k3w = 0;
    for (std::size_t q = 0; q < m_.sw.w.size(); ++q) k3w += m_.sw.w[q] * m_.sw.k3[q];
    const double lam1 = m_.k1 + lipschitz_R(m_.law) * k3w;
    const double lam2 = m_.k2 + m_.henry.b;
    const double lam3 = m_.henry.a;
    return 1.0 / std::max({lam1, lam2, lam3, 1e-12});
  }

  StepReport step(MacroState& s, double dt) {
    const int nc = g_.cells();
    const double t_new = s.t + dt;

    // Gypsum first; the realized increments feed the acid sink.
    std::vector<double> sink(nc, 0.0);
    parallel_for(nc, [&](int c) {
      const double alpha = s.u[0][c];
      double acc = 0;
      for (int q = 0; q < s.nq; ++q) {
        const double old5 = s.u5_at(c, q);
        const double new5 = gypsum_implicit_step(m_.law, m_.sw.k3[q], alpha, old5, dt);
        s.u5_at(c, q) = new5;
        acc += m_.sw.w[q] * (new5 - old5);
      }
      sink[c] = acc / dt;
    });

    // Explicit couplings at start-of-step values.
    std::array<std::vector<double>, 4> star;
    for (int sp = 0; sp < 4; ++sp) star[sp].resize(nc);
    for (int c = 0; c < nc; ++c) {
      const double u1 = s.u[0][c], u2 = s.u[1][c], u3 = s.u[2][c], u4 = s.u[3][c];
      const double ex = henry_exchange(m_.henry, u2, u3);
      star[0][c] = u1 + dt * (-m_.k1 * u1 + m_.k2 * u2 - sink[c]);
      star[1][c] = u2 + dt * (m_.k1 * u1 - m_.k2 * u2 + ex);
      star[2][c] = u3 + dt * (-ex);
      star[3][c] = u4 + dt * (m_.k1 * u1);
    }

    StepReport rep;
    rep.dt_used = dt;
    for (int sp = 0; sp < 4; ++sp) rep.cg_iterations += diffuse(sp, s.u[sp], star[sp], dt, t_new);

    for (int sp = 0; sp < 4; ++sp) {
      double lo = 0;
      for (int c = 0; c < nc; ++c) {
        const double v = s.u[sp][c];
        if (!std::isfinite(v))
          fail(ErrorCode::SolverDiverged, "field u" + std::to_string(sp + 1) + " left finite range");
        lo = std::min(lo, v);
      }
      if (lo < -1e-12)
        fail(ErrorCode::StepRejected, "field u" + std::to_string(sp + 1) +
                                          " dropped below tolerance (min " + format_g17(lo) + ")");
    }
    s.t = t_new;
    return rep;
  }

 private:
  // Backward Euler for one species; returns CG iterations. The two-point
  // part uses the (nonnegative) diagonal tensor entries; cross terms enter
  // the right side at start-of-step values. A species whose tensor is
  // numerically zero (non-percolating phase) skips the solve.
  int diffuse(int sp, std::vector<double>& u, const std::vector<double>& star, double dt,
              double t_new) {
    const int n = g_.n, nc = g_.cells();
    const double factor = m_.d_factor(sp, t_new);
    const Mat2 d = m_.d[sp].scaled(factor);
    if (d.max_abs() < 1e-14) {
      u = star;
      return 0;
    }
    const double dx = g_.dx();
    const double cxx = std::max(d.a11, 0.0) * dt / (dx * dx);
    const double cyy = std::max(d.a22, 0.0) * dt / (dx * dx);
    const double cxy = 0.5 * (d.a12 + d.a21);

    std::vector<double> rhs = star;

    // Deferred cross-term fluxes at start-of-step values (zero on boundary
    // faces; Neumann faces carry no flux and Dirichlet faces are handled by
    // the two-point term alone).
    if (cxy != 0.0) {
      auto grad_y = [&](int i, int j) {
        const int jm = std::max(j - 1, 0), jp = std::min(j + 1, n - 1);
        return (u[g_.id(i, jp)] - u[g_.id(i, jm)]) / ((jp - jm) * dx);
      };
      auto grad_x = [&](int i, int j) {
        const int im = std::max(i - 1, 0), ip = std::min(i + 1, n - 1);
        return (u[g_.id(ip, j)] - u[g_.id(im, j)]) / ((ip - im) * dx);
      };
      const double scale = dt / dx;  // face flux * dx / dx^2
      for (int j = 0; j < n; ++j)
        for (int i = 0; i + 1 < n; ++i) {
          const double f = cxy * 0.5 * (grad_y(i, j) + grad_y(i + 1, j)) * scale;
          rhs[g_.id(i, j)] += f;
          rhs[g_.id(i + 1, j)] -= f;
        }
      for (int j = 0; j + 1 < n; ++j)
        for (int i = 0; i < n; ++i) {
          const double f = cxy * 0.5 * (grad_x(i, j) + grad_x(i, j + 1)) * scale;
          rhs[g_.id(i, j)] += f;
          rhs[g_.id(i, j + 1)] -= f;
        }
    }

    if (matrix_[sp].n != nc || cached_cxx_[sp] != cxx || cached_cyy_[sp] != cyy)
      build_matrix(sp, cxx, cyy);

    // u3 Dirichlet faces: half-cell flux toward the boundary value at the
    // new time level.
    if (sp == 2) {
      const double u3d = m_.u3_dirichlet(t_new);
      for (int j = 0; j < n; ++j) {
        if (g_.bc[0] == BcKind::DirichletU3) rhs[g_.id(0, j)] += 2.0 * cxx * u3d;
        if (g_.bc[1] == BcKind::DirichletU3) rhs[g_.id(n - 1, j)] += 2.0 * cxx * u3d;
      }
      for (int i = 0; i < n; ++i) {
        if (g_.bc[2] == BcKind::DirichletU3) rhs[g_.id(i, 0)] += 2.0 * cyy * u3d;
        if (g_.bc[3] == BcKind::DirichletU3) rhs[g_.id(i, n - 1)] += 2.0 * cyy * u3d;
      }
    }

    std::vector<double> x = star;  // warm start
    const CgResult res =
        cg_solve(matrix_[sp], rhs, x, 1e-13, 400 + (int)(50.0 * std::sqrt((double)nc)));
    if (!res.converged)
      fail(ErrorCode::SolverDiverged, "implicit diffusion solve for u" + std::to_string(sp + 1) +
                                          " stalled at relative residual " +
                                          format_g17(res.rel_residual));
    u = std::move(x);
    return res.iterations;
  }

  void build_matrix(int sp, double cxx, double cyy) {
    const int n = g_.n;
    CooBuilder bld(g_.cells());
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int c = g_.id(i, j);
        double diag = 1.0;
        auto face = [&](int cc, double coef) {
          diag += coef;
          bld.add(c, cc, -coef);
        };
        if (i > 0) face(g_.id(i - 1, j), cxx);
        if (i + 1 < n) face(g_.id(i + 1, j), cxx);
        if (j > 0) face(g_.id(i, j - 1), cyy);
        if (j + 1 < n) face(g_.id(i, j + 1), cyy);
        if (sp == 2) {  // gas species sees its Dirichlet faces
          if (i == 0 && g_.bc[0] == BcKind::DirichletU3) diag += 2.0 * cxx;
          if (i == n - 1 && g_.bc[1] == BcKind::DirichletU3) diag += 2.0 * cxx;
          if (j == 0 && g_.bc[2] == BcKind::DirichletU3) diag += 2.0 * cyy;
          if (j == n - 1 && g_.bc[3] == BcKind::DirichletU3) diag += 2.0 * cyy;
        }
        bld.add(c, c, diag);
      }
    matrix_[sp] = bld.compress();
    cached_cxx_[sp] = cxx;
    cached_cyy_[sp] = cyy;
  }

  MacroGrid g_;
  EffectiveModel m_;
  std::array<CsrMatrix, 4> matrix_{};
  std::array<double, 4> cached_cxx_{-1, -1, -1, -1}, cached_cyy_{-1, -1, -1, -1};
};

struct DiagnosticsRecord {
  double t = 0;
  double min[5], mean[5], max[5];
  double s_total = 0;       // sulfur functional: u1 + u2 + u3 bulk + gypsum layer
  double gypsum_total = 0;  // (1/|Y|) integral of the w-weighted u5 sum
};

inline DiagnosticsRecord diagnostics(const MacroState& s, const MacroGrid& grid,
                                     const EffectiveModel& model) {
  DiagnosticsRecord r;
  r.t = s.t;
  const double vol = grid.dx() * grid.dx();
  for (int sp = 0; sp < 4; ++sp) {
    double lo = s.u[sp][0], hi = s.u[sp][0], acc = 0;
    for (double v : s.u[sp]) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      acc += v;
    }
    r.min[sp] = lo;
    r.max[sp] = hi;
    r.mean[sp] = acc / s.u[sp].size();
  }
  double w_total = model.sw_weight_total();
  double lo5 = s.u5.empty() ? 0 : s.u5[0], hi5 = lo5, acc5 = 0;
  for (int c = 0; c < grid.cells(); ++c)
    for (int q = 0; q < s.nq; ++q) {
      const double v = s.u5_at(c, q);
      lo5 = std::min(lo5, v);
      hi5 = std::max(hi5, v);
      acc5 += model.sw.w[q] * v;
    }
  r.min[4] = lo5;
  r.max[4] = hi5;
  r.mean[4] = w_total > 0 ? acc5 / (w_total * grid.cells()) : 0.0;
  r.gypsum_total = vol * acc5;
  double bulk = 0;
  for (int c = 0; c < grid.cells(); ++c) bulk += s.u[0][c] + s.u[1][c] + s.u[2][c];
  r.s_total = vol * bulk + r.gypsum_total;
  return r;
}

/// L2 distance of two states over all species, gypsum weighted by its
/// quadrature. States must share grid and quadrature sizes.
inline double state_l2_distance(const MacroState& a, const MacroState& b, const MacroGrid& grid,
                                const EffectiveModel& model) {
  if (a.n != b.n || a.nq != b.nq)
    fail(ErrorCode::MismatchedConfigs, "states live on different grids");
  const double vol = grid.dx() * grid.dx();
  double acc = 0;
  for (int sp = 0; sp < 4; ++sp)
    for (int c = 0; c < grid.cells(); ++c) {
      const double d = a.u[sp][c] - b.u[sp][c];
      acc += vol * d * d;
    }
  for (int c = 0; c < grid.cells(); ++c)
    for (int q = 0; q < a.nq; ++q) {
      const double d = a.u5_at(c, q) - b.u5_at(c, q);
      acc += vol * model.sw.w[q] * d * d;
    }
  return std::sqrt(acc);
}

struct Trajectory {
  std::vector<DiagnosticsRecord> series;
  std::vector<std::pair<double, MacroState>> snapshots;
  MacroState final_state;
  int rejected_steps = 0;
  double dt_stable_bound = 0;
};

/// Advance to t_end with nominal step dt. A rejected step is retried with
/// halved substeps, up to 10 halvings, after which the rejection propagates.
/// Snapshots are taken at the first time level reaching each requested
/// output time.
inline Trajectory run_macro(const MacroGrid& grid, const EffectiveModel& model, MacroState state,
                            double dt, double t_end, const std::vector<double>& output_times = {},
                            bool want_snapshots = false) {
  MacroStepper stepper(grid, model);
  Trajectory traj;
  traj.dt_stable_bound = stepper.dt_stable();
  traj.series.push_back(diagnostics(state, grid, model));
  std::vector<double> pending = output_times;
  std::sort(pending.begin(), pending.end());
  std::size_t next_out = 0;
  while (next_out < pending.size() && pending[next_out] <= state.t + 1e-12) {
    if (want_snapshots) traj.snapshots.emplace_back(state.t, state);
    ++next_out;
  }

  const int n_steps = std::max(1, (int)std::ceil((t_end - state.t) / dt - 1e-9));
  for (int step_i = 0; step_i < n_steps; ++step_i) {
    const double dt_n = std::min(dt, t_end - state.t);
    if (dt_n <= 0) break;
    bool accepted = false;
    for (int halving = 0; halving <= 10 && !accepted; ++halving) {
      const int pieces = 1 << halving;
      const double sub = dt_n / pieces;
      MacroState trial = state;
      try {
        MacroStepper sub_stepper(grid, model);
        for (int p = 0; p < pieces; ++p) sub_stepper.step(trial, sub);
        state = std::move(trial);
        accepted = true;
        if (halving > 0) ++traj.rejected_steps;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::StepRejected || halving == 10) throw;
      }
    }
    traj.series.push_back(diagnostics(state, grid, model));
    while (next_out < pending.size() && state.t + 1e-12 >= pending[next_out]) {
      if (want_snapshots) traj.snapshots.emplace_back(state.t, state);
      ++next_out;
    }
  }
  traj.final_state = std::move(state);
  return traj;
}

}  // namespace corroscale

#endif
