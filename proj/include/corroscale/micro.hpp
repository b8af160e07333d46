#ifndef CORROSCALE_MICRO_HPP
#define CORROSCALE_MICRO_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "corroscale/geometry.hpp"
#include "corroscale/kinetics.hpp"
#include "corroscale/macro.hpp"
#include "corroscale/sparse.hpp"

namespace corroscale {

/// Face between a water and a solid cell; carries one gypsum value. Face
/// between water and air; carries the dissolution exchange. Weights are
/// physical measures: the exact analytic interface length per period, scaled
/// by eps and split uniformly over that period's faces.
struct SwFace {
  int water = -1;
  double w = 0;
  double mx = 0, my = 0;  // midpoint, for sampling initial data
};
struct WaFace {
  int water = -1, air = -1;
  double w = 0;
};

/// Cartesian grid over the box with the unit-cell phase pattern replicated
/// periods x periods times, nf cells per period per axis. Staircase masks;
/// the interface measure correction keeps surface totals exact per period.
struct PerforatedGrid {
  double lo = 0, hi = 1;
  int periods = 0, nf = 0, N = 0;
  double fh = 0, eps = 0;
  CellGeometry geom;
  std::array<BcKind, 4> bc{BcKind::Neumann, BcKind::Neumann, BcKind::Neumann, BcKind::Neumann};
  std::vector<Phase> phase;  // N*N cell-major
  std::vector<SwFace> sw;
  std::vector<WaFace> wa;

  int id(int i, int j) const { return j * N + i; }
  Phase at(int i, int j) const { return phase[id(i, j)]; }
  double cx(int i) const { return lo + (i + 0.5) * fh; }
  int cells() const { return N * N; }
};

inline PerforatedGrid build_perforated(double lo, double hi, int periods, int nf,
                                       const CellGeometry& geom,
                                       const std::array<BcKind, 4>& bc) {
  if (geom.dim != 2) fail(ErrorCode::UnsupportedDim, "resolved-scale solver is 2D only");
  if (nf < 16)
    fail(ErrorCode::ResolutionTooCoarse,
         "need at least 16 cells per period, got " + std::to_string(nf));
  if (periods < 1) fail(ErrorCode::InvalidConfig, "periods must be positive");
  if (!(hi > lo)) fail(ErrorCode::InvalidConfig, "box must have positive extent");

  PerforatedGrid g;
  g.lo = lo;
  g.hi = hi;
  g.periods = periods;
  g.nf = nf;
  g.N = periods * nf;
  g.fh = (hi - lo) / g.N;
  g.eps = (hi - lo) / periods;
  g.geom = geom;
  g.bc = bc;
  g.phase.resize(g.cells());

  // Classification by local index so every period carries a bit-identical
  // mask.
  std::vector<Phase> pattern(nf * nf);
  for (int j = 0; j < nf; ++j)
    for (int i = 0; i < nf; ++i)
      pattern[j * nf + i] = phase_at(geom, {(i + 0.5) / nf, (j + 0.5) / nf});
  if (geom.variant == CellVariant::BridgedWater) {
    // The mask must keep the water channels, or the study runs on the wrong
    // topology: water would fall apart per period and air would percolate.
    bool x0 = false, x1 = false, y0 = false, y1 = false;
    for (int k = 0; k < nf; ++k) {
      x0 |= pattern[k * nf + 0] == Phase::Water;
      x1 |= pattern[k * nf + (nf - 1)] == Phase::Water;
      y0 |= pattern[0 * nf + k] == Phase::Water;
      y1 |= pattern[(nf - 1) * nf + k] == Phase::Water;
    }
    if (!(x0 && x1 && y0 && y1))
      fail(ErrorCode::ResolutionTooCoarse,
           "mask drops the water bridges at " + std::to_string(nf) +
               " cells per period; raise fine_per_period above " +
               std::to_string((int)std::ceil(2.0 / geom.bridge_width)) +
               " or widen bridge_width");
  }
  for (int j = 0; j < g.N; ++j)
    for (int i = 0; i < g.N; ++i) g.phase[g.id(i, j)] = pattern[(j % nf) * nf + (i % nf)];

  auto face_mid_x = [&](int i_hi, int j) { return std::pair<double, double>{lo + i_hi * g.fh, lo + (j + 0.5) * g.fh}; };
  auto face_mid_y = [&](int i, int j_hi) { return std::pair<double, double>{lo + (i + 0.5) * g.fh, lo + j_hi * g.fh}; };

  auto classify = [&](int ca, int cb, double mx, double my) {
    const Phase pa = g.phase[ca], pb = g.phase[cb];
    if (pa == pb) return;
    const bool a_water = pa == Phase::Water, b_water = pb == Phase::Water;
    if (!a_water && !b_water) return;  // solid-air contact carries nothing
    const int wcell = a_water ? ca : cb;
    const int other = a_water ? cb : ca;
    if (g.phase[other] == Phase::Solid) {
      SwFace f;
      f.water = wcell;
      f.mx = mx;
      f.my = my;
      g.sw.push_back(f);
    } else {
      WaFace f;
      f.water = wcell;
      f.air = other;
      g.wa.push_back(f);
    }
  };

  for (int j = 0; j < g.N; ++j)
    for (int i = 0; i + 1 < g.N; ++i) {
      auto [mx, my] = face_mid_x(i + 1, j);
      classify(g.id(i, j), g.id(i + 1, j), mx, my);
    }
  for (int j = 0; j + 1 < g.N; ++j)
    for (int i = 0; i < g.N; ++i) {
      auto [mx, my] = face_mid_y(i, j + 1);
      classify(g.id(i, j), g.id(i, j + 1), mx, my);
    }

  const PhaseMeasures pm = analytic_measures(geom);
  if (g.sw.empty()) fail(ErrorCode::MissingInterface, "mask resolves no water-solid contact");
  if (g.wa.empty()) fail(ErrorCode::MissingInterface, "mask resolves no water-air contact");
  const double sw_total = periods * (double)periods * g.eps * pm.area_sw;
  const double wa_total = periods * (double)periods * g.eps * pm.area_wa;
  for (auto& f : g.sw) f.w = sw_total / g.sw.size();
  for (auto& f : g.wa) f.w = wa_total / g.wa.size();
  return g;
}

/// Mask phase fractions per period (identical across periods by
/// construction); used to check the staircase against the analytic areas.
inline PhaseMeasures mask_measures(const PerforatedGrid& g) {
  PhaseMeasures m{};
  const double a = 1.0 / (g.nf * (double)g.nf);
  for (int j = 0; j < g.nf; ++j)
    for (int i = 0; i < g.nf; ++i) {
      switch (g.at(i, j)) {
        case Phase::Solid: m.vol_solid += a; break;
        case Phase::Water: m.vol_water += a; break;
        case Phase::Air: m.vol_air += a; break;
      }
    }
  m.area_sw = analytic_measures(g.geom).area_sw;
  m.area_wa = analytic_measures(g.geom).area_wa;
  return m;
}

/// Raw pore-scale coefficients: per-species tensor on the species' home
/// phase, volumetric rates, interface laws. Cross-diffusion entries are not
/// supported by the masked two-point scheme.
struct MicroModel {
  std::array<Mat2, 4> d{};
  std::array<std::vector<double>, 4> d_times{}, d_factors{};
  double k1 = 0, k2 = 0, k3 = 0;
  HenryLaw henry;
  RateLaw law;
  double u3_dirichlet_const = 0;
  std::vector<double> u3d_times, u3d_values;

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
};

/// Fields stored on the full grid, zero off their phase; u5 lives on the
/// water-solid faces.
struct MicroState {
  double t = 0;
  std::array<std::vector<double>, 4> u;
  std::vector<double> u5;
};

inline Phase home_phase(int sp) { return sp == 2 ? Phase::Air : Phase::Water; }

inline MicroState init_micro(const PerforatedGrid& g, const std::array<FieldInit, 5>& init) {
  MicroState s;
  for (auto& f : s.u) f.assign(g.cells(), 0.0);
  for (int j = 0; j < g.N; ++j)
    for (int i = 0; i < g.N; ++i) {
      const int c = g.id(i, j);
      const Vec2 x{g.cx(i), g.cx(j)};
      for (int sp = 0; sp < 4; ++sp)
        if (g.phase[c] == home_phase(sp)) {
          const double v = init[sp](x);
          if (v < 0)
            fail(ErrorCode::NegativeInitialData,
                 "u" + std::to_string(sp + 1) + " initial data negative at a cell center");
          s.u[sp][c] = v;
        }
    }
  s.u5.resize(g.sw.size());
  for (std::size_t f = 0; f < g.sw.size(); ++f) {
    const double v = init[4]({g.sw[f].mx, g.sw[f].my});
    if (v < 0) fail(ErrorCode::NegativeInitialData, "u5 initial data negative at a face midpoint");
    s.u5[f] = v;
  }
  return s;
}

class MicroStepper {
 public:
  MicroStepper(const PerforatedGrid& grid, const MicroModel& model) : g_(grid), m_(model) {
    for (int sp = 0; sp < 4; ++sp)
      if (std::abs(m_.d[sp].a12) + std::abs(m_.d[sp].a21) > 1e-14)
        fail(ErrorCode::InvalidConfig,
             "resolved-scale solver needs diagonal diffusion tensors; u" + std::to_string(sp + 1) +
                 " has cross terms");
    const double inv_v = 1.0 / (g_.fh * g_.fh);
    loss1_.assign(g_.cells(), m_.k1);
    loss2_.assign(g_.cells(), m_.k2);
    loss3_.assign(g_.cells(), 0.0);
    const double lr = lipschitz_R(m_.law);
    for (const auto& f : g_.sw) loss1_[f.water] += g_.eps * f.w * m_.k3 * lr * inv_v;
    for (const auto& f : g_.wa) {
      loss2_[f.water] += g_.eps * f.w * m_.henry.b * inv_v;
      loss3_[f.air] += g_.eps * f.w * m_.henry.a * inv_v;
    }
  }

  /// Positivity bound for the explicit couplings, over all cells.
  double dt_stable() const {
    double lam = 1e-12;
    for (int c = 0; c < g_.cells(); ++c)
      lam = std::max({lam, loss1_[c], loss2_[c], loss3_[c]});
    return 1.0 / lam;
  }

  void step(MicroState& s, double dt) {
    const int nc = g_.cells();
    const double t_new = s.t + dt;
    const double inv_v = 1.0 / (g_.fh * g_.fh);

    // Gypsum per face, implicit; the water cell pays the realized increment.
    std::vector<double> sink(nc, 0.0);
    for (std::size_t f = 0; f < g_.sw.size(); ++f) {
      const auto& face = g_.sw[f];
      const double old5 = s.u5[f];
      const double new5 = gypsum_implicit_step(m_.law, m_.k3, s.u[0][face.water], old5, dt);
      s.u5[f] = new5;
      sink[face.water] += g_.eps * face.w * (new5 - old5) / dt * inv_v;
    }

    // Henry exchange across water-air faces, start-of-step values.
    std::vector<double> exch2(nc, 0.0), exch3(nc, 0.0);
    for (const auto& face : g_.wa) {
      const double e = g_.eps * face.w *
                       henry_exchange(m_.henry, s.u[1][face.water], s.u[2][face.air]) * inv_v;
      exch2[face.water] += e;
      exch3[face.air] -= e;
    }

    std::array<std::vector<double>, 4> star;
    for (int sp = 0; sp < 4; ++sp) star[sp].assign(nc, 0.0);
    parallel_for(nc, [&](int c) {
      if (g_.phase[c] == Phase::Water) {
        const double u1 = s.u[0][c], u2 = s.u[1][c];
        star[0][c] = u1 + dt * (-m_.k1 * u1 + m_.k2 * u2 - sink[c]);
        star[1][c] = u2 + dt * (m_.k1 * u1 - m_.k2 * u2 + exch2[c]);
        star[3][c] = s.u[3][c] + dt * (m_.k1 * u1);
      } else if (g_.phase[c] == Phase::Air) {
        star[2][c] = s.u[2][c] + dt * exch3[c];
      }
    });

    for (int sp = 0; sp < 4; ++sp) diffuse(sp, s.u[sp], star[sp], dt, t_new);

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
  }

 private:
  void diffuse(int sp, std::vector<double>& u, const std::vector<double>& star, double dt,
               double t_new) {
    const Mat2 d = m_.d[sp].scaled(m_.d_factor(sp, t_new));
    if (d.max_abs() < 1e-14) {
      u = star;
      return;
    }
    const int N = g_.N;
    const double cxx = std::max(d.a11, 0.0) * dt / (g_.fh * g_.fh);
    const double cyy = std::max(d.a22, 0.0) * dt / (g_.fh * g_.fh);
    const Phase home = home_phase(sp);

    if (matrix_[sp].n != g_.cells() || cached_cxx_[sp] != cxx || cached_cyy_[sp] != cyy)
      build_matrix(sp, cxx, cyy);

    std::vector<double> rhs = star;
    if (sp == 2) {
      const double u3d = m_.u3_dirichlet(t_new);
      for (int j = 0; j < N; ++j) {
        if (g_.bc[0] == BcKind::DirichletU3 && g_.at(0, j) == home)
          rhs[g_.id(0, j)] += 2.0 * cxx * u3d;
        if (g_.bc[1] == BcKind::DirichletU3 && g_.at(N - 1, j) == home)
          rhs[g_.id(N - 1, j)] += 2.0 * cxx * u3d;
      }
      for (int i = 0; i < N; ++i) {
        if (g_.bc[2] == BcKind::DirichletU3 && g_.at(i, 0) == home)
          rhs[g_.id(i, 0)] += 2.0 * cyy * u3d;
        if (g_.bc[3] == BcKind::DirichletU3 && g_.at(i, N - 1) == home)
          rhs[g_.id(i, N - 1)] += 2.0 * cyy * u3d;
      }
    }

    std::vector<double> x = star;
    const CgResult res =
        cg_solve(matrix_[sp], rhs, x, 1e-13, 400 + (int)(50.0 * std::sqrt((double)g_.cells())));
    if (!res.converged)
      fail(ErrorCode::SolverDiverged, "implicit diffusion solve for u" + std::to_string(sp + 1) +
                                          " stalled at relative residual " +
                                          format_g17(res.rel_residual));
    u = std::move(x);
  }

  // Two-point coupling only between same-phase neighbors; off-phase rows are
  // identity so those entries stay zero.
  void build_matrix(int sp, double cxx, double cyy) {
    const int N = g_.N;
    const Phase home = home_phase(sp);
    CooBuilder bld(g_.cells());
    for (int j = 0; j < N; ++j)
      for (int i = 0; i < N; ++i) {
        const int c = g_.id(i, j);
        if (g_.phase[c] != home) {
          bld.add(c, c, 1.0);
          continue;
        }
        double diag = 1.0;
        auto face = [&](int ii, int jj, double coef) {
          if (g_.at(ii, jj) != home) return;
          diag += coef;
          bld.add(c, g_.id(ii, jj), -coef);
        };
        if (i > 0) face(i - 1, j, cxx);
        if (i + 1 < N) face(i + 1, j, cxx);
        if (j > 0) face(i, j - 1, cyy);
        if (j + 1 < N) face(i, j + 1, cyy);
        if (sp == 2) {
          if (i == 0 && g_.bc[0] == BcKind::DirichletU3) diag += 2.0 * cxx;
          if (i == N - 1 && g_.bc[1] == BcKind::DirichletU3) diag += 2.0 * cxx;
          if (j == 0 && g_.bc[2] == BcKind::DirichletU3) diag += 2.0 * cyy;
          if (j == N - 1 && g_.bc[3] == BcKind::DirichletU3) diag += 2.0 * cyy;
        }
        bld.add(c, c, diag);
      }
    matrix_[sp] = bld.compress();
    cached_cxx_[sp] = cxx;
    cached_cyy_[sp] = cyy;
  }

  PerforatedGrid g_;
  MicroModel m_;
  std::vector<double> loss1_, loss2_, loss3_;
  std::array<CsrMatrix, 4> matrix_{};
  std::array<double, 4> cached_cxx_{-1, -1, -1, -1}, cached_cyy_{-1, -1, -1, -1};
};

/// Phase integrals plus the eps-weighted gypsum total; the sulfur functional
/// mirrors the upscaled bookkeeping.
struct MicroDiagnostics {
  double t = 0;
  double phase_integral[4];
  double gypsum_total = 0;
  double s_total = 0;
};

inline MicroDiagnostics micro_diagnostics(const MicroState& s, const PerforatedGrid& g) {
  MicroDiagnostics r;
  r.t = s.t;
  const double vol = g.fh * g.fh;
  for (int sp = 0; sp < 4; ++sp) {
    double acc = 0;
    for (double v : s.u[sp]) acc += v;
    r.phase_integral[sp] = vol * acc;
  }
  for (std::size_t f = 0; f < g.sw.size(); ++f) r.gypsum_total += g.eps * g.sw[f].w * s.u5[f];
  r.s_total = r.phase_integral[0] + r.phase_integral[1] + r.phase_integral[2] + r.gypsum_total;
  return r;
}

/// Advance to t_end with the same halving retry policy as the upscaled
/// solver.
inline MicroState run_micro(const PerforatedGrid& grid, const MicroModel& model, MicroState state,
                            double dt, double t_end) {
  const int n_steps = std::max(1, (int)std::ceil((t_end - state.t) / dt - 1e-9));
  for (int step_i = 0; step_i < n_steps; ++step_i) {
    const double dt_n = std::min(dt, t_end - state.t);
    if (dt_n <= 0) break;
    bool accepted = false;
    for (int halving = 0; halving <= 10 && !accepted; ++halving) {
      const int pieces = 1 << halving;
      MicroState trial = state;
      try {
        MicroStepper stepper(grid, model);
        for (int p = 0; p < pieces; ++p) stepper.step(trial, dt_n / pieces);
        state = std::move(trial);
        accepted = true;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::StepRejected || halving == 10) throw;
      }
    }
  }
  return state;
}

/// Per-period averages: water-phase mean for u1, u2, u4; air-phase mean for
/// u3; measure-weighted face mean for u5. One row of P*P values per species.
struct PeriodAverages {
  int periods = 0;
  std::array<std::vector<double>, 5> avg;
};

inline PeriodAverages period_averages(const PerforatedGrid& g, const MicroState& s) {
  PeriodAverages pa;
  pa.periods = g.periods;
  const int P = g.periods, nper = P * P;
  for (auto& v : pa.avg) v.assign(nper, 0.0);
  std::vector<double> cnt_w(nper, 0.0), cnt_a(nper, 0.0), w5(nper, 0.0);
  auto period_of = [&](int i, int j) { return (j / g.nf) * P + (i / g.nf); };
  for (int j = 0; j < g.N; ++j)
    for (int i = 0; i < g.N; ++i) {
      const int c = g.id(i, j), p = period_of(i, j);
      if (g.phase[c] == Phase::Water) {
        pa.avg[0][p] += s.u[0][c];
        pa.avg[1][p] += s.u[1][c];
        pa.avg[3][p] += s.u[3][c];
        cnt_w[p] += 1;
      } else if (g.phase[c] == Phase::Air) {
        pa.avg[2][p] += s.u[2][c];
        cnt_a[p] += 1;
      }
    }
  for (std::size_t f = 0; f < g.sw.size(); ++f) {
    const auto& face = g.sw[f];
    const int i = face.water % g.N, j = face.water / g.N;
    const int p = period_of(i, j);
    pa.avg[4][p] += face.w * s.u5[f];
    w5[p] += face.w;
  }
  for (int p = 0; p < nper; ++p) {
    if (cnt_w[p] > 0) {
      pa.avg[0][p] /= cnt_w[p];
      pa.avg[1][p] /= cnt_w[p];
      pa.avg[3][p] /= cnt_w[p];
    }
    if (cnt_a[p] > 0) pa.avg[2][p] /= cnt_a[p];
    if (w5[p] > 0) pa.avg[4][p] /= w5[p];
  }
  return pa;
}

/// The matching block averages of an upscaled state; the grid must tile the
/// periods evenly.
inline PeriodAverages period_averages_macro(const MacroGrid& grid, const MacroState& s,
                                            const EffectiveModel& model, int periods) {
  if (grid.n % periods != 0)
    fail(ErrorCode::MismatchedConfigs, "macro grid does not tile " + std::to_string(periods) +
                                           " periods (n_cells = " + std::to_string(grid.n) + ")");
  PeriodAverages pa;
  pa.periods = periods;
  const int block = grid.n / periods, nper = periods * periods;
  for (auto& v : pa.avg) v.assign(nper, 0.0);
  const double w_total = model.sw_weight_total();
  for (int j = 0; j < grid.n; ++j)
    for (int i = 0; i < grid.n; ++i) {
      const int c = grid.id(i, j), p = (j / block) * periods + (i / block);
      for (int sp = 0; sp < 4; ++sp) pa.avg[sp][p] += s.u[sp][c];
      double g5 = 0;
      for (int q = 0; q < s.nq; ++q) g5 += model.sw.w[q] * s.u5_at(c, q);
      pa.avg[4][p] += w_total > 0 ? g5 / w_total : 0.0;
    }
  const double inv = 1.0 / (block * block);
  for (auto& v : pa.avg)
    for (double& x : v) x *= inv;
  return pa;
}

/// Relative L2 distance between the per-period rows, one value per species.
inline std::array<double, 5> period_errors(const PeriodAverages& micro,
                                           const PeriodAverages& macro) {
  if (micro.periods != macro.periods)
    fail(ErrorCode::MismatchedConfigs, "period counts differ");
  std::array<double, 5> e{};
  for (int sp = 0; sp < 5; ++sp) {
    double num = 0, den = 0;
    for (std::size_t p = 0; p < micro.avg[sp].size(); ++p) {
      const double d = micro.avg[sp][p] - macro.avg[sp][p];
      num += d * d;
      den += macro.avg[sp][p] * macro.avg[sp][p];
    }
    e[sp] = den > 1e-300 ? std::sqrt(num / den) : std::sqrt(num);
  }
  return e;
}

struct ConvergenceRow {
  double eps = 0;
  int species = 0;  // 1..5
  double error = 0;
};

/// Runs the upscaled model once, then the resolved model per scale, and
/// tabulates e(eps) per species at the common final time.
inline std::vector<ConvergenceRow> convergence_study(
    const MacroGrid& grid, const CellGeometry& geom, const EffectiveModel& eff,
    const MicroModel& mic, const std::array<FieldInit, 5>& init,
    const std::vector<int>& period_list, int nf, double t_end, double macro_dt,
    double micro_dt_request) {
  if (period_list.empty()) fail(ErrorCode::InvalidConfig, "no scales requested");
  for (std::size_t i = 1; i < period_list.size(); ++i)
    if (period_list[i] <= period_list[i - 1])
      fail(ErrorCode::MismatchedConfigs, "scale list must decrease strictly in eps");

  MacroState mstate = init_state(grid, eff, init);
  Trajectory traj = run_macro(grid, eff, std::move(mstate), macro_dt, t_end);

  std::vector<ConvergenceRow> rows;
  for (int P : period_list) {
    PerforatedGrid pg = build_perforated(grid.lo, grid.hi, P, nf, geom, grid.bc);
    MicroState micro = init_micro(pg, init);
    MicroStepper probe(pg, mic);
    double dt = micro_dt_request > 0 ? micro_dt_request : macro_dt;
    dt = std::min(dt, 0.45 * probe.dt_stable());
    const int n = std::max(1, (int)std::ceil(t_end / dt - 1e-9));
    dt = t_end / n;
    micro = run_micro(pg, mic, std::move(micro), dt, t_end);
    const auto em = period_errors(period_averages(pg, micro),
                                  period_averages_macro(grid, traj.final_state, eff, P));
    for (int sp = 0; sp < 5; ++sp)
      rows.push_back({pg.eps, sp + 1, em[sp]});
  }
  return rows;
}

}  // namespace corroscale

#endif
