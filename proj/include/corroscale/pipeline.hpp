#ifndef CORROSCALE_PIPELINE_HPP
#define CORROSCALE_PIPELINE_HPP

#include <chrono>
#include <optional>

#include "corroscale/assumptions.hpp"
#include "corroscale/cell_problem.hpp"
#include "corroscale/config.hpp"
#include "corroscale/csvio.hpp"
#include "corroscale/macro.hpp"
#include "corroscale/mesh.hpp"
#include "corroscale/micro.hpp"

namespace corroscale {

/// Everything the cell stage produces: mesh, correctors, validated tensors,
/// averaged rates.
struct CellResults {
  CellMesh mesh;
  std::array<std::vector<CorrectorField>, 4> chi;  // per species, two directions
  std::array<EffectiveTensor, 4> d;
  std::array<EffectiveValidation, 4> validation;
  EffectiveRates rates;
};

inline CellGeometry geometry_from(const RunConfig& cfg) {
  return build_geometry(cfg.geometry.dim, cfg.geometry.r_solid, cfg.geometry.r_water,
                        cfg.geometry.variant, cfg.geometry.bridge_width);
}

/// Solves the water correctors once per distinct tensor among species 1, 2,
/// 4 and the air corrector for species 3, then assembles effective tensors.
inline CellResults solve_cell_stage(const RunConfig& cfg) {
  CellResults res;
  const CellGeometry geom = geometry_from(cfg);
  res.mesh = mesh_cell(geom, cfg.geometry.h);

  for (int sp = 0; sp < 4; ++sp) {
    const Phase phase = sp == 2 ? Phase::Air : Phase::Water;
    const Mat2 D = cfg.diffusion.d[sp].tensor_for(phase);
    bool reused = false;
    for (int prev = 0; prev < sp && !reused; ++prev) {
      const Phase pphase = prev == 2 ? Phase::Air : Phase::Water;
      if (pphase == phase && cfg.diffusion.d[prev].tensor_for(pphase) == D) {
        res.chi[sp] = res.chi[prev];
        reused = true;
      }
    }
    if (!reused) res.chi[sp] = solve_cell_problem(res.mesh, phase, D);
    res.d[sp] = effective_diffusion(res.mesh, res.chi[sp], D);
    res.validation[sp] = validate_effective(res.d[sp], D);
  }
  res.rates = effective_rates_const(res.mesh, cfg.kinetics.k1, cfg.kinetics.k2,
                                    cfg.kinetics.henry.a, cfg.kinetics.henry.b);
  return res;
}

inline MacroGrid macro_grid_from(const RunConfig& cfg) {
  MacroGrid g;
  g.lo = cfg.macro.box_min;
  g.hi = cfg.macro.box_max;
  g.n = cfg.macro.n_cells;
  g.bc = cfg.macro.bc;
  return g;
}

/// Uniform-angle quadrature of the solid-water circle; weights sum exactly
/// to the analytic interface length.
inline SwQuad sw_quadrature(const CellGeometry& geom, int n_q, double k3) {
  SwQuad q;
  const double total = analytic_measures(geom).area_sw;
  q.w.assign(n_q, total / n_q);
  q.k3.assign(n_q, k3);
  return q;
}

inline EffectiveModel effective_model_from(const RunConfig& cfg, const CellResults& cell) {
  EffectiveModel m;
  for (int sp = 0; sp < 4; ++sp) {
    m.d[sp] = cell.d[sp].d;
    m.d_times[sp] = cfg.diffusion.d[sp].times;
    m.d_factors[sp] = cfg.diffusion.d[sp].factors;
  }
  m.k1 = cell.rates.k1;
  m.k2 = cell.rates.k2;
  m.henry = HenryLaw{cell.rates.a, cell.rates.b};
  m.law = cfg.kinetics.law;
  m.sw = sw_quadrature(geometry_from(cfg), cfg.macro.n_quad_sw, cfg.kinetics.k3);
  m.u3_dirichlet_const = cfg.macro.u3_dirichlet;
  m.u3d_times = cfg.macro.u3_dirichlet_times;
  m.u3d_values = cfg.macro.u3_dirichlet_values;
  m.bounds = cfg.kinetics.bounds;
  return m;
}

inline MicroModel micro_model_from(const RunConfig& cfg) {
  MicroModel m;
  for (int sp = 0; sp < 4; ++sp) {
    const Phase phase = sp == 2 ? Phase::Air : Phase::Water;
    m.d[sp] = cfg.diffusion.d[sp].tensor_for(phase);
    m.d_times[sp] = cfg.diffusion.d[sp].times;
    m.d_factors[sp] = cfg.diffusion.d[sp].factors;
  }
  m.k1 = cfg.kinetics.k1;
  m.k2 = cfg.kinetics.k2;
  m.k3 = cfg.kinetics.k3;
  m.henry = cfg.kinetics.henry;
  m.law = cfg.kinetics.law;
  m.u3_dirichlet_const = cfg.macro.u3_dirichlet;
  m.u3d_times = cfg.macro.u3_dirichlet_times;
  m.u3d_values = cfg.macro.u3_dirichlet_values;
  return m;
}

inline std::array<FieldInit, 5> field_inits_from(const RunConfig& cfg) {
  std::array<FieldInit, 5> inits;
  for (int sp = 0; sp < 5; ++sp) {
    const double v = cfg.macro.u_init[sp];
    inits[sp] = [v](Vec2) { return v; };
  }
  return inits;
}

struct RunOutputs {
  Trajectory trajectory;
  ResultBundle bundle;
};

/// The `run` subcommand body: validate, solve the cell stage, integrate,
/// write series and snapshots.
inline RunOutputs run_pipeline(const RunConfig& cfg, const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  validate_config(cfg);
  const AssumptionReport rep = validate_assumptions(cfg, cfg.macro.strict_a4);
  if (rep.any_fail) fail(ErrorCode::InvalidConfig, "assumption check failed:\n" + format_report(rep));

  const CellResults cell = solve_cell_stage(cfg);
  const EffectiveModel model = effective_model_from(cfg, cell);
  const MacroGrid grid = macro_grid_from(cfg);
  MacroState state = init_state(grid, model, field_inits_from(cfg));

  RunOutputs out;
  out.trajectory = run_macro(grid, model, std::move(state), cfg.macro.dt, cfg.macro.t_end,
                             cfg.macro.output_times, cfg.output.snapshots);

  out.bundle.version = version_string;
  out.bundle.config_digest = hex64(fnv1a64(render_config(cfg)));
  emit_file(out.bundle, out_dir, "effective.csv", effective_csv(cell.d, cell.rates));
  emit_file(out.bundle, out_dir, "series.csv", series_csv(out.trajectory.series));
  for (const auto& [t, snap] : out.trajectory.snapshots)
    emit_file(out.bundle, out_dir, "fields_t" + time_tag(t) + ".csv",
              fields_csv(snap, grid, model));
  out.bundle.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit_file(out.bundle, out_dir, "manifest.json", manifest_json(out.bundle));
  return out;
}

struct CellOutputs {
  CellResults cell;
  ResultBundle bundle;
};

/// The `cell` subcommand body: mesh, correctors, effective coefficients.
inline CellOutputs cell_pipeline(const RunConfig& cfg, const std::string& out_dir,
                                 bool dump_mesh = false) {
  const auto t0 = std::chrono::steady_clock::now();
  validate_config(cfg);
  CellOutputs out;
  out.cell = solve_cell_stage(cfg);
  out.bundle.version = version_string;
  out.bundle.config_digest = hex64(fnv1a64(render_config(cfg)));
  emit_file(out.bundle, out_dir, "effective.csv", effective_csv(out.cell.d, out.cell.rates));
  if (dump_mesh) {
    std::ostringstream ms;
    write_mesh_ascii(out.cell.mesh, ms);
    emit_file(out.bundle, out_dir, "cell_mesh.txt", ms.str());
  }
  out.bundle.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit_file(out.bundle, out_dir, "manifest.json", manifest_json(out.bundle));
  return out;
}

struct MicroOutputs {
  std::vector<ConvergenceRow> rows;
  ResultBundle bundle;
};

/// The `micro` subcommand body: effective model once, resolved runs per
/// scale, convergence table.
inline MicroOutputs micro_pipeline(const RunConfig& cfg, const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  validate_config(cfg);
  const AssumptionReport rep = validate_assumptions(cfg, cfg.macro.strict_a4);
  if (rep.any_fail) fail(ErrorCode::InvalidConfig, "assumption check failed:\n" + format_report(rep));

  const CellResults cell = solve_cell_stage(cfg);
  const EffectiveModel eff = effective_model_from(cfg, cell);
  const MicroModel mic = micro_model_from(cfg);
  const MacroGrid grid = macro_grid_from(cfg);
  const double t_end = cfg.micro.t_end > 0 ? cfg.micro.t_end : cfg.macro.t_end;

  MicroOutputs out;
  out.rows = convergence_study(grid, geometry_from(cfg), eff, mic, field_inits_from(cfg),
                               cfg.micro.eps_list, cfg.micro.fine_per_period, t_end, cfg.macro.dt,
                               cfg.micro.dt);
  out.bundle.version = version_string;
  out.bundle.config_digest = hex64(fnv1a64(render_config(cfg)));
  emit_file(out.bundle, out_dir, "convergence.csv", convergence_csv(out.rows));
  out.bundle.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit_file(out.bundle, out_dir, "manifest.json", manifest_json(out.bundle));
  return out;
}

}  // namespace corroscale

#endif
