// Command-line front end: cell / run / micro / validate subcommands over a
// shared config file. Exit codes: 0 success, 2 config or validation failure,
// 3 solver failure.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "corroscale/pipeline.hpp"

namespace {

using namespace corroscale;

struct CliOverrides {
  std::string config_path;
  std::string out_dir;
  bool strict_a4 = false;
  double dt = 0;
  double t_end = 0;
  std::vector<int> eps_list;
  bool dump_mesh = false;
};

RunConfig load_config(const CliOverrides& o) {
  RunConfig cfg = parse_config_file(o.config_path);
  if (o.strict_a4) cfg.macro.strict_a4 = true;
  if (o.dt > 0) cfg.macro.dt = o.dt;
  if (o.t_end > 0) cfg.macro.t_end = o.t_end;
  if (!o.eps_list.empty()) cfg.micro.eps_list = o.eps_list;
  if (!o.out_dir.empty()) cfg.output.dir = o.out_dir;
  return cfg;
}

void add_common(CLI::App* sub, CliOverrides& o, bool with_out = true) {
  sub->add_option("--config", o.config_path, "config file path")->required();
  if (with_out) sub->add_option("--out", o.out_dir, "output directory (overrides config)");
  sub->add_flag("--strict-a4", o.strict_a4, "enforce the kinetic balance identities");
  sub->add_option("--dt", o.dt, "time step override");
  sub->add_option("--t-end", o.t_end, "final time override");
  sub->add_option("--eps-list", o.eps_list, "scale denominators, e.g. 4,8,16")->delimiter(',');
}

int run_cell(const CliOverrides& o) {
  const RunConfig cfg = load_config(o);
  const CellOutputs out = cell_pipeline(cfg, cfg.output.dir, o.dump_mesh);
  const PhaseMeasures pm = phase_measures(out.cell.mesh);
  std::printf("mesh: %zu nodes, %zu triangles (water %.6f, air %.6f, solid %.6f)\n",
              out.cell.mesh.nodes.size(), out.cell.mesh.tris.size(), pm.vol_water, pm.vol_air,
              pm.vol_solid);
  for (int sp = 0; sp < 4; ++sp) {
    const auto& t = out.cell.d[sp];
    const auto& v = out.cell.validation[sp];
    std::printf("d%d: [[%s, %s], [%s, %s]]  lambda [%s, %s]%s\n", sp + 1,
                format_g17(t.d.a11).c_str(), format_g17(t.d.a12).c_str(),
                format_g17(t.d.a21).c_str(), format_g17(t.d.a22).c_str(),
                format_g17(v.lambda_min).c_str(), format_g17(v.lambda_max).c_str(),
                v.degenerate ? "  (degenerate: phase does not percolate)" : "");
  }
  std::printf("rates: k1 %s, k2 %s, a %s, b %s\n", format_g17(out.cell.rates.k1).c_str(),
              format_g17(out.cell.rates.k2).c_str(), format_g17(out.cell.rates.a).c_str(),
              format_g17(out.cell.rates.b).c_str());
  std::printf("wrote %zu files to %s\n", out.bundle.files.size(), cfg.output.dir.c_str());
  return 0;
}

int run_run(const CliOverrides& o) {
  const RunConfig cfg = load_config(o);
  const RunOutputs out = run_pipeline(cfg, cfg.output.dir);
  const auto& last = out.trajectory.series.back();
  std::printf("steps: %zu records, %d retried; stability bound dt <= %s\n",
              out.trajectory.series.size() - 1, out.trajectory.rejected_steps,
              format_g17(out.trajectory.dt_stable_bound).c_str());
  std::printf("t = %s  S_total = %s  gypsum = %s\n", format_g17(last.t).c_str(),
              format_g17(last.s_total).c_str(), format_g17(last.gypsum_total).c_str());
  std::printf("wrote %zu files to %s\n", out.bundle.files.size(), cfg.output.dir.c_str());
  return 0;
}

int run_micro(const CliOverrides& o) {
  const RunConfig cfg = load_config(o);
  const MicroOutputs out = micro_pipeline(cfg, cfg.output.dir);
  for (const auto& r : out.rows)
    std::printf("eps %-10s u%d  e = %s\n", format_g17(r.eps).c_str(), r.species,
                format_g17(r.error).c_str());
  std::printf("wrote %zu files to %s\n", out.bundle.files.size(), cfg.output.dir.c_str());
  return 0;
}

int run_validate(const CliOverrides& o) {
  const RunConfig cfg = load_config(o);
  // Structural checks run non-strictly so the assumption table below always
  // prints; strict-mode verdicts land in that table instead of aborting it.
  RunConfig structural = cfg;
  structural.macro.strict_a4 = false;
  validate_config(structural);
  const AssumptionReport rep = validate_assumptions(cfg, cfg.macro.strict_a4);
  std::printf("%s", format_report(rep).c_str());
  bool ok = !rep.any_fail;
  if (ok && cfg.macro.strict_a4) {
    // Ceiling admissibility beyond the balance equalities (initial data and
    // boundary data against the M_i), enforced the same way the pipelines do.
    try {
      validate_config(cfg);
    } catch (const Error& e) {
      std::printf("strict: %s\n", e.what());
      ok = false;
    }
  }
  if (!ok) {
    std::fprintf(stderr, "error: assumption check failed\n");
    return 2;
  }
  std::printf("config ok\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-scale concrete corrosion toolkit"};
  app.require_subcommand(1);

  CliOverrides o;
  CLI::App* cell = app.add_subcommand("cell", "mesh the unit cell and compute effective coefficients");
  add_common(cell, o);
  cell->add_flag("--dump-mesh", o.dump_mesh, "write an ASCII mesh dump");
  CLI::App* run = app.add_subcommand("run", "integrate the upscaled system");
  add_common(run, o);
  CLI::App* micro = app.add_subcommand("micro", "resolved-scale convergence study");
  add_common(micro, o);
  CLI::App* validate = app.add_subcommand("validate", "check config and assumptions");
  add_common(validate, o, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cell->parsed()) return run_cell(o);
    if (run->parsed()) return run_run(o);
    if (micro->parsed()) return run_micro(o);
    return run_validate(o);
  } catch (const corroscale::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return corroscale::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
