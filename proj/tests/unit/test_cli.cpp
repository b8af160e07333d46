#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "corroscale/config.hpp"
#include "corroscale/csvio.hpp"
#include "../support/oracles.hpp"

using namespace corroscale;
using oracles::file_exists;
using oracles::q;
using oracles::run_process;
using oracles::slurp;

namespace {

std::string cli() { return CORROSCALE_CLI_PATH; }
std::string default_cfg() { return std::string(CORROSCALE_CONFIG_DIR) + "/default.cfg"; }

std::filesystem::path fresh_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / "corroscale_cli_tests" / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

// Trimmed copy of the default scenario so the contract tests stay quick.
std::string write_small_config(const std::filesystem::path& dir) {
  RunConfig c = parse_config_file(default_cfg());
  c.geometry.h = 0.05;
  c.macro.n_cells = 8;
  c.macro.dt = 2e-3;
  c.macro.t_end = 0.02;
  c.macro.output_times = {0.0, 0.01};
  c.micro.eps_list = {2};
  c.micro.t_end = 0.01;
  c.micro.dt = 2e-3;
  c.output.snapshots = true;
  const auto path = dir / "small.cfg";
  std::ofstream out(path);
  out << render_config(c);
  REQUIRE(out.good());
  return path.string();
}

void check_manifest(const std::filesystem::path& out_dir) {
  const std::string text = slurp((out_dir / "manifest.json").string());
  REQUIRE_FALSE(text.empty());
  const auto j = nlohmann::json::parse(text);
  CHECK(j.contains("version"));
  CHECK(j.contains("config_digest"));
  CHECK(j["wall_seconds"].get<double>() >= 0.0);
  REQUIRE(j.contains("files"));
  CHECK(!j["files"].empty());
  for (const auto& f : j["files"]) {
    const std::string name = f["name"].get<std::string>();
    const std::string bytes = slurp((out_dir / name).string());
    CHECK(bytes.size() == f["size"].get<std::size_t>());
    CHECK(hex64(fnv1a64(bytes)) == f["digest"].get<std::string>());
  }
}

}  // namespace

TEST_CASE("validate subcommand prints the assumption table", "[cli]") {
  const auto r = run_process(cli() + " validate --config " + q(default_cfg()));
  CHECK(r.exit_code == 0);
  for (int k = 1; k <= 7; ++k)
    CHECK(r.output.find("A" + std::to_string(k)) != std::string::npos);
  CHECK(r.output.find("config ok") != std::string::npos);

  // The shipped scenario satisfies the balance equalities even under strict
  // checking.
  const auto strict =
      run_process(cli() + " validate --strict-a4 --config " + q(default_cfg()));
  CHECK(strict.exit_code == 0);
}

TEST_CASE("strictness decides whether broken ceilings fail", "[cli]") {
  const auto dir = fresh_dir("strict");
  RunConfig c = parse_config_file(default_cfg());
  c.kinetics.bounds.M3 = 5.0;
  const auto path = dir / "unbalanced.cfg";
  std::ofstream(path) << render_config(c);

  const auto loose = run_process(cli() + " validate --config " + q(path.string()));
  CHECK(loose.exit_code == 0);
  CHECK(loose.output.find("warn") != std::string::npos);

  const auto strict =
      run_process(cli() + " validate --strict-a4 --config " + q(path.string()));
  CHECK(strict.exit_code == 2);
  CHECK(strict.output.find("FAIL") != std::string::npos);
}

TEST_CASE("usage errors exit with the config failure code", "[cli]") {
  CHECK(run_process(cli()).exit_code == 2);                          // no subcommand
  CHECK(run_process(cli() + " cell").exit_code == 2);                // --config required
  CHECK(run_process(cli() + " run --config x --bogus").exit_code == 2);

  // A missing file is an I/O problem, not a config problem.
  CHECK(run_process(cli() + " validate --config /no/such/file.cfg").exit_code == 3);

  const auto dir = fresh_dir("badgeom");
  std::ofstream(dir / "bad.cfg") << "[geometry]\nr_solid = 0.4\nr_water = 0.35\n"
                                    "[diffusion]\n[kinetics]\n[macro]\n";
  const auto r = run_process(cli() + " validate --config " + q((dir / "bad.cfg").string()));
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("RadiusOrdering") != std::string::npos);
}

TEST_CASE("cell subcommand emits the effective coefficient table", "[cli]") {
  const auto dir = fresh_dir("cell");
  const std::string cfg = write_small_config(dir);
  const auto out = dir / "out";

  const auto r = run_process(cli() + " cell --dump-mesh --config " + q(cfg) + " --out " +
                             q(out.string()));
  CHECK(r.exit_code == 0);
  // The gas phase sits in disconnected corner pockets here.
  CHECK(r.output.find("degenerate") != std::string::npos);

  REQUIRE(file_exists((out / "effective.csv").string()));
  const std::string csv = slurp((out / "effective.csv").string());
  CHECK(csv.rfind("species,i,j,value\n", 0) == 0);
  CHECK(csv.find("\nk1,0,0,") != std::string::npos);
  CHECK(csv.find("\nb,0,0,") != std::string::npos);
  // 4 species x 4 entries + 4 rates + header.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 21);

  CHECK(file_exists((out / "cell_mesh.txt").string()));
  check_manifest(out);
}

TEST_CASE("run subcommand writes series and requested snapshots", "[cli]") {
  const auto dir = fresh_dir("run");
  const std::string cfg = write_small_config(dir);
  const auto out = dir / "out";

  const auto r = run_process(cli() + " run --config " + q(cfg) + " --out " + q(out.string()));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("S_total") != std::string::npos);

  const std::string series = slurp((out / "series.csv").string());
  CHECK(series.rfind("t,u1_min,u1_mean,u1_max", 0) == 0);
  // Header plus one record per step plus the initial record.
  CHECK(std::count(series.begin(), series.end(), '\n') == 12);

  int snapshots = 0;
  for (const auto& e : std::filesystem::directory_iterator(out))
    if (e.path().filename().string().rfind("fields_t", 0) == 0) ++snapshots;
  CHECK(snapshots == 2);
  check_manifest(out);
}

TEST_CASE("micro subcommand tabulates the scale errors", "[cli]") {
  const auto dir = fresh_dir("micro");
  const std::string cfg = write_small_config(dir);
  const auto out = dir / "out";

  const auto r = run_process(cli() + " micro --config " + q(cfg) + " --out " + q(out.string()) +
                             " --eps-list 2");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("u5") != std::string::npos);

  const std::string csv = slurp((out / "convergence.csv").string());
  CHECK(csv.rfind("eps,species,error\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);  // one scale, five species
  CHECK(csv.find("0.5,1,") != std::string::npos);
  CHECK(csv.find("0.5,5,") != std::string::npos);
  check_manifest(out);
}

TEST_CASE("repeated runs are byte identical across thread counts", "[cli]") {
  const auto dir = fresh_dir("determinism");
  const std::string cfg = write_small_config(dir);

  auto run_with = [&](const std::string& tag, int threads) {
    const auto out = dir / tag;
    const auto r = run_process("CORROSCALE_THREADS=" + std::to_string(threads) + " " + cli() +
                               " run --config " + q(cfg) + " --out " + q(out.string()));
    REQUIRE(r.exit_code == 0);
    return out;
  };
  const auto a = run_with("a", 1);
  const auto b = run_with("b", 1);
  const auto c = run_with("c", 2);

  for (const char* name : {"effective.csv", "series.csv"}) {
    const std::string ba = slurp((a / name).string());
    CHECK_FALSE(ba.empty());
    CHECK(ba == slurp((b / name).string()));
    CHECK(ba == slurp((c / name).string()));
  }
}
