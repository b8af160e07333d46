// Independent reference values for the test suites. Everything here is
// computed by a different route than the library code under test: phase
// volumes by Monte-Carlo sampling, interface lengths by direct arc and
// segment bookkeeping, process results by shelling out to the CLI binary.
#ifndef CORROSCALE_TESTS_ORACLES_HPP
#define CORROSCALE_TESTS_ORACLES_HPP

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "corroscale/geometry.hpp"

namespace oracles {

struct McFractions {
  double solid = 0, water = 0, air = 0;
};

// Point-in-phase sampling with a fixed stream; 4e6 samples put the standard
// error near 2.5e-4 for mid-size fractions.
inline McFractions mc_phase_fractions(const corroscale::CellGeometry& g,
                                      std::size_t n = 4'000'000,
                                      std::uint64_t seed = 0x5eedcafef00dULL) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::size_t counts[3] = {0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const corroscale::Vec2 y{uni(rng), uni(rng)};
    counts[static_cast<int>(corroscale::phase_at(g, y))]++;
  }
  McFractions f;
  f.solid = double(counts[static_cast<int>(corroscale::Phase::Solid)]) / double(n);
  f.water = double(counts[static_cast<int>(corroscale::Phase::Water)]) / double(n);
  f.air = double(counts[static_cast<int>(corroscale::Phase::Air)]) / double(n);
  return f;
}

// Water-air interface length for the bridged variant assembled from parts:
// the circle r_water minus the arcs swallowed by the channel mouths, plus the
// straight channel walls out to the cell faces. The arc fraction comes from
// dense sampling of the circle against phase_at, not from the closed form.
inline double bridged_wa_length_oracle(const corroscale::CellGeometry& g, int n_theta = 2'000'000) {
  const double pi = std::numbers::pi;
  const double hw = 0.5 * g.bridge_width;
  int outside = 0;
  for (int k = 0; k < n_theta; ++k) {
    const double th = (k + 0.5) * (2.0 * pi / n_theta);
    const double x = g.r_water * std::cos(th);
    const double y = g.r_water * std::sin(th);
    // A circle point borders air iff it sits outside both channel bands.
    if (std::abs(x) > hw && std::abs(y) > hw) ++outside;
  }
  const double arc = 2.0 * pi * g.r_water * double(outside) / double(n_theta);
  const double xb = std::sqrt(g.r_water * g.r_water - hw * hw);
  const double walls = 8.0 * (0.5 - xb);
  return arc + walls;
}

struct ProcResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

inline std::string q(const std::string& s) { return "'" + s + "'"; }

// Runs a shell command, captures combined output. Used for CLI contract
// tests; everything else goes through the library directly.
inline ProcResult run_process(const std::string& cmd) {
  static int counter = 0;
  const std::string log = "/tmp/corroscale_test_" + std::to_string(counter++) + ".log";
  const int rc = std::system((cmd + " > " + log + " 2>&1").c_str());
  ProcResult r;
  r.exit_code = (rc == -1) ? -1 : WEXITSTATUS(rc);
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  std::remove(log.c_str());
  return r;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline bool file_exists(const std::string& path) { return std::ifstream(path).good(); }

}  // namespace oracles

#endif
