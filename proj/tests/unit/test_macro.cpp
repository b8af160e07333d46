#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "corroscale/errors.hpp"
#include "corroscale/macro.hpp"

using namespace corroscale;

namespace {

// Chemistry-free model: zero tensors, zero rates, empty interface quadrature.
EffectiveModel inert_model() {
  EffectiveModel m;
  m.k1 = 0;
  m.k2 = 0;
  m.henry = {0.0, 0.0};
  m.law.c_R = 1.0;
  m.law.beta_max = 1.0;
  return m;
}

std::array<FieldInit, 5> flat_init(double u1, double u2, double u3, double u4, double u5) {
  return {[=](Vec2) { return u1; }, [=](Vec2) { return u2; }, [=](Vec2) { return u3; },
          [=](Vec2) { return u4; }, [=](Vec2) { return u5; }};
}

double total(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

TEST_CASE("initial data is sampled at cell centers", "[macro]") {
  MacroGrid grid;
  grid.n = 4;
  EffectiveModel m = inert_model();
  m.sw.w = {0.4, 0.6};
  m.sw.k3 = {0.0, 0.0};

  std::array<FieldInit, 5> init = {
      [](Vec2 x) { return x[0]; },          [](Vec2 x) { return 2.0 * x[1]; },
      [](Vec2) { return 0.25; },            [](Vec2 x) { return x[0] * x[1]; },
      [](Vec2 x) { return x[0] + x[1]; }};
  const MacroState s = init_state(grid, m, init);

  CHECK(s.n == 4);
  CHECK(s.nq == 2);
  CHECK(s.u[0][grid.id(0, 0)] == 0.125);
  CHECK(s.u[0][grid.id(3, 0)] == 0.875);
  CHECK(s.u[1][grid.id(0, 2)] == 1.25);
  CHECK(s.u[2][grid.id(2, 2)] == 0.25);
  CHECK(s.u[3][grid.id(1, 3)] == 0.375 * 0.875);
  // The gypsum layer starts flat across the interface coordinate.
  CHECK(s.u5_at(grid.id(1, 1), 0) == 0.75);
  CHECK(s.u5_at(grid.id(1, 1), 1) == 0.75);

  std::array<FieldInit, 5> bad = init;
  bad[2] = [](Vec2 x) { return x[0] - 0.5; };  // negative left of midline
  try {
    init_state(grid, m, bad);
    FAIL("negative initial data must be rejected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NegativeInitialData);
  }
}

TEST_CASE("positivity step bound tracks the fastest coupling", "[macro]") {
  MacroGrid grid;
  EffectiveModel m = inert_model();
  m.k1 = 0.5;
  m.k2 = 0.25;
  m.henry = {2.0, 0.5};
  m.law.c_R = 2.0;
  m.sw.w = {0.5, 0.5};
  m.sw.k3 = {1.0, 3.0};

  // lam1 = k1 + c_R * sum(w k3) = 0.5 + 2 * 2 = 4.5 dominates
  // lam2 = k2 + b = 0.75 and lam3 = a = 2.
  MacroStepper st(grid, m);
  CHECK(st.dt_stable() == Catch::Approx(1.0 / 4.5).epsilon(1e-14));
}

TEST_CASE("uniform interconversion follows the explicit recurrence", "[macro]") {
  MacroGrid grid;
  grid.n = 3;
  EffectiveModel m = inert_model();
  m.k1 = 1.0;

  const double dt = 1e-3, t_end = 0.1;
  MacroState s = init_state(grid, m, flat_init(1.0, 0.0, 0.3, 0.0, 0.0));
  const Trajectory traj = run_macro(grid, m, s, dt, t_end);
  const MacroState& f = traj.final_state;

  // With k2 = 0 and everything uniform the scheme is plain explicit Euler:
  // u1 *= (1 - dt k1), u2 and u4 integrate k1 u1, u3 never moves.
  double ref1 = 1.0, ref2 = 0.0;
  for (int i = 0; i < 100; ++i) {
    ref2 += dt * 1.0 * ref1;
    ref1 *= 1.0 - dt * 1.0;
  }
  for (int c = 0; c < grid.cells(); ++c) {
    CHECK(f.u[0][c] == Catch::Approx(ref1).epsilon(1e-12));
    CHECK(f.u[1][c] == Catch::Approx(ref2).epsilon(1e-12));
    CHECK(f.u[2][c] == 0.3);
    CHECK(f.u[3][c] == Catch::Approx(ref2).epsilon(1e-12));
  }
  // First order accurate against the exact relaxation.
  CHECK(std::abs(ref1 - std::exp(-t_end)) < 1e-4);
  CHECK(traj.rejected_steps == 0);
  CHECK(f.t == Catch::Approx(t_end).margin(1e-12));
}

TEST_CASE("implicit diffusion damps the discrete cosine mode exactly", "[macro]") {
  const int n = 16;
  MacroGrid grid;
  grid.n = n;
  EffectiveModel m = inert_model();
  const double d = 0.1;
  m.d[0] = Mat2::iso(d);

  // cos(pi x) cos(pi y) at cell centers is an eigenvector of the two point
  // Neumann flux operator; backward Euler scales it by a known factor.
  const double pi = std::numbers::pi;
  std::array<FieldInit, 5> init = flat_init(0, 0, 0, 0, 0);
  init[0] = [&](Vec2 x) { return 1.0 + 0.5 * std::cos(pi * x[0]) * std::cos(pi * x[1]); };
  MacroState s = init_state(grid, m, init);

  const double h = grid.dx();
  const double lam = 2.0 * (2.0 - 2.0 * std::cos(pi * h)) / (h * h);
  const double dt = 0.01;
  const double rho = 1.0 / (1.0 + dt * d * lam);

  const double mass0 = total(s.u[0]);
  MacroStepper st(grid, m);
  const int steps = 12;
  for (int k = 0; k < steps; ++k) st.step(s, dt);

  CHECK(total(s.u[0]) == Catch::Approx(mass0).epsilon(1e-9));
  const double scale = std::pow(rho, steps);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec2 x = grid.center(i, j);
      const double want = 1.0 + 0.5 * scale * std::cos(pi * x[0]) * std::cos(pi * x[1]);
      CHECK(s.u[0][grid.id(i, j)] == Catch::Approx(want).margin(1e-8));
    }
}

TEST_CASE("cross-diffusion terms conserve mass and mix the field", "[macro]") {
  MacroGrid grid;
  grid.n = 12;
  EffectiveModel iso = inert_model();
  iso.d[0] = Mat2{0.1, 0.0, 0.0, 0.1};
  EffectiveModel skew = inert_model();
  skew.d[0] = Mat2{0.1, 0.04, 0.04, 0.1};

  std::array<FieldInit, 5> init = flat_init(0, 0, 0, 0, 0);
  init[0] = [](Vec2 x) {
    return (x[0] < 0.5 && x[1] < 0.5) ? 2.0 : 0.5;  // one hot quadrant
  };

  auto evolve = [&](const EffectiveModel& m) {
    MacroState s = init_state(grid, m, init);
    MacroStepper st(grid, m);
    for (int k = 0; k < 30; ++k) st.step(s, 0.005);
    return s;
  };
  const MacroState a = evolve(iso);
  const MacroState b = evolve(skew);

  const double mass0 = total(init_state(grid, iso, init).u[0]);
  CHECK(total(a.u[0]) == Catch::Approx(mass0).epsilon(1e-9));
  CHECK(total(b.u[0]) == Catch::Approx(mass0).epsilon(1e-9));

  // The off-diagonal entries change the transient.
  double diff = 0;
  for (int c = 0; c < grid.cells(); ++c) diff = std::max(diff, std::abs(a.u[0][c] - b.u[0][c]));
  CHECK(diff > 1e-4);

  // Long after the transient both settle at the flat mean.
  MacroState late = evolve(skew);
  MacroStepper st(grid, skew);
  for (int k = 0; k < 200; ++k) st.step(late, 0.05);
  for (int c = 0; c < grid.cells(); ++c)
    CHECK(late.u[0][c] == Catch::Approx(mass0 / grid.cells()).margin(1e-6));
}

TEST_CASE("gas Dirichlet walls pull u3 to the boundary value", "[macro]") {
  MacroGrid grid;
  grid.n = 8;
  grid.bc = {BcKind::DirichletU3, BcKind::DirichletU3, BcKind::DirichletU3, BcKind::DirichletU3};
  EffectiveModel m = inert_model();
  m.d[2] = Mat2::iso(0.5);
  m.u3_dirichlet_const = 0.8;

  MacroState s = init_state(grid, m, flat_init(0, 0, 0.2, 0, 0));
  MacroStepper st(grid, m);
  double prev_min = 0.2;
  for (int k = 0; k < 100; ++k) {
    st.step(s, 0.01);
    double lo = s.u[2][0];
    for (double v : s.u[2]) lo = std::min(lo, v);
    CHECK(lo >= prev_min - 1e-12);  // monotone fill toward the wall value
    prev_min = lo;
  }
  for (double v : s.u[2]) {
    CHECK(v <= 0.8 + 1e-9);
    CHECK(v == Catch::Approx(0.8).margin(1e-3));
  }
}

TEST_CASE("time tables interpolate and clamp", "[macro]") {
  EffectiveModel m = inert_model();
  m.u3d_times = {0.0, 1.0, 2.0};
  m.u3d_values = {0.2, 0.4, 1.0};
  CHECK(m.u3_dirichlet(-1.0) == 0.2);
  CHECK(m.u3_dirichlet(0.5) == Catch::Approx(0.3).epsilon(1e-15));
  CHECK(m.u3_dirichlet(1.5) == Catch::Approx(0.7).epsilon(1e-15));
  CHECK(m.u3_dirichlet(9.0) == 1.0);
  m.u3d_times.clear();
  m.u3d_values.clear();
  m.u3_dirichlet_const = 0.6;
  CHECK(m.u3_dirichlet(5.0) == 0.6);

  m.d_times[1] = {0.0, 2.0};
  m.d_factors[1] = {1.0, 0.5};
  CHECK(m.d_factor(1, -1.0) == 1.0);
  CHECK(m.d_factor(1, 1.0) == Catch::Approx(0.75).epsilon(1e-15));
  CHECK(m.d_factor(1, 3.0) == 0.5);
  CHECK(m.d_factor(0, 5.0) == 1.0);  // no table means no rescaling
}

TEST_CASE("gypsum uptake removes the matching acid mass", "[macro]") {
  MacroGrid grid;
  grid.n = 4;
  EffectiveModel m = inert_model();
  m.law.c_R = 1.0;
  m.law.beta_max = 0.6;
  m.sw.w = {0.5, 0.25};
  m.sw.k3 = {0.8, 1.6};

  MacroState s = init_state(grid, m, flat_init(1.0, 0.2, 0.1, 0.0, 0.0));
  MacroStepper st(grid, m);
  const DiagnosticsRecord before = diagnostics(s, grid, m);

  for (int k = 0; k < 50; ++k) {
    const double u1_pre = s.u[0][0];
    std::vector<double> u5_pre(s.u5.begin(), s.u5.begin() + s.nq);
    st.step(s, 0.01);
    double gained = 0;
    for (int q = 0; q < s.nq; ++q) gained += m.sw.w[q] * (s.u5_at(0, q) - u5_pre[q]);
    CHECK(u1_pre - s.u[0][0] == Catch::Approx(gained).epsilon(1e-12));
    for (int q = 0; q < s.nq; ++q) CHECK(s.u5_at(0, q) <= m.law.beta_max);
    CHECK(s.u[0][0] >= 0.0);
  }
  const DiagnosticsRecord after = diagnostics(s, grid, m);
  CHECK(after.s_total == Catch::Approx(before.s_total).epsilon(1e-12));
  CHECK(after.gypsum_total > before.gypsum_total);
  // The faster quadrature point accumulates more layer.
  CHECK(s.u5_at(0, 1) > s.u5_at(0, 0));
}

TEST_CASE("diagnostics aggregate fields and the sulfur functional", "[macro]") {
  MacroGrid grid;
  grid.n = 2;
  EffectiveModel m = inert_model();
  m.sw.w = {0.25, 0.75};
  m.sw.k3 = {0.0, 0.0};

  MacroState s = init_state(grid, m, flat_init(0, 0, 0, 0, 2.0));
  s.u[0] = {1, 2, 3, 4};
  s.u[1] = {0.5, 0.5, 0.5, 0.5};
  s.u[2] = {0, 0, 0, 1};

  const DiagnosticsRecord r = diagnostics(s, grid, m);
  CHECK(r.min[0] == 1.0);
  CHECK(r.mean[0] == 2.5);
  CHECK(r.max[0] == 4.0);
  CHECK(r.mean[1] == 0.5);
  CHECK(r.max[2] == 1.0);
  CHECK(r.mean[4] == Catch::Approx(2.0).epsilon(1e-14));
  // vol = 0.25, layer integral = 4 cells * (0.25 + 0.75) * 2 = 8.
  CHECK(r.gypsum_total == Catch::Approx(0.25 * 8.0).epsilon(1e-14));
  CHECK(r.s_total == Catch::Approx(0.25 * (10 + 2 + 1) + 2.0).epsilon(1e-14));
}

TEST_CASE("state distance is a weighted L2 norm", "[macro]") {
  MacroGrid grid;
  grid.n = 2;
  EffectiveModel m = inert_model();
  m.sw.w = {0.5};
  m.sw.k3 = {0.0};

  MacroState a = init_state(grid, m, flat_init(0, 0, 0, 0, 0));
  MacroState b = a;
  CHECK(state_l2_distance(a, b, grid, m) == 0.0);

  b.u[1][3] += 2.0;             // vol * 4 = 1
  b.u5_at(0, 0) += 1.0;         // vol * w * 1 = 0.125
  CHECK(state_l2_distance(a, b, grid, m) == Catch::Approx(std::sqrt(1.125)).epsilon(1e-14));

  MacroState other;
  other.n = 3;
  other.nq = 1;
  CHECK_THROWS_AS(state_l2_distance(a, other, grid, m), Error);
}

TEST_CASE("trajectory records series and requested snapshots", "[macro]") {
  MacroGrid grid;
  grid.n = 4;
  EffectiveModel m = inert_model();
  m.k1 = 0.1;

  MacroState s = init_state(grid, m, flat_init(1, 0, 0, 0, 0));
  const Trajectory traj =
      run_macro(grid, m, s, 0.01, 0.1, {0.0, 0.05, 0.1}, true);

  CHECK(traj.series.size() == 11);
  CHECK(traj.series.front().t == 0.0);
  CHECK(traj.series.back().t == Catch::Approx(0.1).margin(1e-12));
  for (std::size_t i = 1; i < traj.series.size(); ++i)
    CHECK(traj.series[i].t > traj.series[i - 1].t);

  REQUIRE(traj.snapshots.size() == 3);
  CHECK(traj.snapshots[0].first == 0.0);
  CHECK(traj.snapshots[1].first == Catch::Approx(0.05).margin(0.011));
  CHECK(traj.snapshots[2].first == Catch::Approx(0.1).margin(1e-12));
  CHECK(traj.dt_stable_bound == Catch::Approx(1.0 / 0.1).epsilon(1e-12));
}

TEST_CASE("overdriven explicit stages recover by substepping", "[macro]") {
  MacroGrid grid;
  grid.n = 2;
  EffectiveModel m = inert_model();
  m.henry = {30.0, 0.0};  // u3 loses 30 u3 per unit time

  MacroState s = init_state(grid, m, flat_init(0, 0, 1.0, 0, 0));
  // dt * a = 1.5 would push u3 to -0.5; one halving keeps it positive.
  const Trajectory traj = run_macro(grid, m, s, 0.05, 0.2);
  CHECK(traj.rejected_steps >= 1);
  for (double v : traj.final_state.u[2]) CHECK(v >= 0.0);
  for (double v : traj.final_state.u[1]) CHECK(v > 0.0);

  // Past ten halvings the rejection escalates.
  EffectiveModel hopeless = inert_model();
  hopeless.henry = {3e5, 0.0};
  MacroState s2 = init_state(grid, hopeless, flat_init(0, 0, 1.0, 0, 0));
  CHECK_THROWS_AS(run_macro(grid, hopeless, s2, 0.05, 0.05), Error);
}
