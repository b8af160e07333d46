#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <string>
#include <vector>

#include "corroscale/core.hpp"
#include "corroscale/errors.hpp"

using namespace corroscale;

TEST_CASE("vector and matrix primitives", "[core]") {
  const Vec2 a{1.0, 2.0}, b{-3.0, 0.5};
  CHECK(dot(a, b) == -2.0);
  CHECK(norm(Vec2{3.0, 4.0}) == 5.0);
  const Vec2 s = 2.0 * a + b;
  CHECK(s[0] == -1.0);
  CHECK(s[1] == 4.5);

  const Mat2 m{2.0, 1.0, 1.0, 3.0};
  const Vec2 mv = m.apply({1.0, -1.0});
  CHECK(mv[0] == 1.0);
  CHECK(mv[1] == -2.0);
  CHECK(m.transposed() == m);
  CHECK(Mat2{0, 5, -5, 0}.max_abs() == 5.0);
}

TEST_CASE("symmetric eigenvalues are exact on closed-form cases", "[core]") {
  // [[2,1],[1,2]] has eigenvalues 1 and 3.
  auto ev = sym_eigenvalues({2, 1, 1, 2});
  CHECK(ev[0] == Catch::Approx(1.0).margin(1e-14));
  CHECK(ev[1] == Catch::Approx(3.0).margin(1e-14));

  ev = sym_eigenvalues(Mat2::iso(0.25));
  CHECK(ev[0] == 0.25);
  CHECK(ev[1] == 0.25);

  CHECK(is_spd({2, 1, 1, 2}));
  CHECK_FALSE(is_spd({1, 2, 2, 1}));     // indefinite
  CHECK_FALSE(is_spd({1, 0.1, 0, 1}));   // not symmetric
  CHECK_FALSE(is_spd(Mat2::iso(0.0)));   // singular
}

TEST_CASE("numeric text is shortest round-trip decimal", "[core]") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 6.02214076e23, 0.0, -0.0, 1e-300}) {
    const std::string s = format_g17(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(format_g17(0.5) == "0.5");
  CHECK(format_g17(1.0) == "1");
}

TEST_CASE("parallel loop writes every slot once", "[core]") {
  const int n = 1009;  // prime, so chunks never divide evenly
  std::vector<int> hits(n, 0);
  parallel_for(n, [&](int i) { hits[i] += 1; });
  for (int i = 0; i < n; ++i) REQUIRE(hits[i] == 1);
  CHECK(max_threads() >= 1);
}

TEST_CASE("error carries code and message", "[core]") {
  try {
    fail(ErrorCode::RadiusOrdering, "r_solid must sit inside r_water");
    FAIL("fail() must throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RadiusOrdering);
    CHECK(std::string(e.what()).find("r_solid") != std::string::npos);
    CHECK(exit_code_for(e.code()) == 2);
  }
  CHECK(exit_code_for(ErrorCode::SolverDiverged) == 3);
  CHECK(exit_code_for(ErrorCode::IoError) == 3);
  CHECK(std::string(version_string).size() > 0);
}
