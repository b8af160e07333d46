#ifndef CORROSCALE_CORE_HPP
#define CORROSCALE_CORE_HPP

#include <array>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace corroscale {

inline constexpr const char* version_string = "0.4.1";

using Vec2 = std::array<double, 2>;

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a[0], s * a[1]}; }
inline double dot(Vec2 a, Vec2 b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

/// Dense 2x2 tensor, row major. Used for diffusion coefficients and
/// effective tensors; nothing here assumes symmetry.
struct Mat2 {
  double a11 = 0, a12 = 0, a21 = 0, a22 = 0;

  static Mat2 identity(double s = 1.0) { return {s, 0, 0, s}; }
  static Mat2 iso(double s) { return identity(s); }

  Vec2 apply(Vec2 v) const { return {a11 * v[0] + a12 * v[1], a21 * v[0] + a22 * v[1]}; }
  Mat2 transposed() const { return {a11, a21, a12, a22}; }
  double max_abs() const {
    return std::max(std::max(std::abs(a11), std::abs(a12)),
                    std::max(std::abs(a21), std::abs(a22)));
  }
  double symmetry_defect() const { return std::abs(a12 - a21); }
  bool is_symmetric(double tol = 1e-12) const {
    return symmetry_defect() <= tol * std::max(1.0, max_abs());
  }
  Mat2 scaled(double s) const { return {s * a11, s * a12, s * a21, s * a22}; }

  bool operator==(const Mat2&) const = default;
};

/// Eigenvalues of the symmetric part, ascending. For symmetric input these
/// are the eigenvalues proper.
inline std::array<double, 2> sym_eigenvalues(const Mat2& m) {
  const double s12 = 0.5 * (m.a12 + m.a21);
  const double tr = m.a11 + m.a22;
  const double det = m.a11 * m.a22 - s12 * s12;
  double disc = tr * tr / 4.0 - det;
  disc = disc > 0 ? std::sqrt(disc) : 0.0;
  return {tr / 2.0 - disc, tr / 2.0 + disc};
}

inline bool is_spd(const Mat2& m, double tol = 1e-12) {
  if (!m.is_symmetric(tol)) return false;
  return sym_eigenvalues(m)[0] > 0.0;
}

/// Shortest decimal text that reproduces the double exactly, capped at 17
/// significant digits. Locale independent; used for every numeric output so
/// identical runs give identical bytes.
inline std::string format_g17(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

/// Worker cap shared by every parallel loop. Controlled by the
/// CORROSCALE_THREADS environment variable; unset means hardware count.
inline int max_threads() {
  static const int cached = [] {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("CORROSCALE_THREADS")) {
      char* end = nullptr;
      long v = std::strtol(env, &end, 10);
      if (end != env && v >= 1) hw = static_cast<int>(std::min<long>(v, 256));
    }
    return hw;
  }();
  return cached;
}

/// Static-partition parallel loop. Bodies must write disjoint locations and
/// perform no reductions; under that contract the result is bit-identical
/// for every thread count.
inline void parallel_for(int n, const std::function<void(int)>& body) {
  const int nt = std::min(max_threads(), std::max(1, n));
  if (nt <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  const int chunk = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    const int lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      for (int i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace corroscale

#endif
