#ifndef CORROSCALE_SPARSE_HPP
#define CORROSCALE_SPARSE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "corroscale/errors.hpp"

namespace corroscale {

struct CsrMatrix {
  int n = 0;
  std::vector<int> row_ptr;  // n+1
  std::vector<int> col;
  std::vector<double> val;

  void mul(const std::vector<double>& x, std::vector<double>& y) const {
    for (int i = 0; i < n; ++i) {
      double s = 0;
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
      y[i] = s;
    }
  }
  std::vector<double> diagonal() const {
    std::vector<double> d(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
        if (col[k] == i) d[i] += val[k];
    return d;
  }
};

/// Duplicate-summing triplet assembler. Compression sorts by (row, col), so
/// the result and all downstream arithmetic are independent of insertion
/// order only up to the summation order of duplicates; assembly loops are
/// fixed-order anyway, keeping everything deterministic.
class CooBuilder {
 public:
  explicit CooBuilder(int n) : n_(n) {}
  void add(int i, int j, double v) { trip_.push_back({i, j, v}); }
  int n() const { return n_; }

  CsrMatrix compress() {
    std::sort(trip_.begin(), trip_.end(), [](const Trip& a, const Trip& b) {
      return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    CsrMatrix m;
    m.n = n_;
    m.row_ptr.assign(n_ + 1, 0);
    for (std::size_t k = 0; k < trip_.size();) {
      std::size_t k2 = k;
      double s = 0;
      while (k2 < trip_.size() && trip_[k2].i == trip_[k].i && trip_[k2].j == trip_[k].j)
        s += trip_[k2++].v;
      m.col.push_back(trip_[k].j);
      m.val.push_back(s);
      ++m.row_ptr[trip_[k].i + 1];
      k = k2;
    }
    for (int i = 0; i < n_; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
    return m;
  }

 private:
  struct Trip {
    int i, j;
    double v;
  };
  int n_;
  std::vector<Trip> trip_;
};

struct CgResult {
  int iterations = 0;
  double rel_residual = 0;
  bool converged = false;
};

/// Jacobi-preconditioned conjugate gradients, serial and deterministic.
/// `project`, when given, restores a subspace constraint (mean-free per
/// connected component for the singular periodic Neumann systems); it is
/// applied to the preconditioned residual each iteration.
inline CgResult cg_solve(const CsrMatrix& A, const std::vector<double>& b, std::vector<double>& x,
                         double rel_tol, int max_iter,
                         const std::function<void(std::vector<double>&)>* project = nullptr) {
  const int n = A.n;
  std::vector<double> r(n), z(n), p(n), Ap(n);
  const std::vector<double> diag = A.diagonal();
  std::vector<double> inv_diag(n);
  for (int i = 0; i < n; ++i) inv_diag[i] = diag[i] > 0 ? 1.0 / diag[i] : 1.0;

  if ((int)x.size() != n) x.assign(n, 0.0);
  if (project) (*project)(x);
  A.mul(x, Ap);
  double b_norm2 = 0;
  for (int i = 0; i < n; ++i) {
    r[i] = b[i] - Ap[i];
    b_norm2 += b[i] * b[i];
  }
  const double stop = std::max(rel_tol * std::sqrt(b_norm2), 1e-300);

  CgResult res;
  double rz = 0;
  for (int i = 0; i < n; ++i) {
    z[i] = inv_diag[i] * r[i];
  }
  if (project) (*project)(z);
  for (int i = 0; i < n; ++i) {
    p[i] = z[i];
    rz += r[i] * z[i];
  }
  double r_norm = 0;
  for (int i = 0; i < n; ++i) r_norm += r[i] * r[i];
  r_norm = std::sqrt(r_norm);
  if (r_norm <= stop) {
    res.converged = true;
    res.rel_residual = b_norm2 > 0 ? r_norm / std::sqrt(b_norm2) : 0.0;
    return res;
  }

  for (int it = 1; it <= max_iter; ++it) {
    A.mul(p, Ap);
    double pAp = 0;
    for (int i = 0; i < n; ++i) pAp += p[i] * Ap[i];
    if (!(pAp > 0) || !std::isfinite(pAp))
      fail(ErrorCode::SingularSystem, "conjugate gradients hit a non-positive curvature direction");
    const double alpha = rz / pAp;
    r_norm = 0;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
      r_norm += r[i] * r[i];
    }
    r_norm = std::sqrt(r_norm);
    res.iterations = it;
    if (r_norm <= stop) {
      res.converged = true;
      break;
    }
    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    if (project) (*project)(z);
    double rz_new = 0;
    for (int i = 0; i < n; ++i) rz_new += r[i] * z[i];
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  res.rel_residual = b_norm2 > 0 ? r_norm / std::sqrt(b_norm2) : r_norm;
  return res;
}

/// Plain union-find used for periodic node identification and phase
/// connectivity.
class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n) {
    for (int i = 0; i < n; ++i) parent_[i] = i;
  }
  int find(int a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<int> parent_;
};

}  // namespace corroscale

#endif
