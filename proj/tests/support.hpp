#pragma once

// Deterministic test matrices and independent long-double oracles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "spai_ir/spai_ir.hpp"

namespace testing_support {

using spai_ir::DenseMatrix;
using spai_ir::SparseMatrix;
using spai_ir::Triplet;
using spai_ir::Vector;

using LD = long double;
using LdMatrix = std::vector<std::vector<LD>>;  // row-major

// Random sparse matrix with a dominant diagonal (strict row and column
// dominance); density is the off-diagonal fill probability.
inline SparseMatrix random_diag_dominant(std::size_t n, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::bernoulli_distribution fill(density);
  std::vector<Triplet> t;
  std::vector<double> row_sum(n, 0.0), col_sum(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && fill(rng)) {
        const double v = val(rng);
        t.push_back({i, j, v});
        row_sum[i] += std::fabs(v);
        col_sum[j] += std::fabs(v);
      }
  for (std::size_t i = 0; i < n; ++i) {
    const double d = 1.0 + std::max(row_sum[i], col_sum[i]) * (1.0 + 0.5 * std::fabs(val(rng)));
    t.push_back({i, i, val(rng) < 0 ? -d : d});
  }
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

// Random sparse matrix with no structure guarantees (for pattern tests).
inline SparseMatrix random_sparse(std::size_t rows, std::size_t cols, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  std::bernoulli_distribution fill(density);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (fill(rng)) t.push_back({i, j, val(rng)});
  return SparseMatrix::from_triplets(rows, cols, std::move(t));
}

// Upwind convection-diffusion on an m x m grid (nonsymmetric, M-matrix).
inline SparseMatrix convection_diffusion(std::size_t m, double wind = 0.3) {
  const std::size_t n = m * m;
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t k = i * m + j;
      t.push_back({k, k, 4.0 + 2.0 * wind});
      if (i > 0) t.push_back({k, k - m, -1.0 - wind});
      if (i + 1 < m) t.push_back({k, k + m, -1.0});
      if (j > 0) t.push_back({k, k - 1, -1.0 - wind});
      if (j + 1 < m) t.push_back({k, k + 1, -1.0});
    }
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

inline SparseMatrix tridiagonal(std::size_t n, double lo, double diag, double up) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    t.push_back({i, i, diag});
    if (i > 0) t.push_back({i, i - 1, lo});
    if (i + 1 < n) t.push_back({i, i + 1, up});
  }
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

inline SparseMatrix diagonal(const std::vector<double>& d) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < d.size(); ++i) t.push_back({i, i, d[i]});
  return SparseMatrix::from_triplets(d.size(), d.size(), std::move(t));
}

inline LdMatrix to_ld(const DenseMatrix<double>& a) {
  LdMatrix m(a.rows(), std::vector<LD>(a.cols()));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m[i][j] = a(i, j);
  return m;
}

// Gaussian elimination with partial pivoting in long double.
inline std::vector<LD> ld_solve(LdMatrix a, std::vector<LD> b) {
  const std::size_t n = a.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::fabs(a[i][k]) > std::fabs(a[p][k])) p = i;
    std::swap(a[k], a[p]);
    std::swap(b[k], b[p]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const LD l = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= l * a[k][j];
      b[i] -= l * b[k];
    }
  }
  std::vector<LD> x(n);
  for (std::size_t i = n; i-- > 0;) {
    LD s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

// Least squares min ||A m - e|| via normal equations in long double.
inline std::vector<LD> ld_least_squares(const DenseMatrix<double>& a, const Vector& e) {
  const std::size_t m = a.rows(), n = a.cols();
  LdMatrix g(n, std::vector<LD>(n, 0.0L));
  std::vector<LD> rhs(n, 0.0L);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t r = 0; r < m; ++r) g[i][j] += static_cast<LD>(a(r, i)) * a(r, j);
    for (std::size_t r = 0; r < m; ++r) rhs[i] += static_cast<LD>(a(r, i)) * e[r];
  }
  return ld_solve(g, rhs);
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline std::vector<LD> ld_sym_eigenvalues(LdMatrix a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    LD off = 0.0L;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    if (off < 1e-36L) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0L) continue;
        const LD theta = (a[q][q] - a[p][p]) / (2.0L * a[p][q]);
        const LD t = (theta >= 0 ? 1.0L : -1.0L) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0L));
        const LD c = 1.0L / std::sqrt(t * t + 1.0L), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const LD akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const LD apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
  }
  std::vector<LD> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  return ev;
}

// 2-norm condition number of a full-column-rank rectangular matrix.
inline double kappa2(const DenseMatrix<double>& a) {
  const std::size_t m = a.rows(), n = a.cols();
  LdMatrix g(n, std::vector<LD>(n, 0.0L));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t r = 0; r < m; ++r) g[i][j] += static_cast<LD>(a(r, i)) * a(r, j);
  const auto ev = ld_sym_eigenvalues(g);
  const auto [mn, mx] = std::minmax_element(ev.begin(), ev.end());
  return static_cast<double>(std::sqrt(*mx / *mn));
}

inline double ld_norm2(const std::vector<LD>& v) {
  LD s = 0.0L;
  for (LD x : v) s += x * x;
  return static_cast<double>(std::sqrt(s));
}

}  // namespace testing_support
