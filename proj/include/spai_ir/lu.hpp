#pragma once

// Dense partial-pivoting LU in an emulated precision u_f: the baseline
// preconditioner for LU-GMRES-IR and the solver for classical refinement.
// Optional reverse Cuthill-McKee symmetric reordering and two-sided
// equilibration with a max-value shift for half-precision factorizations.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spai_ir/dense.hpp"
#include "spai_ir/error.hpp"
#include "spai_ir/precision.hpp"
#include "spai_ir/sparse.hpp"

namespace spai_ir {

// Reverse Cuthill-McKee ordering of the pattern of A + A^T. perm[i] is the
// original index placed at position i.
inline std::vector<std::size_t> reverse_cuthill_mckee(const SparseMatrix& a) {
  const std::size_t n = a.rows();
  const SparseMatrix at = a.transpose();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i : a.col_rows(j))
      if (i != j) adj[j].push_back(i);
    for (std::size_t i : at.col_rows(j))
      if (i != j) adj[j].push_back(i);
  }
  for (auto& l : adj) {
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
  }
  auto degree = [&](std::size_t v) { return adj[v].size(); };

  std::vector<char> visited(n, 0);
  std::vector<std::size_t> order;
  order.reserve(n);
  auto bfs_levels = [&](std::size_t root, std::vector<std::size_t>& last_level) {
    std::vector<int> level(n, -1);
    std::vector<std::size_t> frontier{root};
    level[root] = 0;
    int depth = 0;
    while (true) {
      std::vector<std::size_t> next;
      for (std::size_t v : frontier)
        for (std::size_t w : adj[v])
          if (level[w] < 0 && !visited[w]) {
            level[w] = depth + 1;
            next.push_back(w);
          }
      if (next.empty()) break;
      frontier = std::move(next);
      ++depth;
    }
    last_level = frontier;
    return depth;
  };

  for (std::size_t start = 0; start < n; ++start) {
    if (visited[start]) continue;
    // Minimum-degree vertex of this component, then a pseudo-peripheral walk.
    std::size_t root = start;
    {
      std::vector<std::size_t> comp{start};
      std::vector<char> seen(n, 0);
      seen[start] = 1;
      for (std::size_t q = 0; q < comp.size(); ++q)
        for (std::size_t w : adj[comp[q]])
          if (!seen[w] && !visited[w]) {
            seen[w] = 1;
            comp.push_back(w);
          }
      for (std::size_t v : comp)
        if (degree(v) < degree(root) || (degree(v) == degree(root) && v < root)) root = v;
    }
    std::vector<std::size_t> last;
    int ecc = bfs_levels(root, last);
    for (int it = 0; it < 8; ++it) {
      std::size_t cand = last.front();
      for (std::size_t v : last)
        if (degree(v) < degree(cand) || (degree(v) == degree(cand) && v < cand)) cand = v;
      std::vector<std::size_t> cand_last;
      const int e = bfs_levels(cand, cand_last);
      if (e <= ecc) break;
      ecc = e;
      root = cand;
      last = std::move(cand_last);
    }
    std::deque<std::size_t> queue{root};
    visited[root] = 1;
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      order.push_back(v);
      std::vector<std::size_t> nb;
      for (std::size_t w : adj[v])
        if (!visited[w]) {
          visited[w] = 1;
          nb.push_back(w);
        }
      std::sort(nb.begin(), nb.end(), [&](std::size_t x, std::size_t y) {
        return degree(x) != degree(y) ? degree(x) < degree(y) : x < y;
      });
      for (std::size_t w : nb) queue.push_back(w);
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

enum class Ordering { Natural, Rcm };

struct LuOptions {
  Ordering ordering = Ordering::Natural;
  // Two-sided equilibration followed by scaling the largest entry to
  // theta * max_finite(u_f).
  bool equilibrate = false;
  double theta = 0.1;
};

struct LuFactors {
  DenseMatrix<double> lu;              // unit L below the diagonal, U on and above
  std::vector<std::size_t> pivot;      // row pivot[i] of the scaled reordered matrix is row i of LU
  std::vector<std::size_t> order;      // symmetric reordering, order[i] = original index at position i
  Vector row_scale, col_scale;         // Dr, Dc (ones when not equilibrated)
  double mu = 1.0;
  Precision uf = kDouble;
  std::size_t nnz_lu = 0;              // nnz(L + U) on the u_f-rounded factors
  bool equilibrated = false;

  std::size_t size() const { return lu.rows(); }
};

// Factorization of B = mu * Dr * Q A Q^T * Dc with every operation in uf.
inline LuFactors dense_lu(const SparseMatrix& a, Precision uf, const LuOptions& opts = {}) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw Error(ErrorKind::Dimension, "LU needs a square matrix");
  LuFactors f;
  f.uf = uf;
  f.order.resize(n);
  if (opts.ordering == Ordering::Rcm) {
    f.order = reverse_cuthill_mckee(a);
  } else {
    std::iota(f.order.begin(), f.order.end(), std::size_t{0});
  }
  std::vector<std::size_t> where(n);
  for (std::size_t i = 0; i < n; ++i) where[f.order[i]] = i;

  DenseMatrix<double> b(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto rows = a.col_rows(j);
    const auto vals = a.col_values(j);
    for (std::size_t p = 0; p < rows.size(); ++p) b(where[rows[p]], where[j]) = vals[p];
  }
  f.row_scale.assign(n, 1.0);
  f.col_scale.assign(n, 1.0);
  if (opts.equilibrate) {
    f.equilibrated = true;
    // Rows, then columns, scaled to unit max magnitude.
    for (std::size_t i = 0; i < n; ++i) {
      double mx = 0.0;
      for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, std::fabs(b(i, j)));
      if (mx == 0.0) throw Error(ErrorKind::Singular, "zero row during equilibration");
      f.row_scale[i] = 1.0 / mx;
      for (std::size_t j = 0; j < n; ++j) b(i, j) *= f.row_scale[i];
    }
    for (std::size_t j = 0; j < n; ++j) {
      double mx = 0.0;
      for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, std::fabs(b(i, j)));
      if (mx == 0.0) throw Error(ErrorKind::Singular, "zero column during equilibration");
      f.col_scale[j] = 1.0 / mx;
      for (std::size_t i = 0; i < n; ++i) b(i, j) *= f.col_scale[j];
    }
    f.mu = opts.theta * (uf == kQuad || uf == kDouble ? 1.0 : uf.max_finite());
    for (double& v : b.data()) v *= f.mu;
  }
  for (double& v : b.data()) v = round_scalar(v, uf);

  f.pivot.resize(n);
  std::iota(f.pivot.begin(), f.pivot.end(), std::size_t{0});
  std::vector<std::size_t> lnz;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::fabs(b(k, k));
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::fabs(b(i, k)) > best) {
        best = std::fabs(b(i, k));
        piv = i;
      }
    if (best == 0.0) throw Error(ErrorKind::Singular, "singular in u_f at column " + std::to_string(k));
    if (!std::isfinite(best)) throw Error(ErrorKind::Overflow, "overflow in u_f at column " + std::to_string(k));
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(b(k, j), b(piv, j));
      std::swap(f.pivot[k], f.pivot[piv]);
    }
    const double pivot = b(k, k);
    auto colk = b.col(k);
    lnz.clear();
    for (std::size_t i = k + 1; i < n; ++i) {
      if (colk[i] == 0.0) continue;
      colk[i] = fl::div(colk[i], pivot, uf);
      if (colk[i] != 0.0) lnz.push_back(i);
    }
    for (std::size_t j = k + 1; j < n; ++j) {
      auto colj = b.col(j);
      const double ukj = colj[k];
      if (ukj == 0.0) continue;
      for (std::size_t i : lnz) colj[i] = fl::sub(colj[i], fl::mul(colk[i], ukj, uf), uf);
    }
  }
  for (double v : b.data()) {
    if (!std::isfinite(v)) throw Error(ErrorKind::Overflow, "overflow in u_f in the LU factors");
    if (v != 0.0) ++f.nnz_lu;
  }
  f.lu = std::move(b);
  return f;
}

// Unscaled attempt first; on overflow retry with equilibration.
inline LuFactors dense_lu_with_fallback(const SparseMatrix& a, Precision uf, LuOptions opts = {}) {
  try {
    return dense_lu(a, uf, opts);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Overflow) throw;
  }
  opts.equilibrate = true;
  return dense_lu(a, uf, opts);
}

// x = A^{-1} r using the factors, every operation in precision p.
inline Vector lu_apply(const LuFactors& f, std::span<const double> r, Precision p) {
  const std::size_t n = f.size();
  if (r.size() != n) throw Error(ErrorKind::Dimension, "LU solve dimension mismatch");
  // c = Dr Q r
  Vector c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = fl::mul(f.row_scale[i], round_scalar(r[f.order[i]], p), p);
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = c[f.pivot[i]];
  for (std::size_t j = 0; j < n; ++j) {
    const double yj = y[j];
    if (yj == 0.0) continue;
    auto col = f.lu.col(j);
    for (std::size_t i = j + 1; i < n; ++i)
      if (col[i] != 0.0) y[i] = fl::sub(y[i], fl::mul(col[i], yj, p), p);
  }
  for (std::size_t jj = n; jj-- > 0;) {
    auto col = f.lu.col(jj);
    y[jj] = fl::div(y[jj], col[jj], p);
    const double yj = y[jj];
    if (yj == 0.0) continue;
    for (std::size_t i = 0; i < jj; ++i)
      if (col[i] != 0.0) y[i] = fl::sub(y[i], fl::mul(col[i], yj, p), p);
  }
  // x = mu Q^T Dc y
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[f.order[i]] = fl::mul(fl::mul(f.col_scale[i], y[i], p), f.mu, p);
  return x;
}

// Explicit L and U (for tests and reconstruction checks).
inline std::pair<DenseMatrix<double>, DenseMatrix<double>> lu_split(const LuFactors& f) {
  const std::size_t n = f.size();
  DenseMatrix<double> l(n, n), u(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      if (i > j) l(i, j) = f.lu(i, j);
      else u(i, j) = f.lu(i, j);
      if (i == j) l(i, j) = 1.0;
    }
  return {std::move(l), std::move(u)};
}

struct LuPreconditioner {
  const LuFactors* factors;
  Vector apply(std::span<const double> x, Precision p) const { return lu_apply(*factors, x, p); }
};

}  // namespace spai_ir
