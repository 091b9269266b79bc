#pragma once

// Double-double residuals and reference solutions used to measure forward
// and backward errors.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "spai_ir/dense.hpp"
#include "spai_ir/double_double.hpp"
#include "spai_ir/error.hpp"
#include "spai_ir/sparse.hpp"

namespace spai_ir {

using DdVector = std::vector<DoubleDouble>;

inline DdVector to_dd(std::span<const double> v) { return DdVector(v.begin(), v.end()); }

inline Vector to_double(std::span<const DoubleDouble> v) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].to_double();
  return out;
}

// b - A x with every product and sum carried in double-double.
inline DdVector dd_residual(const SparseMatrix& a, std::span<const DoubleDouble> x, std::span<const double> b) {
  if (x.size() != a.cols() || b.size() != a.rows()) throw Error(ErrorKind::Dimension, "residual dimension mismatch");
  DdVector r(b.begin(), b.end());
  for (std::size_t j = 0; j < a.cols(); ++j) {
    const auto rows = a.col_rows(j);
    const auto vals = a.col_values(j);
    for (std::size_t k = 0; k < rows.size(); ++k) r[rows[k]] -= DoubleDouble(vals[k]) * x[j];
  }
  return r;
}

inline DdVector dd_residual(const SparseMatrix& a, std::span<const double> x, std::span<const double> b) {
  const DdVector xx = to_dd(x);
  return dd_residual(a, std::span<const DoubleDouble>(xx), b);
}

inline DdVector dd_residual(const DenseMatrix<double>& a, std::span<const double> x, std::span<const double> b) {
  if (x.size() != a.cols() || b.size() != a.rows()) throw Error(ErrorKind::Dimension, "residual dimension mismatch");
  DdVector r(b.begin(), b.end());
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) {
      double p, e;
      eft::two_prod(a(i, j), x[j], p, e);
      r[i] -= DoubleDouble(p, e);
    }
  return r;
}

inline double norm_inf(std::span<const DoubleDouble> v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, std::fabs(x.to_double()));
  return m;
}

// Reference solution of A x = b accurate to double-double working accuracy:
// double LU plus refinement with double-double residuals and a double-double
// iterate. Falls back to a double-double LU when refinement does not settle
// (kappa(A) near 1/u_double).
inline DdVector dd_solve(const SparseMatrix& a, std::span<const double> b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) throw Error(ErrorKind::Dimension, "reference solve dimension mismatch");
  const DenseMatrix<double> ad = a.to_dense();
  const auto f = dense::lu_factor(ad);
  DdVector x = to_dd(dense::lu_solve<double>(f, b));
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 60; ++it) {
    const DdVector r = dd_residual(a, std::span<const DoubleDouble>(x), b);
    const Vector rd = to_double(r);
    const Vector d = dense::lu_solve<double>(f, rd);
    for (std::size_t i = 0; i < n; ++i) x[i] += DoubleDouble(d[i]);
    const double dn = dense::norm_inf(d), xn = norm_inf(x);
    if (dn <= 0x1p-104 * xn) return x;
    // Diverging or stalling well above double-double accuracy.
    if (it > 3 && dn > 0.5 * prev) break;
    prev = dn;
  }
  DenseMatrix<DoubleDouble> add(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) add(i, j) = DoubleDouble(ad(i, j));
  const auto fdd = dense::lu_factor(std::move(add));
  const DdVector bdd = to_dd(b);
  x = dense::lu_solve<DoubleDouble>(fdd, std::span<const DoubleDouble>(bdd));
  // A couple of refinement steps with the double-double factors.
  for (int it = 0; it < 3; ++it) {
    const DdVector r = dd_residual(a, std::span<const DoubleDouble>(x), b);
    const DdVector d = dense::lu_solve<DoubleDouble>(fdd, std::span<const DoubleDouble>(r));
    for (std::size_t i = 0; i < n; ++i) x[i] += d[i];
  }
  return x;
}

inline DdVector dd_solve(const DenseMatrix<double>& a, std::span<const double> b) {
  return dd_solve(SparseMatrix::from_dense(a), b);
}

}  // namespace spai_ir
