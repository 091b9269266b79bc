#pragma once

// Small column-major dense matrix and the plain partial-pivoting LU used by
// reference solves and condition-number kernels.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "spai_ir/double_double.hpp"
#include "spai_ir/error.hpp"

namespace spai_ir {

using Vector = std::vector<double>;

template <typename T = double>
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1.0);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

  std::span<T> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  std::span<const T> col(std::size_t j) const { return {data_.data() + j * rows_, rows_}; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

namespace dense {

inline double abs_value(double x) { return std::fabs(x); }
inline double abs_value(DoubleDouble x) { return std::fabs(x.hi); }

inline double norm_inf(const DenseMatrix<double>& a) {
  std::vector<double> rowsum(a.rows(), 0.0);
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) rowsum[i] += std::fabs(a(i, j));
  return rowsum.empty() ? 0.0 : *std::max_element(rowsum.begin(), rowsum.end());
}

inline double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline DenseMatrix<double> transpose(const DenseMatrix<double>& a) {
  DenseMatrix<double> t(a.cols(), a.rows());
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) t(j, i) = a(i, j);
  return t;
}

inline DenseMatrix<double> multiply(const DenseMatrix<double>& a, const DenseMatrix<double>& b) {
  if (a.cols() != b.rows()) throw Error(ErrorKind::Dimension, "dense multiply shape mismatch");
  DenseMatrix<double> c(a.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double bkj = b(k, j);
      if (bkj == 0.0) continue;
      for (std::size_t i = 0; i < a.rows(); ++i) c(i, j) += a(i, k) * bkj;
    }
  return c;
}

inline Vector multiply(const DenseMatrix<double>& a, std::span<const double> x) {
  Vector y(a.rows(), 0.0);
  for (std::size_t j = 0; j < a.cols(); ++j) {
    const double xj = x[j];
    if (xj == 0.0) continue;
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] += a(i, j) * xj;
  }
  return y;
}

// LU factorization with partial pivoting, in place: PA = LU with unit L.
template <typename T>
struct LuFactorization {
  DenseMatrix<T> lu;
  std::vector<std::size_t> perm;  // row perm[i] of A is row i of PA
};

template <typename T>
LuFactorization<T> lu_factor(DenseMatrix<T> a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw Error(ErrorKind::Dimension, "LU needs a square matrix");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = abs_value(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = abs_value(a(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best == 0.0) throw Error(ErrorKind::Singular, "zero pivot in column " + std::to_string(k));
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(perm[k], perm[piv]);
    }
    const T pivot = a(k, k);
    auto colk = a.col(k);
    for (std::size_t i = k + 1; i < n; ++i) colk[i] = colk[i] / pivot;
    for (std::size_t j = k + 1; j < n; ++j) {
      auto colj = a.col(j);
      const T akj = colj[k];
      if (akj == T(0.0)) continue;
      for (std::size_t i = k + 1; i < n; ++i) colj[i] = colj[i] - colk[i] * akj;
    }
  }
  return {std::move(a), std::move(perm)};
}

template <typename T>
std::vector<T> lu_solve(const LuFactorization<T>& f, std::span<const T> b) {
  const std::size_t n = f.lu.rows();
  std::vector<T> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[f.perm[i]];
  for (std::size_t j = 0; j < n; ++j) {
    const T xj = x[j];
    if (xj == T(0.0)) continue;
    auto c = f.lu.col(j);
    for (std::size_t i = j + 1; i < n; ++i) x[i] = x[i] - c[i] * xj;
  }
  for (std::size_t jj = n; jj-- > 0;) {
    auto c = f.lu.col(jj);
    x[jj] = x[jj] / c[jj];
    const T xj = x[jj];
    if (xj == T(0.0)) continue;
    for (std::size_t i = 0; i < jj; ++i) x[i] = x[i] - c[i] * xj;
  }
  return x;
}

// Solve A^T x = b with the factors of A.
inline Vector lu_solve_transpose(const LuFactorization<double>& f, std::span<const double> b) {
  const std::size_t n = f.lu.rows();
  Vector y(b.begin(), b.end());
  // U^T y = b
  for (std::size_t j = 0; j < n; ++j) {
    auto c = f.lu.col(j);
    double s = y[j];
    for (std::size_t i = 0; i < j; ++i) s -= c[i] * y[i];
    y[j] = s / c[j];
  }
  // L^T z = y
  for (std::size_t jj = n; jj-- > 0;) {
    auto c = f.lu.col(jj);
    double s = y[jj];
    for (std::size_t i = jj + 1; i < n; ++i) s -= c[i] * y[i];
    y[jj] = s;
  }
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[f.perm[i]] = y[i];
  return x;
}

inline DenseMatrix<double> inverse(const DenseMatrix<double>& a) {
  const auto f = lu_factor(a);
  const std::size_t n = a.rows();
  DenseMatrix<double> inv(n, n);
  Vector e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    const auto x = lu_solve<double>(f, e);
    std::copy(x.begin(), x.end(), inv.col(j).begin());
    e[j] = 0.0;
  }
  return inv;
}

}  // namespace dense
}  // namespace spai_ir
