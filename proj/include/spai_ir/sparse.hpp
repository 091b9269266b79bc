#pragma once

// Compressed-sparse-column storage plus the index-set machinery SPAI needs
// (shadows, submatrix extraction) and precision-aware products.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spai_ir/dense.hpp"
#include "spai_ir/double_double.hpp"
#include "spai_ir/error.hpp"
#include "spai_ir/precision.hpp"

namespace spai_ir {

// Sorted, duplicate-free list of positions.
class IndexSet {
 public:
  IndexSet() = default;
  IndexSet(std::initializer_list<std::size_t> init) : IndexSet(std::vector<std::size_t>(init)) {}
  explicit IndexSet(std::vector<std::size_t> idx) : idx_(std::move(idx)) {
    std::sort(idx_.begin(), idx_.end());
    idx_.erase(std::unique(idx_.begin(), idx_.end()), idx_.end());
  }

  static IndexSet range(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return IndexSet(std::move(v));
  }

  std::size_t size() const { return idx_.size(); }
  bool empty() const { return idx_.empty(); }
  std::size_t operator[](std::size_t i) const { return idx_[i]; }
  auto begin() const { return idx_.begin(); }
  auto end() const { return idx_.end(); }
  const std::vector<std::size_t>& values() const { return idx_; }

  bool contains(std::size_t v) const { return std::binary_search(idx_.begin(), idx_.end(), v); }

  // Position of v within the set, or size() when absent.
  std::size_t position(std::size_t v) const {
    auto it = std::lower_bound(idx_.begin(), idx_.end(), v);
    return (it != idx_.end() && *it == v) ? static_cast<std::size_t>(it - idx_.begin()) : idx_.size();
  }

  IndexSet united(const IndexSet& other) const {
    std::vector<std::size_t> out;
    out.reserve(idx_.size() + other.idx_.size());
    std::set_union(idx_.begin(), idx_.end(), other.idx_.begin(), other.idx_.end(), std::back_inserter(out));
    IndexSet s;
    s.idx_ = std::move(out);
    return s;
  }

  bool operator==(const IndexSet&) const = default;

 private:
  std::vector<std::size_t> idx_;
};

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

class SparseMatrix {
 public:
  SparseMatrix() : col_ptr_(1, 0) {}

  // Duplicates are summed and explicit zeros dropped.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries) {
    for (const auto& t : entries)
      if (t.row >= rows || t.col >= cols)
        throw Error(ErrorKind::Dimension, "triplet index out of range");
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      return a.col != b.col ? a.col < b.col : a.row < b.row;
    });
    SparseMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.col_ptr_.assign(cols + 1, 0);
    std::size_t k = 0;
    while (k < entries.size()) {
      const std::size_t r = entries[k].row, c = entries[k].col;
      double v = 0.0;
      while (k < entries.size() && entries[k].row == r && entries[k].col == c) v += entries[k++].value;
      if (v == 0.0) continue;
      m.row_idx_.push_back(r);
      m.values_.push_back(v);
      ++m.col_ptr_[c + 1];
    }
    for (std::size_t j = 0; j < cols; ++j) m.col_ptr_[j + 1] += m.col_ptr_[j];
    return m;
  }

  static SparseMatrix identity(std::size_t n) {
    std::vector<Triplet> t;
    t.reserve(n);
    for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, n, std::move(t));
  }

  static SparseMatrix from_dense(const DenseMatrix<double>& a) {
    std::vector<Triplet> t;
    for (std::size_t j = 0; j < a.cols(); ++j)
      for (std::size_t i = 0; i < a.rows(); ++i)
        if (a(i, j) != 0.0) t.push_back({i, j, a(i, j)});
    return from_triplets(a.rows(), a.cols(), std::move(t));
  }

  // Build from already-compressed arrays; the invariants are checked.
  static SparseMatrix from_csc(std::size_t rows, std::size_t cols, std::vector<std::size_t> col_ptr,
                               std::vector<std::size_t> row_idx, std::vector<double> values) {
    if (col_ptr.size() != cols + 1 || row_idx.size() != values.size() || col_ptr.back() != values.size())
      throw Error(ErrorKind::Dimension, "inconsistent CSC arrays");
    for (std::size_t j = 0; j < cols; ++j) {
      if (col_ptr[j] > col_ptr[j + 1]) throw Error(ErrorKind::Dimension, "column offsets not monotone");
      for (std::size_t p = col_ptr[j]; p < col_ptr[j + 1]; ++p) {
        if (row_idx[p] >= rows) throw Error(ErrorKind::Dimension, "row index out of range");
        if (p > col_ptr[j] && row_idx[p] <= row_idx[p - 1])
          throw Error(ErrorKind::Dimension, "row indices not strictly increasing");
      }
    }
    SparseMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.col_ptr_ = std::move(col_ptr);
    m.row_idx_ = std::move(row_idx);
    m.values_ = std::move(values);
    m.drop_zeros();
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::size_t> col_ptr() const { return col_ptr_; }
  std::span<const std::size_t> row_idx() const { return row_idx_; }
  std::span<const double> values() const { return values_; }

  std::span<const std::size_t> col_rows(std::size_t j) const {
    return {row_idx_.data() + col_ptr_[j], col_ptr_[j + 1] - col_ptr_[j]};
  }
  std::span<const double> col_values(std::size_t j) const {
    return {values_.data() + col_ptr_[j], col_ptr_[j + 1] - col_ptr_[j]};
  }

  double at(std::size_t i, std::size_t j) const {
    const auto rows = col_rows(j);
    auto it = std::lower_bound(rows.begin(), rows.end(), i);
    if (it == rows.end() || *it != i) return 0.0;
    return values_[col_ptr_[j] + static_cast<std::size_t>(it - rows.begin())];
  }

  SparseMatrix transpose() const {
    SparseMatrix t;
    t.rows_ = cols_;
    t.cols_ = rows_;
    t.col_ptr_.assign(rows_ + 1, 0);
    for (std::size_t r : row_idx_) ++t.col_ptr_[r + 1];
    for (std::size_t i = 0; i < rows_; ++i) t.col_ptr_[i + 1] += t.col_ptr_[i];
    t.row_idx_.resize(nnz());
    t.values_.resize(nnz());
    std::vector<std::size_t> next(t.col_ptr_.begin(), t.col_ptr_.end() - 1);
    for (std::size_t j = 0; j < cols_; ++j)
      for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) {
        const std::size_t q = next[row_idx_[p]]++;
        t.row_idx_[q] = j;
        t.values_[q] = values_[p];
      }
    return t;
  }

  DenseMatrix<double> to_dense() const {
    DenseMatrix<double> d(rows_, cols_);
    for (std::size_t j = 0; j < cols_; ++j)
      for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) d(row_idx_[p], j) = values_[p];
    return d;
  }

  double norm_inf() const {
    std::vector<double> rowsum(rows_, 0.0);
    for (std::size_t p = 0; p < nnz(); ++p) rowsum[row_idx_[p]] += std::fabs(values_[p]);
    return rowsum.empty() ? 0.0 : *std::max_element(rowsum.begin(), rowsum.end());
  }

  // Copy with every value passed through f; entries mapped to zero vanish.
  template <typename F>
  SparseMatrix map_values(F&& f) const {
    SparseMatrix m = *this;
    for (double& v : m.values_) v = f(v);
    m.drop_zeros();
    return m;
  }

  SparseMatrix rounded(Precision p) const {
    return map_values([p](double v) { return round_scalar(v, p); });
  }

  bool operator==(const SparseMatrix&) const = default;

 private:
  void drop_zeros() {
    std::size_t out = 0;
    std::vector<std::size_t> ptr(cols_ + 1, 0);
    for (std::size_t j = 0; j < cols_; ++j) {
      for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) {
        if (values_[p] == 0.0) continue;
        row_idx_[out] = row_idx_[p];
        values_[out] = values_[p];
        ++out;
      }
      ptr[j + 1] = out;
    }
    row_idx_.resize(out);
    values_.resize(out);
    col_ptr_ = std::move(ptr);
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> col_ptr_;
  std::vector<std::size_t> row_idx_;
  std::vector<double> values_;
};

// Rows with a nonzero in at least one column of J.
inline IndexSet shadow(const SparseMatrix& a, const IndexSet& j_set) {
  std::vector<std::size_t> rows;
  for (std::size_t j : j_set) {
    if (j >= a.cols()) throw Error(ErrorKind::Dimension, "column index out of range in shadow");
    auto r = a.col_rows(j);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  return IndexSet(std::move(rows));
}

inline DenseMatrix<double> extract_submatrix(const SparseMatrix& a, const IndexSet& i_set, const IndexSet& j_set) {
  DenseMatrix<double> out(i_set.size(), j_set.size());
  for (std::size_t c = 0; c < j_set.size(); ++c) {
    const auto rows = a.col_rows(j_set[c]);
    const auto vals = a.col_values(j_set[c]);
    // Merge two sorted lists.
    std::size_t r = 0, p = 0;
    while (r < i_set.size() && p < rows.size()) {
      if (i_set[r] < rows[p]) {
        ++r;
      } else if (rows[p] < i_set[r]) {
        ++p;
      } else {
        out(r, c) = vals[p];
        ++r;
        ++p;
      }
    }
  }
  return out;
}

// Diagonal of D, stored as the multipliers applied to each column.
struct ScalingInfo {
  Vector d;
};

struct ScaledMatrix {
  SparseMatrix scaled;
  ScalingInfo scaling;
};

// Scale each column by the reciprocal of its largest magnitude entry.
inline ScaledMatrix column_scale(const SparseMatrix& at) {
  Vector d(at.cols(), 1.0);
  std::vector<std::size_t> ptr(at.col_ptr().begin(), at.col_ptr().end());
  std::vector<std::size_t> rows(at.row_idx().begin(), at.row_idx().end());
  std::vector<double> vals(at.values().begin(), at.values().end());
  for (std::size_t j = 0; j < at.cols(); ++j) {
    double mx = 0.0;
    for (double v : at.col_values(j)) mx = std::max(mx, std::fabs(v));
    if (mx == 0.0) throw Error(ErrorKind::ZeroColumn, "column " + std::to_string(j) + " is structurally zero");
    d[j] = 1.0 / mx;
    for (std::size_t p = ptr[j]; p < ptr[j + 1]; ++p) vals[p] = vals[p] / mx;
  }
  return {SparseMatrix::from_csc(at.rows(), at.cols(), std::move(ptr), std::move(rows), std::move(vals)),
          ScalingInfo{std::move(d)}};
}

// Inverse of column_scale: multiply column j by 1/d_j.
inline SparseMatrix column_unscale(const SparseMatrix& scaled, const ScalingInfo& s) {
  std::vector<double> vals(scaled.values().begin(), scaled.values().end());
  for (std::size_t j = 0; j < scaled.cols(); ++j)
    for (std::size_t p = scaled.col_ptr()[j]; p < scaled.col_ptr()[j + 1]; ++p) vals[p] = vals[p] / s.d[j];
  return SparseMatrix::from_csc(scaled.rows(), scaled.cols(),
                                std::vector<std::size_t>(scaled.col_ptr().begin(), scaled.col_ptr().end()),
                                std::vector<std::size_t>(scaled.row_idx().begin(), scaled.row_idx().end()),
                                std::move(vals));
}

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

struct MatvecResult {
  Vector y;
  bool overflow = false;  // some entry is inf/nan
};

// y = A x with every product and accumulation rounded to p. Accumulation
// order: columns left to right, ascending rows within a column.
inline MatvecResult matvec(const SparseMatrix& a, std::span<const double> x, Precision p) {
  if (x.size() != a.cols()) throw Error(ErrorKind::Dimension, "matvec dimension mismatch");
  MatvecResult out;
  if (p == kQuad) {
    std::vector<DoubleDouble> acc(a.rows());
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double xj = x[j];
      const auto rows = a.col_rows(j);
      const auto vals = a.col_values(j);
      for (std::size_t k = 0; k < rows.size(); ++k) {
        double prod, err;
        eft::two_prod(vals[k], xj, prod, err);
        acc[rows[k]] += DoubleDouble(prod, err);
      }
    }
    out.y.resize(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) out.y[i] = acc[i].to_double();
  } else {
    out.y.assign(a.rows(), 0.0);
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double xj = x[j];
      const auto rows = a.col_rows(j);
      const auto vals = a.col_values(j);
      for (std::size_t k = 0; k < rows.size(); ++k) {
        double& yi = out.y[rows[k]];
        yi = fl::add(yi, fl::mul(vals[k], xj, p), p);
      }
    }
  }
  out.overflow = !all_finite(out.y);
  return out;
}

// r = b - A x accumulated in precision p (double-double for QuadEmulated),
// starting from b_i and subtracting products in matvec order.
inline Vector residual(const SparseMatrix& a, std::span<const double> x, std::span<const double> b, Precision p) {
  if (x.size() != a.cols() || b.size() != a.rows()) throw Error(ErrorKind::Dimension, "residual dimension mismatch");
  if (p == kQuad) {
    std::vector<DoubleDouble> acc(b.begin(), b.end());
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const auto rows = a.col_rows(j);
      const auto vals = a.col_values(j);
      for (std::size_t k = 0; k < rows.size(); ++k) {
        double prod, err;
        eft::two_prod(vals[k], x[j], prod, err);
        acc[rows[k]] -= DoubleDouble(prod, err);
      }
    }
    Vector r(a.rows());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = acc[i].to_double();
    return r;
  }
  Vector r(b.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = round_scalar(b[i], p);
  for (std::size_t j = 0; j < a.cols(); ++j) {
    const auto rows = a.col_rows(j);
    const auto vals = a.col_values(j);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      double& ri = r[rows[k]];
      ri = fl::sub(ri, fl::mul(vals[k], x[j], p), p);
    }
  }
  return r;
}

// Product of two sparse matrices in double, used for dense-free diagnostics.
inline SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorKind::Dimension, "sparse multiply shape mismatch");
  std::vector<Triplet> t;
  std::vector<double> work(a.rows(), 0.0);
  std::vector<char> mark(a.rows(), 0);
  std::vector<std::size_t> touched;
  for (std::size_t j = 0; j < b.cols(); ++j) {
    touched.clear();
    const auto brows = b.col_rows(j);
    const auto bvals = b.col_values(j);
    for (std::size_t q = 0; q < brows.size(); ++q) {
      const std::size_t k = brows[q];
      const auto arows = a.col_rows(k);
      const auto avals = a.col_values(k);
      for (std::size_t p = 0; p < arows.size(); ++p) {
        const std::size_t i = arows[p];
        if (!mark[i]) {
          mark[i] = 1;
          touched.push_back(i);
        }
        work[i] += avals[p] * bvals[q];
      }
    }
    for (std::size_t i : touched) {
      t.push_back({i, j, work[i]});
      work[i] = 0.0;
      mark[i] = 0;
    }
  }
  return SparseMatrix::from_triplets(a.rows(), b.cols(), std::move(t));
}

}  // namespace spai_ir
