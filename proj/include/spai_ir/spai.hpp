#pragma once

// Adaptive sparse approximate inverse (Frobenius-norm minimization with
// pattern augmentation) with every arithmetic operation rounded to a chosen
// precision u_f.
//
// build_spai computes a right approximate inverse M of its argument column
// by column: for column k it solves min ||e_k(I) - A(I,J) m|| for the current
// extraction set J and its shadow I, stops once the residual norm drops to
// eps, and otherwise grows J by at most beta candidates ranked by the
// univariate residual estimate rho_jk. build_left_preconditioner runs it on
// the column-scaled transpose and returns P = M^T D.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "spai_ir/dense.hpp"
#include "spai_ir/double_double.hpp"
#include "spai_ir/error.hpp"
#include "spai_ir/precision.hpp"
#include "spai_ir/sparse.hpp"

namespace spai_ir {

enum class InitialPattern { Identity, PatternOfA };

struct SpaiParams {
  double eps = 0.3;
  // Maximum number of augmentation rounds; unset means ceil(n / beta).
  std::optional<std::size_t> alpha;
  std::size_t beta = 8;
  InitialPattern initial_pattern = InitialPattern::Identity;
  Precision uf = kSingle;
  // Worker threads for the column loop; 0 picks the hardware concurrency.
  unsigned threads = 1;

  std::size_t alpha_for(std::size_t n) const { return alpha ? *alpha : (n + beta - 1) / beta; }

  void validate() const {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
    if (beta < 1) throw Error(ErrorKind::InvalidArgument, "beta must be at least 1");
  }
};

enum class ColumnStatus {
  Satisfied,      // ||s_k||_2 <= eps
  NotConverged,   // ran out of augmentation rounds
  Stagnated,      // no acceptable candidate index
  RankDeficient,  // R has a diagonal entry that rounds to zero in u_f
  Overflow,       // a non-finite value appeared in u_f
};

inline const char* to_string(ColumnStatus s) {
  switch (s) {
    case ColumnStatus::Satisfied: return "satisfied";
    case ColumnStatus::NotConverged: return "not_converged";
    case ColumnStatus::Stagnated: return "stagnated";
    case ColumnStatus::RankDeficient: return "rank_deficient";
    case ColumnStatus::Overflow: return "overflow";
  }
  return "unknown";
}

struct SpaiPreconditioner {
  // M from build_spai, P = M^T D from build_left_preconditioner.
  SparseMatrix P;
  Vector col_resnorm;                // final ||s_k||_2 measured in u_f
  std::vector<std::size_t> col_rounds;  // augmentation rounds performed
  std::vector<ColumnStatus> status;
  bool overflow = false;             // non-finite entries in P

  bool satisfied(std::size_t k) const { return status[k] == ColumnStatus::Satisfied; }

  bool all_satisfied() const {
    return std::all_of(status.begin(), status.end(), [](ColumnStatus s) { return s == ColumnStatus::Satisfied; });
  }

  std::size_t count(ColumnStatus s) const {
    return static_cast<std::size_t>(std::count(status.begin(), status.end(), s));
  }
};

namespace detail {

inline double norm2_in(std::span<const double> v, Precision p) {
  Accumulator acc(p);
  for (double x : v) acc.add_product(x, x);
  return fl::sqrt(round_scalar(acc.value(), p), p);
}

inline double dot_in(std::span<const double> a, std::span<const double> b, Precision p) {
  Accumulator acc(p);
  for (std::size_t i = 0; i < a.size(); ++i) acc.add_product(a[i], b[i]);
  return round_scalar(acc.value(), p);
}

}  // namespace detail

struct LsSolution {
  Vector m;  // minimizer coefficients
  Vector s;  // residual Abar m - ebar
  bool rank_deficient = false;
};

// Householder QR least squares with every operation rounded to uf.
inline LsSolution solve_column_ls(const DenseMatrix<double>& abar, std::span<const double> ebar, Precision uf) {
  const std::size_t m = abar.rows(), n = abar.cols();
  if (ebar.size() != m) throw Error(ErrorKind::Dimension, "least-squares right-hand side has wrong length");
  LsSolution out;
  out.m.assign(n, 0.0);
  if (m < n) {
    out.rank_deficient = true;
    return out;
  }
  DenseMatrix<double> r = abar;
  for (double& v : r.data()) v = round_scalar(v, uf);
  Vector qte(ebar.begin(), ebar.end());
  for (double& v : qte) v = round_scalar(v, uf);

  Vector v(m);
  for (std::size_t k = 0; k < n; ++k) {
    auto colk = r.col(k);
    const double norm = detail::norm2_in(colk.subspan(k), uf);
    if (norm == 0.0) {
      out.rank_deficient = true;
      return out;
    }
    const double alpha = colk[k] >= 0.0 ? -norm : norm;
    // v = x - alpha e_1, beta = 2 / (v^T v)
    for (std::size_t i = k; i < m; ++i) v[i] = colk[i];
    v[k] = fl::sub(colk[k], alpha, uf);
    const double vtv = detail::dot_in(std::span<const double>(v).subspan(k, m - k),
                                      std::span<const double>(v).subspan(k, m - k), uf);
    if (vtv == 0.0) {
      out.rank_deficient = true;
      return out;
    }
    const double beta = fl::div(2.0, vtv, uf);
    auto reflect = [&](std::span<double> y) {
      const double w = detail::dot_in(std::span<const double>(v).subspan(k, m - k), y.subspan(k), uf);
      const double bw = fl::mul(beta, w, uf);
      for (std::size_t i = k; i < m; ++i) y[i] = fl::sub(y[i], fl::mul(bw, v[i], uf), uf);
    };
    for (std::size_t j = k + 1; j < n; ++j) reflect(r.col(j));
    reflect(qte);
    colk[k] = alpha;
    for (std::size_t i = k + 1; i < m; ++i) colk[i] = 0.0;
    if (round_scalar(alpha, uf) == 0.0) {
      out.rank_deficient = true;
      return out;
    }
  }
  // Back substitution R m = (Q^T e)(0:n).
  for (std::size_t kk = n; kk-- > 0;) {
    double s = qte[kk];
    for (std::size_t j = kk + 1; j < n; ++j) s = fl::sub(s, fl::mul(r(kk, j), out.m[j], uf), uf);
    out.m[kk] = fl::div(s, r(kk, kk), uf);
  }
  // s = Abar m - ebar, recomputed from the original columns.
  out.s.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      acc = fl::add(acc, fl::mul(round_scalar(abar(i, j), uf), out.m[j], uf), uf);
    out.s[i] = fl::sub(acc, round_scalar(ebar[i], uf), uf);
  }
  return out;
}

// min over mu of ||s + mu a||_2 in uf. Mathematically
// sqrt(||s||^2 - (s^T a)^2 / ||a||^2); evaluated as the norm of the projected
// residual, since the subtraction cancels badly when a is nearly parallel to s.
// Empty when a = 0.
inline std::optional<double> rho_score(std::span<const double> sbar, std::span<const double> a_col, Precision uf) {
  if (sbar.size() != a_col.size()) throw Error(ErrorKind::Dimension, "rho_score length mismatch");
  const double a2 = detail::dot_in(a_col, a_col, uf);
  if (a2 == 0.0) return std::nullopt;
  const double mu = fl::div(detail::dot_in(sbar, a_col, uf), a2, uf);
  Vector t(sbar.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = fl::sub(sbar[i], fl::mul(mu, a_col[i], uf), uf);
  return detail::norm2_in(t, uf);
}

enum class AugmentStatus { Augmented, NoneAcceptable, Stagnated };

struct AugmentResult {
  IndexSet j_set;
  AugmentStatus status = AugmentStatus::Augmented;
};

// Same as augment_pattern below, with the row structure of A supplied as the
// columns of `a_rows` (i.e. a_rows = A^T).
inline AugmentResult augment_pattern(const SparseMatrix& a, const SparseMatrix& a_rows, std::size_t k,
                                     const IndexSet& i_set, const IndexSet& j_set, std::span<const double> sbar,
                                     std::size_t beta, Precision uf) {
  if (sbar.size() != i_set.size()) throw Error(ErrorKind::Dimension, "residual does not match the shadow");
  // L = I u {k}; candidates are the column indices of rows in L not yet in J.
  std::vector<std::size_t> cand;
  auto collect = [&](std::size_t row) {
    for (std::size_t j : a_rows.col_rows(row))
      if (!j_set.contains(j)) cand.push_back(j);
  };
  for (std::size_t l : i_set) collect(l);
  if (!i_set.contains(k)) collect(k);
  const IndexSet candidates(std::move(cand));
  if (candidates.empty()) return {j_set, AugmentStatus::Stagnated};

  struct Scored {
    double rho;
    std::size_t j;
  };
  std::vector<Scored> scored;
  scored.reserve(candidates.size());
  Vector a_on_i(i_set.size());
  for (std::size_t j : candidates) {
    std::fill(a_on_i.begin(), a_on_i.end(), 0.0);
    const auto rows = a.col_rows(j);
    const auto vals = a.col_values(j);
    for (std::size_t p = 0; p < rows.size(); ++p) {
      const std::size_t pos = i_set.position(rows[p]);
      if (pos < i_set.size()) a_on_i[pos] = vals[p];
    }
    const auto rho = rho_score(sbar, a_on_i, uf);
    if (rho && std::isfinite(*rho)) scored.push_back({*rho, j});
  }
  if (scored.empty()) return {j_set, AugmentStatus::Stagnated};

  // Threshold: mean of the u_f-computed scores, formed in double-double and
  // rounded once, so equal scores compare equal to their mean.
  DoubleDouble sum;
  for (const auto& s : scored) sum += DoubleDouble(s.rho);
  const double mean = (sum / DoubleDouble(static_cast<double>(scored.size()))).to_double();

  std::sort(scored.begin(), scored.end(),
            [](const Scored& x, const Scored& y) { return x.rho != y.rho ? x.rho < y.rho : x.j < y.j; });
  std::vector<std::size_t> added;
  for (const auto& s : scored) {
    if (added.size() == beta || s.rho > mean) break;
    added.push_back(s.j);
  }
  if (added.empty()) return {j_set, AugmentStatus::NoneAcceptable};
  return {j_set.united(IndexSet(std::move(added))), AugmentStatus::Augmented};
}

inline AugmentResult augment_pattern(const SparseMatrix& a, std::size_t k, const IndexSet& i_set,
                                     const IndexSet& j_set, std::span<const double> sbar, std::size_t beta,
                                     Precision uf) {
  return augment_pattern(a, a.transpose(), k, i_set, j_set, sbar, beta, uf);
}

namespace detail {

struct ColumnResult {
  IndexSet j_set;
  Vector m;
  double resnorm = 0.0;
  std::size_t rounds = 0;
  ColumnStatus status = ColumnStatus::NotConverged;
};

inline bool finite_all(const Vector& v) { return all_finite(v); }

inline ColumnResult spai_column(const SparseMatrix& a, const SparseMatrix& a_rows, std::size_t k,
                                const SpaiParams& params, std::size_t alpha) {
  const Precision uf = params.uf;
  ColumnResult res;
  IndexSet j_set = params.initial_pattern == InitialPattern::Identity ? IndexSet{k} : IndexSet(std::vector<std::size_t>(
                                                                                          a.col_rows(k).begin(), a.col_rows(k).end()));
  if (j_set.empty()) j_set = IndexSet{k};
  bool have_state = false;
  res.j_set = j_set;
  for (std::size_t step = 0; step <= alpha; ++step) {
    const IndexSet i_set = shadow(a, j_set);
    const DenseMatrix<double> abar = extract_submatrix(a, i_set, j_set);
    Vector ebar(i_set.size(), 0.0);
    if (const std::size_t pos = i_set.position(k); pos < i_set.size()) ebar[pos] = 1.0;
    LsSolution ls = solve_column_ls(abar, ebar, uf);
    if (ls.rank_deficient) {
      res.status = ColumnStatus::RankDeficient;
      if (!have_state) res.resnorm = 1.0;
      return res;
    }
    const double resnorm = detail::norm2_in(ls.s, uf);
    if (!finite_all(ls.m) || !finite_all(ls.s) || !std::isfinite(resnorm)) {
      res.status = ColumnStatus::Overflow;
      if (!have_state) res.resnorm = 1.0;
      return res;
    }
    res.j_set = j_set;
    res.m = std::move(ls.m);
    res.resnorm = resnorm;
    have_state = true;
    if (resnorm <= params.eps) {
      res.status = ColumnStatus::Satisfied;
      return res;
    }
    if (step == alpha) break;
    AugmentResult aug = augment_pattern(a, a_rows, k, i_set, j_set, ls.s, params.beta, uf);
    if (aug.status != AugmentStatus::Augmented) {
      res.status = ColumnStatus::Stagnated;
      return res;
    }
    j_set = std::move(aug.j_set);
    ++res.rounds;
  }
  res.status = ColumnStatus::NotConverged;
  return res;
}

template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  if (threads <= 1 || n < 2) {
    for (std::size_t k = 0; k < n; ++k) body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const unsigned count = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  pool.reserve(count);
  for (unsigned t = 0; t < count; ++t)
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < n; k = next++) body(k);
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

// Right approximate inverse M of `a`, computed in params.uf. Columns are
// independent; the result does not depend on params.threads.
inline SpaiPreconditioner build_spai(const SparseMatrix& at, const SpaiParams& params) {
  params.validate();
  const std::size_t n = at.rows();
  if (at.cols() != n) throw Error(ErrorKind::Dimension, "SPAI needs a square matrix");
  const SparseMatrix a = at.rounded(params.uf);
  if (params.initial_pattern == InitialPattern::Identity) {
    for (std::size_t k = 0; k < n; ++k)
      if (a.at(k, k) == 0.0)
        throw Error(ErrorKind::ZeroDiagonal, "diagonal entry " + std::to_string(k) + " is zero in u_f");
  }
  const SparseMatrix a_rows = a.transpose();
  const std::size_t alpha = params.alpha_for(n);

  std::vector<detail::ColumnResult> cols(n);
  detail::parallel_for(n, params.threads, [&](std::size_t k) { cols[k] = detail::spai_column(a, a_rows, k, params, alpha); });

  SpaiPreconditioner out;
  out.col_resnorm.resize(n);
  out.col_rounds.resize(n);
  out.status.resize(n);
  std::vector<Triplet> trip;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& c = cols[k];
    for (std::size_t i = 0; i < c.m.size(); ++i) trip.push_back({c.j_set[i], k, c.m[i]});
    out.col_resnorm[k] = c.resnorm;
    out.col_rounds[k] = c.rounds;
    out.status[k] = c.status;
  }
  out.P = SparseMatrix::from_triplets(n, n, std::move(trip));
  out.overflow = !all_finite(out.P.values());
  return out;
}

// Left preconditioner P ~ A^{-1}: SPAI on the column-scaled A^T D, then
// P = M^T D rounded to u_f.
inline SpaiPreconditioner build_left_preconditioner(const SparseMatrix& a, const SpaiParams& params) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::Dimension, "preconditioner needs a square matrix");
  const ScaledMatrix sc = column_scale(a.transpose());
  SpaiPreconditioner pre = build_spai(sc.scaled, params);
  const SparseMatrix mt = pre.P.transpose();
  std::vector<double> vals(mt.values().begin(), mt.values().end());
  for (std::size_t j = 0; j < mt.cols(); ++j)
    for (std::size_t p = mt.col_ptr()[j]; p < mt.col_ptr()[j + 1]; ++p)
      vals[p] = fl::mul(vals[p], sc.scaling.d[j], params.uf);
  pre.P = SparseMatrix::from_csc(mt.rows(), mt.cols(), std::vector<std::size_t>(mt.col_ptr().begin(), mt.col_ptr().end()),
                                 std::vector<std::size_t>(mt.row_idx().begin(), mt.row_idx().end()), std::move(vals));
  pre.overflow = !all_finite(pre.P.values());
  return pre;
}

}  // namespace spai_ir
