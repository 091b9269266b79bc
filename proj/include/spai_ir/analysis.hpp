#pragma once

// Dense condition numbers and the a-posteriori checks of the SPAI quality
// bounds: ||I - PA||_inf <= 2 n eps, ||P - A^{-1}||_inf <= 2 n eps ||A^{-1}||_inf,
// and the rough estimate kappa_inf(PA) ~ (1 + 2 n eps)^2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "spai_ir/dense.hpp"
#include "spai_ir/error.hpp"
#include "spai_ir/lu.hpp"
#include "spai_ir/spai.hpp"
#include "spai_ir/sparse.hpp"

namespace spai_ir {

// Dense inverse in double; columns are solved in parallel.
inline DenseMatrix<double> dense_inverse(const DenseMatrix<double>& a, unsigned threads = 0) {
  const auto f = dense::lu_factor(a);
  const std::size_t n = a.rows();
  DenseMatrix<double> inv(n, n);
  detail::parallel_for(n, threads, [&](std::size_t j) {
    Vector e(n, 0.0);
    e[j] = 1.0;
    const auto x = dense::lu_solve<double>(f, e);
    std::copy(x.begin(), x.end(), inv.col(j).begin());
  });
  return inv;
}

inline DenseMatrix<double> dense_inverse(const SparseMatrix& a, unsigned threads = 0) {
  return dense_inverse(a.to_dense(), threads);
}

inline double kappa_inf(const SparseMatrix& a) { return dense::norm_inf(dense_inverse(a)) * a.norm_inf(); }

inline double kappa_inf(const DenseMatrix<double>& a) { return dense::norm_inf(dense_inverse(a)) * dense::norm_inf(a); }

// Largest singular value of a nonnegative linear map given by its action and
// the action of its transpose (power iteration on B^T B). Stops at a relative
// change of 1e-6, comfortably past three significant digits.
template <typename Apply, typename ApplyT>
double power_norm2(std::size_t n, Apply&& apply, ApplyT&& apply_t, int max_iters = 2000) {
  Vector x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  double sigma = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    const Vector y = apply(x);
    Vector z = apply_t(y);
    const double zn = dense::norm2(z);
    if (zn == 0.0) return 0.0;
    const double next = std::sqrt(zn);
    for (double& v : z) v /= zn;
    x = std::move(z);
    if (it > 0 && std::fabs(next - sigma) <= 1e-6 * next) return next;
    sigma = next;
  }
  return sigma;
}

// cond_2(A^T) = || |A^{-T}| |A^T| ||_2, given A^{-1}.
inline double cond2_transpose(const SparseMatrix& a, const DenseMatrix<double>& inv) {
  const std::size_t n = a.rows();
  const SparseMatrix abs_at = a.transpose().map_values([](double v) { return std::fabs(v); });
  DenseMatrix<double> abs_inv_t(n, n);  // |A^{-T}|
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) abs_inv_t(i, j) = std::fabs(inv(j, i));
  const SparseMatrix abs_a = abs_at.transpose();
  const DenseMatrix<double> abs_inv = dense::transpose(abs_inv_t);
  // B = |A^{-T}| |A^T|, B^T = |A| |A^{-1}|
  auto apply = [&](const Vector& x) { return dense::multiply(abs_inv_t, matvec(abs_at, x, kDouble).y); };
  auto apply_t = [&](const Vector& y) { return matvec(abs_a, dense::multiply(abs_inv, y), kDouble).y; };
  return power_norm2(n, apply, apply_t);
}

inline double cond2_transpose(const SparseMatrix& a) { return cond2_transpose(a, dense_inverse(a)); }

struct ConditionNumbers {
  double kappa_inf = 0.0;
  double cond2_transpose = 0.0;
  double norm_inv_inf = 0.0;
};

inline ConditionNumbers condition_numbers(const SparseMatrix& a) {
  const DenseMatrix<double> inv = dense_inverse(a);
  ConditionNumbers c;
  c.norm_inv_inf = dense::norm_inf(inv);
  c.kappa_inf = c.norm_inv_inf * a.norm_inf();
  c.cond2_transpose = cond2_transpose(a, inv);
  return c;
}

// kappa_inf of the preconditioned operator P A.
inline double kappa_preconditioned(const SparseMatrix& a, const SparseMatrix& p) {
  return kappa_inf(multiply(p, a).to_dense());
}

// kappa_inf of U^{-1} L^{-1} A (with the factorization's scalings/orderings).
inline double kappa_preconditioned(const SparseMatrix& a, const LuFactors& f) {
  const std::size_t n = a.rows();
  DenseMatrix<double> pa(n, n);
  const DenseMatrix<double> ad = a.to_dense();
  detail::parallel_for(n, 0, [&](std::size_t j) {
    const Vector x = lu_apply(f, ad.col(j), kDouble);
    std::copy(x.begin(), x.end(), pa.col(j).begin());
  });
  return kappa_inf(pa);
}

struct BoundReport {
  std::size_t n = 0;
  double eps = 0.0;
  double norm_I_minus_PA = 0.0;
  double bound_2n_eps = 0.0;
  double kappa_tilde = 0.0;
  double estimate = 0.0;  // (1 + 2 n eps)^2
  double dist_to_inverse = 0.0;
  double dist_bound = 0.0;
  double cond2_transpose = 0.0;
  bool feasible = false;        // u_f cond_2(A^T) <= eps
  bool all_satisfied = false;   // every SPAI column met its tolerance
  bool bound_holds = false;     // norm_I_minus_PA <= bound_2n_eps
  bool dist_bound_holds = false;

  // Ratio to the rough estimate; not an upper bound.
  double estimate_ratio() const { return estimate > 0.0 ? kappa_tilde / estimate : 0.0; }
};

inline BoundReport check_bounds(const SparseMatrix& a, const SpaiPreconditioner& pre, const SpaiParams& params,
                                const DenseMatrix<double>* a_inverse = nullptr) {
  const std::size_t n = a.rows();
  std::optional<DenseMatrix<double>> owned;
  if (!a_inverse) {
    owned = dense_inverse(a);
    a_inverse = &*owned;
  }
  BoundReport r;
  r.n = n;
  r.eps = params.eps;
  r.bound_2n_eps = 2.0 * static_cast<double>(n) * params.eps;
  r.estimate = (1.0 + r.bound_2n_eps) * (1.0 + r.bound_2n_eps);

  DenseMatrix<double> pa = multiply(pre.P, a).to_dense();
  r.kappa_tilde = kappa_inf(pa);
  for (std::size_t i = 0; i < n; ++i) pa(i, i) -= 1.0;
  r.norm_I_minus_PA = dense::norm_inf(pa);

  DenseMatrix<double> diff = *a_inverse;
  for (std::size_t j = 0; j < n; ++j) {
    const auto rows = pre.P.col_rows(j);
    const auto vals = pre.P.col_values(j);
    for (std::size_t k = 0; k < rows.size(); ++k) diff(rows[k], j) -= vals[k];
  }
  r.dist_to_inverse = dense::norm_inf(diff);
  r.dist_bound = r.bound_2n_eps * dense::norm_inf(*a_inverse);
  r.cond2_transpose = cond2_transpose(a, *a_inverse);
  r.feasible = params.uf.unit_roundoff() * r.cond2_transpose <= params.eps;
  r.all_satisfied = pre.all_satisfied();
  r.bound_holds = r.norm_I_minus_PA <= r.bound_2n_eps;
  r.dist_bound_holds = r.dist_to_inverse <= r.dist_bound;
  return r;
}

}  // namespace spai_ir
