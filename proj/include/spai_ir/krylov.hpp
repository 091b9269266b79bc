#pragma once

// Left-preconditioned MGS-GMRES. Arnoldi vectors, inner products, norms,
// Givens rotations and the Hessenberg solve use precision u_g; products with
// A and with the preconditioner use precision u_p.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "spai_ir/double_double.hpp"
#include "spai_ir/error.hpp"
#include "spai_ir/precision.hpp"
#include "spai_ir/sparse.hpp"

namespace spai_ir {

// Anything that applies an approximate inverse to a vector in a precision.
template <typename T>
concept Preconditioner = requires(const T& m, std::span<const double> x, Precision p) {
  { m.apply(x, p) } -> std::convertible_to<Vector>;
};

struct IdentityPreconditioner {
  Vector apply(std::span<const double> x, Precision p) const {
    Vector y(x.begin(), x.end());
    for (double& v : y) v = round_scalar(v, p);
    return y;
  }
};

struct SparsePreconditioner {
  const SparseMatrix* P;
  Vector apply(std::span<const double> x, Precision p) const { return matvec(*P, x, p).y; }
};

struct GmresConfig {
  double tau = 1e-8;
  std::optional<std::size_t> max_iters;  // defaults to n
  Precision ug = kDouble;
  Precision up = kDouble;
};

struct GmresReport {
  std::size_t iters = 0;
  Vector relres_history;  // preconditioned relative residual estimate per iteration
  bool converged = false;
  bool breakdown = false;
  bool overflow = false;
  bool hit_max_iters = false;
};

struct GmresResult {
  Vector d;
  GmresReport report;
};

// y = P (A v), both products in up.
inline MatvecResult apply_precond_matvec(const SparseMatrix& a, const SparseMatrix& p, std::span<const double> v,
                                         Precision up) {
  MatvecResult w = matvec(a, v, up);
  MatvecResult y = matvec(p, w.y, up);
  y.overflow = y.overflow || w.overflow;
  return y;
}

namespace detail {

inline double dot_ug(std::span<const double> a, std::span<const double> b, Precision p) {
  Accumulator acc(p);
  for (std::size_t i = 0; i < a.size(); ++i) acc.add_product(a[i], b[i]);
  return round_scalar(acc.value(), p);
}

}  // namespace detail

// Solves P A d = P r from a zero initial guess.
template <Preconditioner Precond>
GmresResult pgmres_left(const SparseMatrix& a, const Precond& precond, std::span<const double> r,
                        const GmresConfig& cfg) {
  const std::size_t n = a.rows();
  if (a.cols() != n || r.size() != n) throw Error(ErrorKind::Dimension, "GMRES dimension mismatch");
  if (!(cfg.tau > 0.0 && cfg.tau < 1.0)) throw Error(ErrorKind::InvalidArgument, "tau must lie in (0, 1)");
  const Precision ug = cfg.ug, up = cfg.up;
  const std::size_t max_iters = std::min(cfg.max_iters.value_or(n), n);

  GmresResult out;
  out.d.assign(n, 0.0);
  auto& rep = out.report;

  Vector z = precond.apply(r, up);
  for (double& v : z) v = round_scalar(v, ug);
  if (!all_finite(z)) {
    rep.overflow = true;
    return out;
  }
  const double beta = fl::sqrt(detail::dot_ug(z, z, ug), ug);
  if (beta == 0.0) {
    rep.converged = true;
    return out;
  }

  std::vector<Vector> basis;
  basis.reserve(max_iters + 1);
  {
    Vector v0(n);
    for (std::size_t i = 0; i < n; ++i) v0[i] = fl::div(z[i], beta, ug);
    basis.push_back(std::move(v0));
  }
  // Column-wise upper Hessenberg, already rotated to upper triangular.
  std::vector<Vector> h;
  Vector cs, sn, g{beta};

  std::size_t k = 0;
  for (; k < max_iters; ++k) {
    const MatvecResult av = matvec(a, basis[k], up);
    Vector w = precond.apply(av.y, up);
    for (double& v : w) v = round_scalar(v, ug);
    if (av.overflow || !all_finite(w)) {
      rep.overflow = true;
      break;
    }
    Vector hk(k + 2, 0.0);
    for (std::size_t i = 0; i <= k; ++i) {
      const double hik = detail::dot_ug(w, basis[i], ug);
      hk[i] = hik;
      for (std::size_t t = 0; t < n; ++t) w[t] = fl::sub(w[t], fl::mul(hik, basis[i][t], ug), ug);
    }
    const double hnext = fl::sqrt(detail::dot_ug(w, w, ug), ug);
    hk[k + 1] = hnext;

    for (std::size_t i = 0; i < k; ++i) {
      const double x = hk[i], y = hk[i + 1];
      hk[i] = fl::add(fl::mul(cs[i], x, ug), fl::mul(sn[i], y, ug), ug);
      hk[i + 1] = fl::sub(fl::mul(cs[i], y, ug), fl::mul(sn[i], x, ug), ug);
    }
    const double x = hk[k], y = hk[k + 1];
    const double den = fl::sqrt(fl::add(fl::mul(x, x, ug), fl::mul(y, y, ug), ug), ug);
    double c = 1.0, s = 0.0;
    if (den != 0.0) {
      c = fl::div(x, den, ug);
      s = fl::div(y, den, ug);
    }
    cs.push_back(c);
    sn.push_back(s);
    hk[k] = fl::add(fl::mul(c, x, ug), fl::mul(s, y, ug), ug);
    hk[k + 1] = 0.0;
    g.push_back(fl::mul(-s, g[k], ug));
    g[k] = fl::mul(c, g[k], ug);
    h.push_back(std::move(hk));

    const double relres = fl::div(std::fabs(g[k + 1]), beta, ug);
    rep.relres_history.push_back(relres);
    if (relres <= cfg.tau) {
      rep.converged = true;
      ++k;
      break;
    }
    if (hnext == 0.0) {
      rep.breakdown = true;
      ++k;
      break;
    }
    Vector vnext(n);
    for (std::size_t t = 0; t < n; ++t) vnext[t] = fl::div(w[t], hnext, ug);
    basis.push_back(std::move(vnext));
  }
  rep.iters = k;
  if (!rep.converged && !rep.breakdown && !rep.overflow && k == max_iters) rep.hit_max_iters = true;

  // Back substitution on the rotated Hessenberg matrix.
  Vector y(k, 0.0);
  for (std::size_t ii = k; ii-- > 0;) {
    double s = g[ii];
    for (std::size_t j = ii + 1; j < k; ++j) s = fl::sub(s, fl::mul(h[j][ii], y[j], ug), ug);
    y[ii] = h[ii][ii] != 0.0 ? fl::div(s, h[ii][ii], ug) : 0.0;
  }
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t t = 0; t < n; ++t) out.d[t] = fl::add(out.d[t], fl::mul(y[j], basis[j][t], ug), ug);
  return out;
}

inline GmresResult pgmres_left(const SparseMatrix& a, const SparseMatrix& p, std::span<const double> r,
                               const GmresConfig& cfg) {
  return pgmres_left(a, SparsePreconditioner{&p}, r, cfg);
}

}  // namespace spai_ir
