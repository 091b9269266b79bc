#pragma once

// Five-precision iterative refinement: x0 from the preconditioner or LU
// factors in u_f, residuals in u_r, corrections by left-preconditioned GMRES
// (u_g, u_p) or by triangular solves, and updates in the working precision u.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spai_ir/error.hpp"
#include "spai_ir/krylov.hpp"
#include "spai_ir/lu.hpp"
#include "spai_ir/precision.hpp"
#include "spai_ir/reference.hpp"
#include "spai_ir/spai.hpp"
#include "spai_ir/sparse.hpp"

namespace spai_ir {

enum class Solver { SpaiGmres, LuGmres, PlainGmres, TriangularSir };

inline const char* to_string(Solver s) {
  switch (s) {
    case Solver::SpaiGmres: return "spai";
    case Solver::LuGmres: return "lu";
    case Solver::PlainGmres: return "none";
    case Solver::TriangularSir: return "sir";
  }
  return "unknown";
}

inline Solver parse_solver(const std::string& s) {
  if (s == "spai") return Solver::SpaiGmres;
  if (s == "lu") return Solver::LuGmres;
  if (s == "none") return Solver::PlainGmres;
  if (s == "sir") return Solver::TriangularSir;
  throw Error(ErrorKind::InvalidArgument, "unknown solver '" + s + "'");
}

struct ConvergenceCriteria {
  double c_ferr = 1.0;  // ferr <= c_ferr * n * u
  double c_nbe = 1.0;   // nbe <= c_nbe * n * u
  // Without a reference solution, the relative step ||d||/||x|| <= u
  // replaces the forward-error test.
  bool use_ferr = true;
};

struct IrConfig {
  Precision uf = kSingle, u = kDouble, ur = kQuad, ug = kDouble, up = kDouble;
  double tau = 1e-8;
  std::size_t i_max = 10;
  Solver solver = Solver::SpaiGmres;
  SpaiParams spai{};
  LuOptions lu{};
  std::optional<std::size_t> gmres_max_iters;
  ConvergenceCriteria convergence{};
};

struct IrReport {
  std::size_t steps = 0;
  std::vector<std::size_t> gmres_iters_per_step;
  std::size_t total_gmres_iters = 0;
  Vector ferr_history;  // entry 0 is x0
  Vector nbe_history;
  bool converged = false;
  bool stagnated = false;
  bool gmres_hit_max_iters = false;
  bool overflow = false;
};

struct PreconditionerInfo {
  std::string kind;  // "spai", "lu", "none"
  std::size_t nnz = 0;
  std::size_t unsatisfied_columns = 0;
  bool lu_equilibrated = false;
};

struct ErrorMeasure {
  double ferr = 0.0;
  double nbe = 0.0;
};

// ferr against a double-double reference, nbe from a double-double residual.
inline ErrorMeasure measure_errors(const SparseMatrix& a, std::span<const double> b, std::span<const double> x,
                                   std::span<const DoubleDouble> x_ref) {
  ErrorMeasure m;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num = std::max(num, std::fabs((x_ref[i] - DoubleDouble(x[i])).to_double()));
    den = std::max(den, std::fabs(x_ref[i].to_double()));
  }
  m.ferr = den > 0.0 ? num / den : num;
  const DdVector r = dd_residual(a, x, b);
  const double bden = dense::norm_inf(b) + a.norm_inf() * dense::norm_inf(x);
  m.nbe = bden > 0.0 ? norm_inf(r) / bden : 0.0;
  return m;
}

inline ErrorMeasure measure_errors(const SparseMatrix& a, std::span<const double> b, std::span<const double> x) {
  const DdVector x_ref = dd_solve(a, b);
  return measure_errors(a, b, x, x_ref);
}

inline double nbe_only(const SparseMatrix& a, std::span<const double> b, std::span<const double> x) {
  const DdVector r = dd_residual(a, x, b);
  const double bden = dense::norm_inf(b) + a.norm_inf() * dense::norm_inf(x);
  return bden > 0.0 ? norm_inf(r) / bden : 0.0;
}

struct IrResult {
  Vector x;
  IrReport report;
  PreconditionerInfo precond;
  std::optional<SpaiPreconditioner> spai;
  std::optional<LuFactors> lu;
};

inline IrResult run_ir(const SparseMatrix& a, std::span<const double> b, const IrConfig& cfg) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) throw Error(ErrorKind::Dimension, "system dimension mismatch");
  if (cfg.i_max < 1) throw Error(ErrorKind::InvalidArgument, "i_max must be at least 1");
  if (!all_finite(b)) throw Error(ErrorKind::InvalidArgument, "right-hand side is not finite");

  IrResult res;
  auto& rep = res.report;
  const Precision u = cfg.u;
  auto store_u = [u](Vector& v) {
    for (double& x : v) x = round_scalar(x, u);
  };

  Vector bf(b.begin(), b.end());
  for (double& v : bf) v = round_scalar(v, cfg.uf);

  Vector x(n, 0.0);
  switch (cfg.solver) {
    case Solver::SpaiGmres: {
      SpaiParams sp = cfg.spai;
      sp.uf = cfg.uf;
      res.spai = build_left_preconditioner(a, sp);
      if (res.spai->overflow)
        throw Error(ErrorKind::Overflow, "SPAI preconditioner has non-finite entries in u_f (" +
                                             std::to_string(res.spai->count(ColumnStatus::Overflow)) +
                                             " overflowed columns)");
      res.precond = {"spai", res.spai->P.nnz(), n - res.spai->count(ColumnStatus::Satisfied), false};
      x = matvec(res.spai->P, bf, cfg.uf).y;
      break;
    }
    case Solver::LuGmres:
    case Solver::TriangularSir: {
      res.lu = dense_lu_with_fallback(a, cfg.uf, cfg.lu);
      res.precond = {"lu", res.lu->nnz_lu, 0, res.lu->equilibrated};
      x = lu_apply(*res.lu, bf, cfg.uf);
      break;
    }
    case Solver::PlainGmres:
      res.precond = {"none", 0, 0, false};
      break;
  }
  store_u(x);
  if (!all_finite(x)) {
    rep.overflow = true;
    res.x = std::move(x);
    return res;
  }

  std::optional<DdVector> x_ref;
  if (cfg.convergence.use_ferr) x_ref = dd_solve(a, b);
  auto record = [&](const Vector& xi) {
    if (x_ref) {
      const ErrorMeasure m = measure_errors(a, b, xi, *x_ref);
      rep.ferr_history.push_back(m.ferr);
      rep.nbe_history.push_back(m.nbe);
    } else {
      rep.nbe_history.push_back(nbe_only(a, b, xi));
    }
  };
  record(x);

  const double nu = static_cast<double>(n) * u.unit_roundoff();
  const GmresConfig gcfg{cfg.tau, cfg.gmres_max_iters, cfg.ug, cfg.up};

  for (std::size_t i = 0; i < cfg.i_max; ++i) {
    Vector r = residual(a, x, b, cfg.ur);
    store_u(r);

    Vector d;
    std::size_t its = 0;
    switch (cfg.solver) {
      case Solver::SpaiGmres: {
        GmresResult g = pgmres_left(a, SparsePreconditioner{&res.spai->P}, r, gcfg);
        d = std::move(g.d);
        its = g.report.iters;
        rep.gmres_hit_max_iters = rep.gmres_hit_max_iters || g.report.hit_max_iters;
        rep.overflow = rep.overflow || g.report.overflow;
        break;
      }
      case Solver::LuGmres: {
        GmresResult g = pgmres_left(a, LuPreconditioner{&*res.lu}, r, gcfg);
        d = std::move(g.d);
        its = g.report.iters;
        rep.gmres_hit_max_iters = rep.gmres_hit_max_iters || g.report.hit_max_iters;
        rep.overflow = rep.overflow || g.report.overflow;
        break;
      }
      case Solver::PlainGmres: {
        GmresResult g = pgmres_left(a, IdentityPreconditioner{}, r, gcfg);
        d = std::move(g.d);
        its = g.report.iters;
        rep.gmres_hit_max_iters = rep.gmres_hit_max_iters || g.report.hit_max_iters;
        rep.overflow = rep.overflow || g.report.overflow;
        break;
      }
      case Solver::TriangularSir:
        d = lu_apply(*res.lu, r, cfg.uf);
        break;
    }
    store_u(d);
    for (std::size_t t = 0; t < n; ++t) x[t] = fl::add(x[t], d[t], u);

    ++rep.steps;
    rep.gmres_iters_per_step.push_back(its);
    rep.total_gmres_iters += its;
    record(x);
    if (rep.overflow || !all_finite(x)) {
      rep.overflow = true;
      break;
    }

    const double nbe = rep.nbe_history.back();
    bool forward_ok = false;
    if (x_ref) {
      forward_ok = rep.ferr_history.back() <= cfg.convergence.c_ferr * nu;
    } else {
      const double xn = dense::norm_inf(x);
      forward_ok = xn > 0.0 ? dense::norm_inf(d) / xn <= u.unit_roundoff() : true;
    }
    if (nbe <= cfg.convergence.c_nbe * nu && forward_ok) {
      rep.converged = true;
      break;
    }
    // Stagnation: the error failed to halve on two consecutive steps.
    const Vector& hist = x_ref ? rep.ferr_history : rep.nbe_history;
    const std::size_t h = hist.size();
    if (h >= 3 && hist[h - 1] > 0.5 * hist[h - 2] && hist[h - 2] > 0.5 * hist[h - 3]) {
      rep.stagnated = true;
      break;
    }
  }
  res.x = std::move(x);
  return res;
}

}  // namespace spai_ir
