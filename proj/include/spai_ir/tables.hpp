#pragma once

// Runs one golden-table row on a loaded matrix and checks it against the
// reference values with the agreed tolerance bands.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "spai_ir/analysis.hpp"
#include "spai_ir/experiments.hpp"
#include "spai_ir/refine.hpp"
#include "spai_ir/report.hpp"

namespace spai_ir::experiments {

inline constexpr double kNnzBand = 0.15;
inline constexpr double kItersBand = 0.25;

struct RowOutcome {
  const TableRow* row = nullptr;
  bool missing = false;
  std::string error;
  double kappa_tilde = 0.0;
  std::size_t nnz = 0;
  std::vector<std::size_t> iters;
  std::size_t total_iters = 0;
  bool converged = false;
  double ferr = 0.0, nbe = 0.0, error_limit = 0.0;
  // Half-u_f counterpart (t6 SPAI rows).
  std::optional<std::size_t> half_nnz, half_total_iters;

  bool nnz_ok = true, iters_ok = true, converged_ok = false, half_ok = true;

  bool pass() const { return !missing && error.empty() && nnz_ok && iters_ok && converged_ok && half_ok; }
};

inline double final_or_zero(const Vector& v) { return v.empty() ? 0.0 : v.back(); }

// |a - b| <= band * max(a, b)
inline bool close_to_larger(double a, double b, double band) {
  return std::fabs(a - b) <= band * std::max(std::fabs(a), std::fabs(b));
}

inline RowOutcome evaluate_row(const TableRow& row, const SparseMatrix& a, const IrConfig& cfg) {
  RowOutcome out;
  out.row = &row;
  const std::size_t n = a.rows();
  const Vector b = equal_rhs(n);
  try {
    const IrResult res = run_ir(a, b, cfg);
    out.nnz = res.precond.nnz;
    out.iters = res.report.gmres_iters_per_step;
    out.total_iters = res.report.total_gmres_iters;
    out.converged = res.report.converged;
    out.ferr = final_or_zero(res.report.ferr_history);
    out.nbe = final_or_zero(res.report.nbe_history);
    if (res.spai) out.kappa_tilde = kappa_preconditioned(a, res.spai->P);
    else if (res.lu) out.kappa_tilde = kappa_preconditioned(a, *res.lu);
    else out.kappa_tilde = kappa_inf(a);
  } catch (const Error& e) {
    out.error = e.what();
    return out;
  }
  out.error_limit = 100.0 * static_cast<double>(n) * cfg.u.unit_roundoff();
  out.converged_ok = out.converged && out.ferr <= out.error_limit && out.nbe <= out.error_limit;

  if (row.solver == Solver::SpaiGmres) {
    out.nnz_ok = within_relative(static_cast<double>(out.nnz), static_cast<double>(row.nnz), kNnzBand);
    out.iters_ok = within_relative(static_cast<double>(out.total_iters), static_cast<double>(row.total_iters()),
                                   kItersBand);
  } else if (row.solver == Solver::PlainGmres) {
    out.iters_ok = within_relative(static_cast<double>(out.total_iters), static_cast<double>(row.total_iters()),
                                   kItersBand);
  }

  if (row.table == TableId::T6 && row.solver == Solver::SpaiGmres) {
    IrConfig half = cfg;
    half.uf = kHalf;
    try {
      const IrResult res = run_ir(a, b, half);
      out.half_nnz = res.precond.nnz;
      out.half_total_iters = res.report.total_gmres_iters;
      out.half_ok = close_to_larger(static_cast<double>(out.total_iters),
                                    static_cast<double>(*out.half_total_iters), kItersBand) &&
                    close_to_larger(static_cast<double>(out.nnz), static_cast<double>(*out.half_nnz), kNnzBand);
    } catch (const Error& e) {
      out.error = std::string("half u_f run: ") + e.what();
      out.half_ok = false;
    }
  }
  return out;
}

inline RowOutcome evaluate_row(const TableRow& row, const SparseMatrix& a) {
  return evaluate_row(row, a, config_for(row));
}

inline std::string row_label(const TableRow& row) {
  std::string s = to_string(row.solver);
  if (row.solver == Solver::SpaiGmres) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "spai(%.1f)", row.eps);
    s = buf;
  }
  return s;
}

// "a(b,c)": total followed by per-step counts.
inline std::string iters_tuple(std::size_t total, const std::vector<std::size_t>& per_step) {
  std::string s = std::to_string(total) + "(";
  for (std::size_t i = 0; i < per_step.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(per_step[i]);
  }
  return s + ")";
}

inline Json to_json(const RowOutcome& o) {
  Json j;
  const TableRow& r = *o.row;
  j["table"] = to_string(r.table);
  j["matrix"] = r.matrix;
  j["preconditioner"] = row_label(r);
  if (o.missing) {
    j["status"] = "missing";
    return j;
  }
  if (!o.error.empty()) j["error"] = o.error;
  j["kappa_tilde"] = o.kappa_tilde;
  j["nnz"] = o.nnz;
  j["iters"] = o.iters;
  j["total_iters"] = o.total_iters;
  j["converged"] = o.converged;
  j["ferr"] = o.ferr;
  j["nbe"] = o.nbe;
  j["ref_kappa_tilde"] = r.kappa_tilde;
  j["ref_nnz"] = r.nnz;
  j["ref_iters"] = r.iters;
  j["ref_total_iters"] = r.total_iters();
  if (o.half_nnz) {
    j["half_nnz"] = *o.half_nnz;
    j["half_total_iters"] = *o.half_total_iters;
  }
  j["status"] = o.pass() ? "pass" : "fail";
  return j;
}

}  // namespace spai_ir::experiments
