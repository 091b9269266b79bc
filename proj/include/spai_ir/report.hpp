#pragma once

// JSON serialization of run reports. Key order is fixed (ordered_json) and
// doubles print with round-trip precision, so identical runs give identical
// bytes.

#include <string>

#include <json.hpp>

#include "spai_ir/analysis.hpp"
#include "spai_ir/refine.hpp"
#include "spai_ir/spai.hpp"

namespace spai_ir {

using Json = nlohmann::ordered_json;

inline Json to_json(const Precision& p) { return std::string(1, to_char(p)); }

inline Json to_json(const IrReport& r) {
  Json j;
  j["steps"] = r.steps;
  j["gmres_iters_per_step"] = r.gmres_iters_per_step;
  j["total_gmres_iters"] = r.total_gmres_iters;
  j["ferr_history"] = r.ferr_history;
  j["nbe_history"] = r.nbe_history;
  j["converged"] = r.converged;
  j["stagnated"] = r.stagnated;
  j["gmres_hit_max_iters"] = r.gmres_hit_max_iters;
  j["overflow"] = r.overflow;
  return j;
}

inline Json to_json(const PreconditionerInfo& p) {
  Json j;
  j["kind"] = p.kind;
  j["nnz"] = p.nnz;
  j["unsatisfied_columns"] = p.unsatisfied_columns;
  j["lu_equilibrated"] = p.lu_equilibrated;
  return j;
}

inline Json to_json(const IrConfig& c) {
  Json j;
  j["precisions"] = {to_json(c.uf), to_json(c.u), to_json(c.ur), to_json(c.ug), to_json(c.up)};
  j["tau"] = c.tau;
  j["i_max"] = c.i_max;
  j["solver"] = to_string(c.solver);
  if (c.solver == Solver::SpaiGmres) {
    j["eps"] = c.spai.eps;
    j["beta"] = c.spai.beta;
    if (c.spai.alpha) j["alpha"] = *c.spai.alpha;
  }
  return j;
}

inline Json to_json(const SpaiPreconditioner& p) {
  Json j;
  j["nnz"] = p.P.nnz();
  Json counts;
  for (auto s : {ColumnStatus::Satisfied, ColumnStatus::NotConverged, ColumnStatus::Stagnated,
                 ColumnStatus::RankDeficient, ColumnStatus::Overflow})
    counts[to_string(s)] = p.count(s);
  j["columns"] = counts;
  j["overflow"] = p.overflow;
  return j;
}

inline Json to_json(const BoundReport& b) {
  Json j;
  j["n"] = b.n;
  j["eps"] = b.eps;
  j["norm_I_minus_PA"] = b.norm_I_minus_PA;
  j["bound_2n_eps"] = b.bound_2n_eps;
  j["kappa_tilde"] = b.kappa_tilde;
  j["estimate"] = b.estimate;
  j["estimate_ratio"] = b.estimate_ratio();
  j["dist_to_inverse"] = b.dist_to_inverse;
  j["dist_bound"] = b.dist_bound;
  j["cond2_transpose"] = b.cond2_transpose;
  j["feasible"] = b.feasible;
  j["all_satisfied"] = b.all_satisfied;
  j["bound_holds"] = b.bound_holds;
  j["dist_bound_holds"] = b.dist_bound_holds;
  return j;
}

// Solve report: configuration, preconditioner stats, kappa_inf of the
// preconditioned operator (when computed) and the refinement history.
inline Json solve_report(const std::string& matrix, std::size_t n, std::size_t nnz, const IrConfig& cfg,
                         const IrResult& res, double kappa_tilde) {
  Json j;
  j["matrix"] = matrix;
  j["n"] = n;
  j["nnz"] = nnz;
  j["config"] = to_json(cfg);
  j["preconditioner"] = to_json(res.precond);
  if (res.spai) j["spai"] = to_json(*res.spai);
  j["kappa_tilde"] = kappa_tilde;
  j["ir"] = to_json(res.report);
  return j;
}

}  // namespace spai_ir
