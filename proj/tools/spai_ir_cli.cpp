// spai-ir: single solves, epsilon/precision sweeps, bound checks and
// golden-table reproduction on Matrix Market files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spai_ir/spai_ir.hpp"

namespace {

using namespace spai_ir;
namespace ex = spai_ir::experiments;

enum class OutFormat { Human, Json, Csv };

struct RunSpec {
  std::string matrix;
  std::string solver = "spai";
  std::string precisions = "s,d,q";
  double eps = 0.3;
  std::optional<std::size_t> alpha;
  std::size_t beta = 8;
  std::optional<double> tau;
  std::size_t imax = 10;
  std::string ordering = "rcm";
  unsigned threads = 0;
  std::string out;
  bool json = false, csv = false;

  OutFormat format() const { return json ? OutFormat::Json : csv ? OutFormat::Csv : OutFormat::Human; }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> parse_reals(const std::string& s) {
  std::vector<double> out;
  for (const auto& t : split_list(s)) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != t.size()) throw Error(ErrorKind::InvalidArgument, "not a number: '" + t + "'");
    out.push_back(v);
  }
  return out;
}

// Path as given, else <name>.mtx in the matrix directory.
std::string resolve_matrix(const std::string& m) {
  if (std::filesystem::exists(m)) return m;
  std::string name = std::filesystem::path(m).stem().string();
  if (auto p = ex::locate_matrix(name)) return p->string();
  throw Error(ErrorKind::Io, "matrix not found: " + m);
}

SparseMatrix load(const std::string& m, std::string& name) {
  const std::string path = resolve_matrix(m);
  name = std::filesystem::path(path).stem().string();
  SparseMatrix a = load_matrix_market_file(path);
  if (a.rows() != a.cols()) throw Error(ErrorKind::Dimension, "matrix is not square");
  if (const auto* info = ex::find_matrix(name); info && (info->n != a.rows() || info->nnz != a.nnz()))
    std::cerr << "warning: " << name << " has n=" << a.rows() << " nnz=" << a.nnz() << ", manifest expects n="
              << info->n << " nnz=" << info->nnz << "\n";
  return a;
}

IrConfig make_config(const RunSpec& s) {
  const auto p = split_list(s.precisions);
  if (p.size() != 3 && p.size() != 5)
    throw Error(ErrorKind::InvalidArgument, "--precisions expects uf,u,ur or uf,u,ur,ug,up");
  IrConfig c;
  c.uf = parse_precision(p[0]);
  c.u = parse_precision(p[1]);
  c.ur = parse_precision(p[2]);
  c.ug = p.size() == 5 ? parse_precision(p[3]) : c.u;
  c.up = p.size() == 5 ? parse_precision(p[4]) : c.u;
  c.tau = s.tau ? *s.tau : ex::default_tau(c.u);
  if (!(c.tau > 0.0 && c.tau < 1.0)) throw Error(ErrorKind::InvalidArgument, "--tau must lie in (0, 1)");
  c.i_max = s.imax;
  c.solver = parse_solver(s.solver);
  c.spai.eps = s.eps;
  c.spai.alpha = s.alpha;
  c.spai.beta = s.beta;
  c.spai.threads = s.threads;
  c.spai.uf = c.uf;
  c.spai.validate();
  if (s.ordering == "rcm") c.lu.ordering = Ordering::Rcm;
  else if (s.ordering == "natural") c.lu.ordering = Ordering::Natural;
  else throw Error(ErrorKind::InvalidArgument, "--ordering expects rcm or natural");
  return c;
}

// Writes to --out when given, stdout otherwise.
void emit(const RunSpec& s, const std::string& text) {
  if (s.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(s.out, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot write " + s.out);
  f << text;
}

std::string fmt(double v, const char* f = "%.3g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string join_counts(const std::vector<std::size_t>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += std::to_string(v[i]);
  }
  return s;
}

int cmd_solve(const RunSpec& s) {
  std::string name;
  const SparseMatrix a = load(s.matrix, name);
  const IrConfig cfg = make_config(s);
  const Vector b = ex::equal_rhs(a.rows());
  const IrResult res = run_ir(a, b, cfg);
  double kt = 0.0;
  if (res.spai) kt = kappa_preconditioned(a, res.spai->P);
  else if (res.lu) kt = kappa_preconditioned(a, *res.lu);
  else kt = kappa_inf(a);

  const auto& r = res.report;
  std::string text;
  switch (s.format()) {
    case OutFormat::Json:
      text = solve_report(name, a.rows(), a.nnz(), cfg, res, kt).dump(2) + "\n";
      break;
    case OutFormat::Csv:
      text = "matrix,n,solver,precisions,eps,tau,nnz_precond,kappa_tilde,steps,iters,total_iters,ferr,nbe,converged\n";
      text += name + "," + std::to_string(a.rows()) + "," + to_string(cfg.solver) + "," + s.precisions + "," +
              fmt(cfg.spai.eps, "%g") + "," + fmt(cfg.tau, "%g") + "," + std::to_string(res.precond.nnz) + "," +
              fmt(kt, "%.6e") + "," + std::to_string(r.steps) + "," + join_counts(r.gmres_iters_per_step, ';') +
              "," + std::to_string(r.total_gmres_iters) + "," + fmt(ex::final_or_zero(r.ferr_history), "%.6e") +
              "," + fmt(ex::final_or_zero(r.nbe_history), "%.6e") + "," + (r.converged ? "true" : "false") + "\n";
      break;
    case OutFormat::Human: {
      std::ostringstream o;
      o << "matrix        " << name << " (n=" << a.rows() << ", nnz=" << a.nnz() << ")\n"
        << "solver        " << to_string(cfg.solver) << ", precisions " << to_char(cfg.uf) << "," << to_char(cfg.u)
        << "," << to_char(cfg.ur) << "," << to_char(cfg.ug) << "," << to_char(cfg.up) << ", tau " << fmt(cfg.tau)
        << "\n"
        << "precond nnz   " << res.precond.nnz;
      if (res.precond.unsatisfied_columns) o << " (" << res.precond.unsatisfied_columns << " columns unsatisfied)";
      if (res.precond.lu_equilibrated) o << " (equilibrated)";
      o << "\nkappa(PA)     " << fmt(kt) << "\n"
        << "iterations    " << ex::iters_tuple(r.total_gmres_iters, r.gmres_iters_per_step) << "\n";
      for (std::size_t i = 0; i < r.nbe_history.size(); ++i) {
        o << "  step " << i << "  nbe " << fmt(r.nbe_history[i], "%.3e");
        if (i < r.ferr_history.size()) o << "  ferr " << fmt(r.ferr_history[i], "%.3e");
        o << "\n";
      }
      o << "status        "
        << (r.converged ? "converged" : r.stagnated ? "stagnated" : r.overflow ? "overflow" : "not converged") << "\n";
      text = o.str();
      break;
    }
  }
  emit(s, text);
  if (r.converged) return 0;
  return r.stagnated ? 2 : 1;
}

int cmd_sweep(const RunSpec& s, const std::string& eps_grid, const std::string& uf_list) {
  std::string name;
  const SparseMatrix a = load(s.matrix, name);
  const auto eps = parse_reals(eps_grid);
  const auto ufs = split_list(uf_list);
  if (eps.empty() || ufs.empty()) throw Error(ErrorKind::InvalidArgument, "empty sweep grid");
  const std::size_t n = a.rows();
  const DenseMatrix<double> inv = dense_inverse(a);
  const double c2 = cond2_transpose(a, inv);

  std::string text = "eps,uf,nnz,kappa_tilde,estimate,feasible,all_satisfied,bound_holds,status\n";
  for (double e : eps)
    for (const auto& u : ufs) {
      std::string row = fmt(e, "%g") + "," + u + ",";
      try {
        SpaiParams p;
        p.eps = e;
        p.alpha = s.alpha;
        p.beta = s.beta;
        p.threads = s.threads;
        p.uf = parse_precision(u);
        p.validate();
        const SpaiPreconditioner pre = build_left_preconditioner(a, p);
        const BoundReport br = check_bounds(a, pre, p, &inv);
        row += std::to_string(pre.P.nnz()) + "," + fmt(br.kappa_tilde, "%.6e") + "," + fmt(br.estimate, "%.6e") +
               "," + (p.uf.unit_roundoff() * c2 <= e ? "true" : "false") + "," +
               (br.all_satisfied ? "true" : "false") + "," + (br.bound_holds ? "true" : "false") + ",ok";
      } catch (const Error& err) {
        const double est = (1.0 + 2.0 * static_cast<double>(n) * e) * (1.0 + 2.0 * static_cast<double>(n) * e);
        std::string msg = err.what();
        for (char& ch : msg)
          if (ch == ',' || ch == '\n') ch = ';';
        row += ",," + fmt(est, "%.6e") + ",,,,error: " + msg;
      }
      text += row + "\n";
    }
  emit(s, text);
  return 0;
}

int cmd_bounds(const RunSpec& s) {
  std::string name;
  const SparseMatrix a = load(s.matrix, name);
  const IrConfig cfg = make_config(s);
  const SpaiPreconditioner pre = build_left_preconditioner(a, cfg.spai);
  const BoundReport br = check_bounds(a, pre, cfg.spai);
  std::string text;
  if (s.format() == OutFormat::Human) {
    std::ostringstream o;
    o << "matrix            " << name << " (n=" << br.n << "), eps " << br.eps << ", u_f " << to_name(cfg.uf) << "\n"
      << "feasible          " << (br.feasible ? "yes" : "no") << " (cond2(A^T) = " << fmt(br.cond2_transpose) << ")\n"
      << "columns satisfied " << (br.all_satisfied ? "all" : "not all") << "\n"
      << "||I-PA||          " << fmt(br.norm_I_minus_PA) << " <= " << fmt(br.bound_2n_eps) << "  "
      << (br.bound_holds ? "ok" : "VIOLATED") << "\n"
      << "||P-inv(A)||      " << fmt(br.dist_to_inverse) << " <= " << fmt(br.dist_bound) << "  "
      << (br.dist_bound_holds ? "ok" : "VIOLATED") << "\n"
      << "kappa(PA)         " << fmt(br.kappa_tilde) << " vs estimate " << fmt(br.estimate) << " (ratio "
      << fmt(br.estimate_ratio()) << ")\n";
    text = o.str();
  } else {
    Json j = to_json(br);
    j["matrix"] = name;
    j["nnz"] = pre.P.nnz();
    text = j.dump(2) + "\n";
  }
  emit(s, text);
  // Bounds only bind when every column met its tolerance.
  return !br.all_satisfied || (br.bound_holds && br.dist_bound_holds) ? 0 : 1;
}

int cmd_info(const RunSpec& s) {
  std::string name;
  const SparseMatrix a = load(s.matrix, name);
  const ConditionNumbers c = condition_numbers(a);
  Json j;
  j["matrix"] = name;
  j["n"] = a.rows();
  j["nnz"] = a.nnz();
  j["kappa_inf"] = c.kappa_inf;
  j["cond2_transpose"] = c.cond2_transpose;
  if (const auto* info = ex::find_matrix(name)) {
    j["ref_kappa_inf"] = info->kappa_inf;
    j["ref_cond2_transpose"] = info->cond2_transpose;
    j["match"] = ex::matches_two_figures(c.kappa_inf, info->kappa_inf) &&
                 ex::matches_two_figures(c.cond2_transpose, info->cond2_transpose);
  }
  if (s.format() == OutFormat::Human) {
    emit(s, name + "  n=" + std::to_string(a.rows()) + "  nnz=" + std::to_string(a.nnz()) + "  kappa_inf=" +
                fmt(c.kappa_inf, "%.2e") + "  cond2(A^T)=" + fmt(c.cond2_transpose, "%.2e") + "\n");
  } else {
    emit(s, j.dump(2) + "\n");
  }
  return 0;
}

int cmd_table(const RunSpec& s, const std::string& which) {
  ex::TableId id;
  if (which == "t4") id = ex::TableId::T4;
  else if (which == "t5") id = ex::TableId::T5;
  else if (which == "t6") id = ex::TableId::T6;
  else throw Error(ErrorKind::InvalidArgument, "table must be t4, t5 or t6");

  std::vector<ex::RowOutcome> outcomes;
  std::string cached_name;
  std::optional<SparseMatrix> cached;
  for (const auto* row : ex::rows_for(id)) {
    ex::RowOutcome o;
    o.row = row;
    if (cached_name != row->matrix) {
      cached.reset();
      cached_name = row->matrix;
      if (auto p = ex::locate_matrix(row->matrix)) {
        try {
          cached = load_matrix_market_file(p->string());
        } catch (const Error& e) {
          std::cerr << row->matrix << ": " << e.what() << "\n";
        }
      }
    }
    if (!cached) {
      o.missing = true;
    } else {
      IrConfig cfg = ex::config_for(*row);
      cfg.spai.threads = s.threads;
      o = ex::evaluate_row(*row, *cached, cfg);
    }
    outcomes.push_back(std::move(o));
  }

  bool ok = true;
  std::string text;
  if (s.format() == OutFormat::Json) {
    Json arr = Json::array();
    for (const auto& o : outcomes) arr.push_back(ex::to_json(o));
    text = arr.dump(2) + "\n";
  } else {
    text = "matrix,preconditioner,kappa_tilde,nnz,iters,ref_kappa_tilde,ref_nnz,ref_iters,ferr,nbe,status\n";
    for (const auto& o : outcomes) {
      const auto& r = *o.row;
      text += std::string(r.matrix) + "," + ex::row_label(r) + ",";
      if (o.missing) {
        text += ",,," + fmt(r.kappa_tilde, "%.1e") + "," + std::to_string(r.nnz) + "," +
                ex::iters_tuple(r.total_iters(), r.iters) + ",,,missing\n";
        continue;
      }
      std::string nnz = std::to_string(o.nnz), ref_nnz = std::to_string(r.nnz);
      if (o.half_nnz) nnz += " [" + std::to_string(*o.half_nnz) + "]";
      if (r.half_nnz) ref_nnz += " [" + std::to_string(*r.half_nnz) + "]";
      std::string its = ex::iters_tuple(o.total_iters, o.iters);
      if (o.half_total_iters) its += " [" + std::to_string(*o.half_total_iters) + "]";
      std::string ref_its = ex::iters_tuple(r.total_iters(), r.iters);
      if (r.half_total_iters) ref_its += " [" + std::to_string(*r.half_total_iters) + "]";
      text += fmt(o.kappa_tilde, "%.1e") + "," + nnz + "," + its + "," + fmt(r.kappa_tilde, "%.1e") + "," + ref_nnz +
              "," + ref_its + "," + fmt(o.ferr, "%.2e") + "," + fmt(o.nbe, "%.2e") + "," +
              (o.pass() ? "pass" : o.error.empty() ? "fail" : "error") + "\n";
    }
  }
  for (const auto& o : outcomes) ok = ok && o.pass();
  emit(s, text);
  return ok ? 0 : 1;
}

void add_common(CLI::App* c, RunSpec& s, bool needs_solver) {
  c->add_option("--matrix", s.matrix, "Matrix Market file, or a name looked up in SPAI_IR_MATRIX_DIR")->required();
  if (needs_solver) {
    c->add_option("--solver", s.solver, "spai, lu, none or sir")
        ->check(CLI::IsMember({"spai", "lu", "none", "sir"}));
    c->add_option("--tau", s.tau, "GMRES tolerance (default 1e-4 for u=s, 1e-8 for u=d)");
    c->add_option("--imax", s.imax, "maximum refinement steps");
    c->add_option("--ordering", s.ordering, "LU ordering: rcm or natural");
  }
  c->add_option("--precisions", s.precisions, "uf,u,ur[,ug,up] from h,s,d,q");
  c->add_option("--eps", s.eps, "SPAI column tolerance");
  c->add_option("--alpha", s.alpha, "SPAI augmentation rounds (default ceil(n/beta))");
  c->add_option("--beta", s.beta, "indices added per round");
  c->add_option("--threads", s.threads, "SPAI worker threads (0 = all cores)");
  c->add_option("--out", s.out, "write output to a file");
  auto* j = c->add_flag("--json", s.json, "JSON output");
  auto* v = c->add_flag("--csv", s.csv, "CSV output");
  j->excludes(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-precision iterative refinement with sparse approximate inverse preconditioning"};
  app.require_subcommand(1);
  RunSpec s;
  std::string eps_grid = "0.1,0.2,0.3,0.4,0.5", uf_list = "s,d", table;

  auto* solve = app.add_subcommand("solve", "solve A x = b with b of equal components and unit 2-norm");
  add_common(solve, s, true);
  auto* sweep = app.add_subcommand("sweep", "SPAI statistics over an eps grid and several u_f (CSV)");
  add_common(sweep, s, false);
  sweep->add_option("--eps-grid", eps_grid, "comma-separated eps values");
  sweep->add_option("--uf", uf_list, "comma-separated factorization precisions");
  auto* bounds = app.add_subcommand("bounds", "check the a-posteriori SPAI quality bounds");
  add_common(bounds, s, false);
  auto* info = app.add_subcommand("info", "condition numbers of a matrix");
  info->add_option("--matrix", s.matrix)->required();
  info->add_flag("--json", s.json);
  info->add_option("--out", s.out);
  auto* tab = app.add_subcommand("table", "reproduce a golden table (t4, t5, t6)");
  tab->add_option("name", table)->required()->check(CLI::IsMember({"t4", "t5", "t6"}));
  tab->add_option("--threads", s.threads);
  tab->add_option("--out", s.out);
  tab->add_flag("--json", s.json);
  tab->add_flag("--csv", s.csv);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*solve) return cmd_solve(s);
    if (*sweep) {
      s.csv = true;
      return cmd_sweep(s, eps_grid, uf_list);
    }
    if (*bounds) return cmd_bounds(s);
    if (*info) return cmd_info(s);
    if (*tab) return cmd_table(s, table);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
