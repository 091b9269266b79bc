#pragma once

// Experiment protocol (right-hand side, default GMRES tolerance) and the
// reference data of the nine SuiteSparse test problems: matrix properties and
// the golden-table rows used by the CLI `table` command and the
// acceptance suite.

#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spai_ir/precision.hpp"
#include "spai_ir/refine.hpp"

namespace spai_ir::experiments {

// Equal components, unit 2-norm.
inline Vector equal_rhs(std::size_t n) { return Vector(n, 1.0 / std::sqrt(static_cast<double>(n))); }

// Roughly the square root of the working precision.
inline double default_tau(Precision u) {
  switch (u.format) {
    case Format::Half: return 1e-2;
    case Format::Single: return 1e-4;
    case Format::Double: return 1e-8;
    case Format::QuadEmulated: return 1e-16;
  }
  return 1e-8;
}

struct MatrixInfo {
  std::string_view name;
  std::size_t n;
  std::size_t nnz;
  std::size_t nnz_inverse;
  double kappa_inf;
  double cond2_transpose;
};

inline const std::vector<MatrixInfo>& manifest() {
  static const std::vector<MatrixInfo> m = {
      {"pores_3", 532, 3474, 213712, 1.2e6, 1.7e5},   {"steam1", 240, 2248, 57599, 3.1e7, 2.8e3},
      {"steam3", 80, 314, 6315, 7.6e10, 5.6e3},       {"saylr1", 238, 1128, 56644, 1.6e9, 5.2e5},
      {"bfwa782", 782, 7514, 458839, 6.8e3, 1.3e3},   {"cage5", 37, 233, 1369, 2.9e1, 7.5e0},
      {"gre_115", 115, 421, 13225, 1.4e2, 3.7e1},     {"orsreg_1", 2205, 14133, 4862025, 7.0e3, 5.9e3},
      {"sherman4", 1104, 3786, 298674, 3.1e3, 1.2e3},
  };
  return m;
}

inline const MatrixInfo* find_matrix(std::string_view name) {
  for (const auto& m : manifest())
    if (m.name == name) return &m;
  return nullptr;
}

// Directory holding <name>.mtx files: SPAI_IR_MATRIX_DIR, else ./matrices.
inline std::filesystem::path matrix_dir() {
  if (const char* env = std::getenv("SPAI_IR_MATRIX_DIR"); env && *env) return env;
  return "matrices";
}

inline std::optional<std::filesystem::path> locate_matrix(std::string_view name) {
  const auto p = matrix_dir() / (std::string(name) + ".mtx");
  if (std::filesystem::exists(p)) return p;
  return std::nullopt;
}

enum class TableId { T4, T5, T6 };

inline std::string_view to_string(TableId t) {
  switch (t) {
    case TableId::T4: return "t4";
    case TableId::T5: return "t5";
    case TableId::T6: return "t6";
  }
  return "?";
}

struct TableSetup {
  Precision uf, u, ur;
  double tau;
};

inline TableSetup setup_for(TableId t) {
  switch (t) {
    case TableId::T4: return {kSingle, kDouble, kQuad, 1e-8};
    case TableId::T5: return {kHalf, kSingle, kDouble, 1e-4};
    case TableId::T6: return {kSingle, kSingle, kDouble, 1e-4};
  }
  return {kSingle, kDouble, kQuad, 1e-8};
}

struct TableRow {
  TableId table;
  std::string_view matrix;
  Solver solver;
  double eps;  // SPAI rows only
  double kappa_tilde;
  std::size_t nnz;
  std::vector<std::size_t> iters;  // per refinement step
  std::optional<std::size_t> half_nnz;  // t6 rows: the u_f = half counterpart
  std::optional<std::size_t> half_total_iters;

  std::size_t total_iters() const {
    std::size_t s = 0;
    for (auto i : iters) s += i;
    return s;
  }
};

inline const std::vector<TableRow>& reference_rows() {
  using S = Solver;
  static const std::vector<TableRow> rows = {
      // (single, double, quad), tau = 1e-8
      {TableId::T4, "pores_3", S::SpaiGmres, 0.5, 6.6e3, 3560, {110, 113}, {}, {}},
      {TableId::T4, "pores_3", S::SpaiGmres, 0.4, 3.8e3, 4871, {86, 88}, {}, {}},
      {TableId::T4, "pores_3", S::LuGmres, 0.0, 1.0e0, 9706, {2, 2}, {}, {}},
      {TableId::T4, "pores_3", S::PlainGmres, 0.0, 1.2e6, 0, {417, 456, 441}, {}, {}},
      {TableId::T4, "steam1", S::SpaiGmres, 0.2, 1.5e0, 1140, {7, 7}, {}, {}},
      {TableId::T4, "steam1", S::SpaiGmres, 0.1, 1.5e0, 1303, {7, 7}, {}, {}},
      {TableId::T4, "steam1", S::LuGmres, 0.0, 1.9e0, 14133, {2}, {}, {}},
      {TableId::T4, "steam1", S::PlainGmres, 0.0, 3.1e7, 0, {158, 193, 192}, {}, {}},
      {TableId::T4, "steam3", S::SpaiGmres, 0.5, 3.9e0, 244, {9, 12, 10}, {}, {}},
      {TableId::T4, "steam3", S::SpaiGmres, 0.1, 1.9e0, 403, {5, 6, 6}, {}, {}},
      {TableId::T4, "steam3", S::LuGmres, 0.0, 1.1e0, 483, {2}, {}, {}},
      {TableId::T4, "steam3", S::PlainGmres, 0.0, 7.6e10, 0, {61, 80, 80}, {}, {}},
      {TableId::T4, "saylr1", S::SpaiGmres, 0.4, 1.9e4, 1932, {64, 66, 65}, {}, {}},
      {TableId::T4, "saylr1", S::SpaiGmres, 0.3, 7.5e3, 3405, {44, 45}, {}, {}},
      {TableId::T4, "saylr1", S::LuGmres, 0.0, 1.0e0, 3607, {2, 3}, {}, {}},
      {TableId::T4, "saylr1", S::PlainGmres, 0.0, 1.6e9, 0, {214, 229, 215}, {}, {}},
      // (half, single, double), tau = 1e-4
      {TableId::T5, "bfwa782", S::SpaiGmres, 0.5, 1.1e3, 6271, {75, 89}, {}, {}},
      {TableId::T5, "bfwa782", S::SpaiGmres, 0.3, 5.0e2, 11430, {54, 60}, {}, {}},
      {TableId::T5, "bfwa782", S::LuGmres, 0.0, 2.1e0, 21838, {3, 4}, {}, {}},
      {TableId::T5, "bfwa782", S::PlainGmres, 0.0, 6.8e3, 0, {172, 209}, {}, {}},
      {TableId::T5, "cage5", S::SpaiGmres, 0.5, 9.9e0, 101, {8, 8}, {}, {}},
      {TableId::T5, "cage5", S::SpaiGmres, 0.3, 3.9e0, 213, {6, 6}, {}, {}},
      {TableId::T5, "cage5", S::LuGmres, 0.0, 1.0e0, 359, {2}, {}, {}},
      {TableId::T5, "cage5", S::PlainGmres, 0.0, 2.9e1, 0, {13, 12}, {}, {}},
      {TableId::T5, "gre_115", S::SpaiGmres, 0.5, 5.8e2, 725, {24, 24}, {}, {}},
      {TableId::T5, "gre_115", S::SpaiGmres, 0.3, 1.8e1, 1719, {10, 11}, {}, {}},
      {TableId::T5, "gre_115", S::LuGmres, 0.0, 1.0e0, 1551, {2}, {}, {}},
      {TableId::T5, "gre_115", S::PlainGmres, 0.0, 1.4e2, 0, {49, 51}, {}, {}},
      {TableId::T5, "orsreg_1", S::SpaiGmres, 0.5, 1.7e2, 9261, {29, 45, 34}, {}, {}},
      {TableId::T5, "orsreg_1", S::SpaiGmres, 0.3, 1.3e2, 11120, {23, 38}, {}, {}},
      {TableId::T5, "orsreg_1", S::LuGmres, 0.0, 2.2e0, 133634, {4, 5}, {}, {}},
      {TableId::T5, "orsreg_1", S::PlainGmres, 0.0, 7.0e3, 0, {107, 150, 95}, {}, {}},
      {TableId::T5, "sherman4", S::SpaiGmres, 0.5, 1.6e3, 1386, {67, 73}, {}, {}},
      {TableId::T5, "sherman4", S::SpaiGmres, 0.3, 5.0e2, 8496, {35, 39}, {}, {}},
      {TableId::T5, "sherman4", S::LuGmres, 0.0, 1.8e0, 14211, {2, 3}, {}, {}},
      {TableId::T5, "sherman4", S::PlainGmres, 0.0, 3.1e3, 0, {85, 93}, {}, {}},
      // (single, single, double), tau = 1e-4; bracketed half-u_f values kept alongside
      {TableId::T6, "bfwa782", S::SpaiGmres, 0.5, 1.1e3, 6261, {74, 92}, 6271, 164},
      {TableId::T6, "bfwa782", S::SpaiGmres, 0.3, 5.0e2, 11470, {54, 60}, 11430, 114},
      {TableId::T6, "bfwa782", S::LuGmres, 0.0, 1.0e0, 21848, {1}, 21838, 7},
      {TableId::T6, "bfwa782", S::PlainGmres, 0.0, 6.8e3, 0, {172, 209}, {}, {}},
      {TableId::T6, "cage5", S::SpaiGmres, 0.5, 9.9e0, 101, {8, 8}, 101, 16},
      {TableId::T6, "cage5", S::SpaiGmres, 0.3, 3.9e0, 213, {6, 6}, 213, 12},
      {TableId::T6, "cage5", S::LuGmres, 0.0, 1.0e0, 359, {1}, 359, 2},
      {TableId::T6, "cage5", S::PlainGmres, 0.0, 2.9e1, 0, {13, 12}, {}, {}},
      {TableId::T6, "gre_115", S::SpaiGmres, 0.5, 6.2e2, 725, {24, 27}, 725, 48},
      {TableId::T6, "gre_115", S::SpaiGmres, 0.3, 1.7e1, 1739, {10, 10}, 1719, 21},
      {TableId::T6, "gre_115", S::LuGmres, 0.0, 1.0e0, 1556, {1}, 1551, 2},
      {TableId::T6, "gre_115", S::PlainGmres, 0.0, 1.4e2, 0, {49, 51}, {}, {}},
      {TableId::T6, "orsreg_1", S::SpaiGmres, 0.5, 1.4e2, 9261, {25, 40, 32}, 9261, 108},
      {TableId::T6, "orsreg_1", S::SpaiGmres, 0.3, 1.1e2, 11025, {22, 38}, 11120, 61},
      {TableId::T6, "orsreg_1", S::LuGmres, 0.0, 1.0e0, 330910, {1}, 133634, 9},
      {TableId::T6, "orsreg_1", S::PlainGmres, 0.0, 7.0e3, 0, {107, 150, 95}, {}, {}},
      {TableId::T6, "sherman4", S::SpaiGmres, 0.5, 1.6e3, 1385, {67, 73}, 1386, 140},
      {TableId::T6, "sherman4", S::SpaiGmres, 0.3, 5.0e2, 8499, {35, 39}, 8496, 74},
      {TableId::T6, "sherman4", S::LuGmres, 0.0, 1.0e0, 14211, {1}, 14211, 5},
      {TableId::T6, "sherman4", S::PlainGmres, 0.0, 3.1e3, 0, {85, 93}, {}, {}},
  };
  return rows;
}

inline std::vector<const TableRow*> rows_for(TableId t) {
  std::vector<const TableRow*> out;
  for (const auto& r : reference_rows())
    if (r.table == t) out.push_back(&r);
  return out;
}

// Refinement configuration used for a golden-table row: beta = 8,
// alpha = ceil(n / beta), identity initial pattern, u_g = u_p = u, RCM for LU.
inline IrConfig config_for(const TableRow& row) {
  const TableSetup s = setup_for(row.table);
  IrConfig cfg;
  cfg.uf = s.uf;
  cfg.u = s.u;
  cfg.ur = s.ur;
  cfg.ug = s.u;
  cfg.up = s.u;
  cfg.tau = s.tau;
  cfg.solver = row.solver;
  cfg.spai.eps = row.eps > 0.0 ? row.eps : 0.3;
  cfg.spai.beta = 8;
  cfg.spai.threads = 0;
  cfg.lu.ordering = Ordering::Rcm;
  return cfg;
}

// |computed - ref| within half a unit of the second significant digit of ref.
inline bool matches_two_figures(double computed, double ref) {
  if (ref == 0.0) return computed == 0.0;
  const double unit = std::pow(10.0, std::floor(std::log10(std::fabs(ref))) - 1.0);
  return std::fabs(computed - ref) <= 0.5 * unit * (1.0 + 1e-9);
}

inline bool within_relative(double computed, double ref, double band) {
  return std::fabs(computed - ref) <= band * std::fabs(ref);
}

}  // namespace spai_ir::experiments
