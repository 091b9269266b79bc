#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "spai_ir/matrix_market.hpp"
#include "spai_ir/tables.hpp"

using namespace spai_ir;
namespace ex = spai_ir::experiments;

TEST(Protocol, RightHandSideHasEqualComponentsAndUnitNorm) {
  for (std::size_t n : {1u, 37u, 2205u}) {
    const Vector b = ex::equal_rhs(n);
    EXPECT_NEAR(dense::norm2(b), 1.0, 1e-12);
    for (double v : b) EXPECT_EQ(v, b[0]);
  }
}

TEST(Protocol, DefaultTau) {
  EXPECT_EQ(ex::default_tau(kSingle), 1e-4);
  EXPECT_EQ(ex::default_tau(kDouble), 1e-8);
}

TEST(Manifest, NineMatricesAndTableRows) {
  EXPECT_EQ(ex::manifest().size(), 9u);
  EXPECT_EQ(ex::find_matrix("cage5")->n, 37u);
  EXPECT_EQ(ex::find_matrix("cage5")->nnz, 233u);
  EXPECT_EQ(ex::find_matrix("nope"), nullptr);
  EXPECT_EQ(ex::rows_for(ex::TableId::T4).size(), 16u);
  EXPECT_EQ(ex::rows_for(ex::TableId::T5).size(), 20u);
  EXPECT_EQ(ex::rows_for(ex::TableId::T6).size(), 20u);
  for (const auto& r : ex::reference_rows()) {
    EXPECT_NE(ex::find_matrix(r.matrix), nullptr) << r.matrix;
    if (r.solver == Solver::SpaiGmres) {
      EXPECT_GT(r.eps, 0.0);
    }
  }
  // The half values carried by t6 rows are the matching t5 numbers.
  for (const auto* r6 : ex::rows_for(ex::TableId::T6)) {
    if (!r6->half_nnz) continue;
    for (const auto* r5 : ex::rows_for(ex::TableId::T5))
      if (r5->matrix == r6->matrix && r5->solver == r6->solver && r5->eps == r6->eps) {
        EXPECT_EQ(*r6->half_nnz, r5->nnz) << r6->matrix;
        EXPECT_EQ(*r6->half_total_iters, r5->total_iters()) << r6->matrix;
      }
  }
}

TEST(Bands, TwoFiguresAndRelative) {
  EXPECT_TRUE(ex::matches_two_figures(1.24e6, 1.2e6));
  EXPECT_TRUE(ex::matches_two_figures(1.15e6, 1.2e6));
  EXPECT_FALSE(ex::matches_two_figures(1.26e6, 1.2e6));
  EXPECT_TRUE(ex::matches_two_figures(7.549, 7.5));
  EXPECT_FALSE(ex::matches_two_figures(7.6, 7.5));
  EXPECT_TRUE(ex::within_relative(1140 * 1.15, 1140, 0.15));
  EXPECT_FALSE(ex::within_relative(1140 * 1.16, 1140, 0.15));
  EXPECT_TRUE(ex::close_to_larger(75, 100, 0.25));
  EXPECT_FALSE(ex::close_to_larger(74, 100, 0.25));
}

TEST(ConfigFor, UsesTablePrecisions) {
  const auto* row = ex::rows_for(ex::TableId::T5)[0];
  const IrConfig c = ex::config_for(*row);
  EXPECT_EQ(c.uf, kHalf);
  EXPECT_EQ(c.u, kSingle);
  EXPECT_EQ(c.ur, kDouble);
  EXPECT_EQ(c.ug, kSingle);
  EXPECT_EQ(c.tau, 1e-4);
  EXPECT_EQ(c.spai.eps, 0.5);
  EXPECT_EQ(c.spai.beta, 8u);
  EXPECT_FALSE(c.spai.alpha.has_value());
}

TEST(EvaluateRow, RunsOnASyntheticMatrix) {
  // Checks the plumbing only: bands are against the reference matrix values.
  ex::TableRow row{ex::TableId::T6, "cage5", Solver::SpaiGmres, 0.5, 9.9, 101, {8, 8}, 101, 16};
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < 37; ++i) {
    t.push_back({i, i, 0.6});
    t.push_back({(i + 1) % 37, i, 0.2});
    t.push_back({(i + 5) % 37, i, 0.2});
  }
  const SparseMatrix a = SparseMatrix::from_triplets(37, 37, t);
  const ex::RowOutcome o = ex::evaluate_row(row, a);
  EXPECT_TRUE(o.error.empty()) << o.error;
  EXPECT_TRUE(o.converged);
  ASSERT_TRUE(o.half_nnz.has_value());
  EXPECT_GT(o.kappa_tilde, 0.0);
  const auto j = ex::to_json(o);
  EXPECT_EQ(j["matrix"], "cage5");
}

TEST(Data, Cage5WhenAvailable) {
  const auto p = ex::locate_matrix("cage5");
  if (!p) GTEST_SKIP() << "cage5.mtx not in " << ex::matrix_dir();
  const SparseMatrix a = load_matrix_market_file(p->string());
  EXPECT_EQ(a.rows(), 37u);
  EXPECT_EQ(a.nnz(), 233u);
}
