#include <gtest/gtest.h>

#include <cmath>

#include "spai_ir/analysis.hpp"
#include "spai_ir/report.hpp"
#include "support.hpp"

using namespace spai_ir;
namespace ts = testing_support;

namespace {

// || |A^{-T}| |A^T| ||_2 from an independent dense computation: long-double
// inverse, explicit product, largest eigenvalue of B^T B by Jacobi.
double oracle_cond2_transpose(const SparseMatrix& a) {
  const std::size_t n = a.rows();
  const auto ad = ts::to_ld(a.to_dense());
  ts::LdMatrix inv(n, std::vector<ts::LD>(n));
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<ts::LD> e(n, 0.0L);
    e[j] = 1.0L;
    const auto x = ts::ld_solve(ad, e);
    for (std::size_t i = 0; i < n; ++i) inv[i][j] = x[i];
  }
  // B = |A^{-T}| |A^T|: B(i,j) = sum_k |inv(k,i)| |a(j,k)|
  ts::LdMatrix b(n, std::vector<ts::LD>(n, 0.0L));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) b[i][j] += std::fabs(inv[k][i]) * std::fabs(ad[j][k]);
  ts::LdMatrix btb(n, std::vector<ts::LD>(n, 0.0L));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) btb[i][j] += b[k][i] * b[k][j];
  const auto ev = ts::ld_sym_eigenvalues(btb);
  return static_cast<double>(std::sqrt(*std::max_element(ev.begin(), ev.end())));
}

}  // namespace

TEST(KappaInf, Examples) {
  EXPECT_EQ(kappa_inf(SparseMatrix::identity(5)), 1.0);
  EXPECT_DOUBLE_EQ(kappa_inf(ts::diagonal({1.0, 10.0})), 10.0);
  EXPECT_THROW(kappa_inf(SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}})), Error);
}

TEST(KappaInf, MatchesLongDoubleInverse) {
  const SparseMatrix a = ts::random_diag_dominant(15, 0.3, 2);
  const auto ad = ts::to_ld(a.to_dense());
  ts::LD inv_norm = 0.0L;
  std::vector<ts::LD> row_sums(15, 0.0L);
  for (std::size_t j = 0; j < 15; ++j) {
    std::vector<ts::LD> e(15, 0.0L);
    e[j] = 1.0L;
    const auto x = ts::ld_solve(ad, e);
    for (std::size_t i = 0; i < 15; ++i) row_sums[i] += std::fabs(x[i]);
  }
  for (auto s : row_sums) inv_norm = std::max(inv_norm, s);
  EXPECT_NEAR(kappa_inf(a), static_cast<double>(inv_norm) * a.norm_inf(), 1e-12 * kappa_inf(a));
}

TEST(Cond2Transpose, Examples) {
  EXPECT_NEAR(cond2_transpose(SparseMatrix::identity(4)), 1.0, 1e-12);
  EXPECT_NEAR(cond2_transpose(ts::diagonal({1.0, 10.0})), 1.0, 1e-12);  // diagonal scaling is invisible
}

TEST(Cond2Transpose, MatchesDenseOracleToThreeDigits) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SparseMatrix a = ts::random_diag_dominant(12, 0.4, seed + 40);
    const double ref = oracle_cond2_transpose(a);
    EXPECT_NEAR(cond2_transpose(a), ref, 1e-3 * ref);
  }
  const SparseMatrix c = ts::convection_diffusion(4, 1.5);
  EXPECT_NEAR(cond2_transpose(c), oracle_cond2_transpose(c), 1e-3 * oracle_cond2_transpose(c));
}

TEST(CheckBounds, IdentityIsExact) {
  SpaiParams p;
  p.eps = 0.3;
  const auto pre = build_left_preconditioner(SparseMatrix::identity(6), p);
  const BoundReport r = check_bounds(SparseMatrix::identity(6), pre, p);
  EXPECT_EQ(r.norm_I_minus_PA, 0.0);
  EXPECT_EQ(r.bound_2n_eps, 2 * 6 * 0.3);
  EXPECT_TRUE(r.bound_holds);
  EXPECT_TRUE(r.dist_bound_holds);
  EXPECT_EQ(r.kappa_tilde, 1.0);
  EXPECT_TRUE(r.feasible);
}

TEST(CheckBounds, RandomAgainstDenseProducts) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SparseMatrix a = ts::random_diag_dominant(10, 0.3, seed);
    for (Precision uf : {kHalf, kSingle}) {
      SpaiParams p;
      p.eps = 0.3;
      p.uf = uf;
      const auto pre = build_left_preconditioner(a, p);
      const BoundReport r = check_bounds(a, pre, p);
      // Oracle: ||I - P A||_inf from long-double dense products.
      const auto pd = ts::to_ld(pre.P.to_dense()), ad = ts::to_ld(a.to_dense());
      ts::LD worst = 0.0L;
      for (std::size_t i = 0; i < 10; ++i) {
        ts::LD row = 0.0L;
        for (std::size_t j = 0; j < 10; ++j) {
          ts::LD v = i == j ? 1.0L : 0.0L;
          for (std::size_t k = 0; k < 10; ++k) v -= pd[i][k] * ad[k][j];
          row += std::fabs(v);
        }
        worst = std::max(worst, row);
      }
      EXPECT_NEAR(r.norm_I_minus_PA, static_cast<double>(worst), 1e-12);
      ASSERT_TRUE(r.all_satisfied);
      EXPECT_TRUE(r.bound_holds);
      EXPECT_TRUE(r.dist_bound_holds);
      EXPECT_GT(r.kappa_tilde, 0.0);
      // Every reported quantity is finite and nonnegative.
      for (double v : {r.norm_I_minus_PA, r.bound_2n_eps, r.kappa_tilde, r.estimate, r.dist_to_inverse, r.dist_bound,
                       r.cond2_transpose})
        EXPECT_TRUE(std::isfinite(v) && v >= 0.0);
    }
  }
}

TEST(CheckBounds, JsonHasAllFields) {
  SpaiParams p;
  const SparseMatrix a = ts::convection_diffusion(4);
  const auto j = to_json(check_bounds(a, build_left_preconditioner(a, p), p));
  for (const char* key : {"n", "eps", "norm_I_minus_PA", "bound_2n_eps", "kappa_tilde", "estimate", "dist_to_inverse",
                          "dist_bound", "feasible"})
    EXPECT_TRUE(j.contains(key)) << key;
}

TEST(KappaPreconditioned, LuNearOne) {
  const SparseMatrix a = ts::convection_diffusion(6);
  const LuFactors f = dense_lu(a, kDouble);
  EXPECT_NEAR(kappa_preconditioned(a, f), 1.0, 1e-10);
  const LuFactors h = dense_lu(a, kHalf);
  EXPECT_LT(kappa_preconditioned(a, h), 2.0);
  EXPECT_NEAR(kappa_preconditioned(a, SparseMatrix::identity(36)), kappa_inf(a), 1e-9 * kappa_inf(a));
}
