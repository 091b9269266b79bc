#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "spai_ir/sparse.hpp"
#include "support.hpp"

using namespace spai_ir;
using testing_support::random_sparse;

TEST(IndexSet, SortedUniqueAndQueries) {
  const IndexSet s{5, 1, 3, 1};
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0], 1u);
  EXPECT_EQ(s[2], 5u);
  EXPECT_TRUE(s.contains(3));
  EXPECT_FALSE(s.contains(2));
  EXPECT_EQ(s.position(5), 2u);
  EXPECT_EQ(s.position(4), s.size());
  EXPECT_EQ(s.united(IndexSet{2, 5, 9}), (IndexSet{1, 2, 3, 5, 9}));
  EXPECT_EQ(IndexSet::range(3), (IndexSet{0, 1, 2}));
}

TEST(SparseMatrix, FromTripletsSumsDuplicatesAndDropsZeros) {
  const SparseMatrix a = SparseMatrix::from_triplets(3, 3, {{0, 0, 1.0}, {0, 0, 2.0}, {1, 2, 5.0}, {2, 1, 0.0},
                                                             {2, 2, 1.0}, {2, 2, -1.0}});
  EXPECT_EQ(a.nnz(), 2u);
  EXPECT_EQ(a.at(0, 0), 3.0);
  EXPECT_EQ(a.at(1, 2), 5.0);
  EXPECT_EQ(a.at(2, 2), 0.0);
  EXPECT_THROW(SparseMatrix::from_triplets(2, 2, {{2, 0, 1.0}}), Error);
}

TEST(SparseMatrix, CscInvariantsValidated) {
  EXPECT_THROW(SparseMatrix::from_csc(2, 2, {0, 1, 1}, {1, 0}, {1.0, 2.0}), Error);  // col_ptr end
  EXPECT_THROW(SparseMatrix::from_csc(2, 1, {0, 2}, {1, 0}, {1.0, 2.0}), Error);     // unsorted rows
  EXPECT_THROW(SparseMatrix::from_csc(2, 1, {0, 2}, {0, 0}, {1.0, 2.0}), Error);     // duplicate row
  const SparseMatrix ok = SparseMatrix::from_csc(2, 1, {0, 2}, {0, 1}, {1.0, 0.0});
  EXPECT_EQ(ok.nnz(), 1u);
}

TEST(SparseMatrix, TransposeDenseRoundTrip) {
  const SparseMatrix a = random_sparse(7, 5, 0.4, 9);
  const SparseMatrix at = a.transpose();
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(a.at(i, j), at.at(j, i));
  EXPECT_EQ(SparseMatrix::from_dense(a.to_dense()), a);
  EXPECT_EQ(at.transpose(), a);
}

TEST(Shadow, Examples) {
  EXPECT_EQ(shadow(SparseMatrix::identity(6), IndexSet{3}), IndexSet{3});
  const SparseMatrix a = SparseMatrix::from_triplets(4, 2, {{0, 1, 1.0}, {3, 1, 2.0}, {1, 0, 1.0}});
  EXPECT_EQ(shadow(a, IndexSet{1}), (IndexSet{0, 3}));
}

TEST(Shadow, MatchesDenseScan) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const SparseMatrix a = random_sparse(6, 6, 0.3, seed);
    const DenseMatrix<double> d = a.to_dense();
    for (const IndexSet& j : {IndexSet{1, 3}, IndexSet{0}, IndexSet{2, 4, 5}, IndexSet{}}) {
      std::set<std::size_t> expect;
      for (std::size_t c : j)
        for (std::size_t r = 0; r < 6; ++r)
          if (d(r, c) != 0.0) expect.insert(r);
      EXPECT_EQ(shadow(a, j), IndexSet(std::vector<std::size_t>(expect.begin(), expect.end())));
    }
  }
}

TEST(ExtractSubmatrix, Examples) {
  const auto one = extract_submatrix(SparseMatrix::identity(5), IndexSet{2}, IndexSet{2});
  ASSERT_EQ(one.rows(), 1u);
  EXPECT_EQ(one(0, 0), 1.0);
  const SparseMatrix a = random_sparse(8, 8, 0.35, 4);
  const auto full = extract_submatrix(a, IndexSet::range(8), IndexSet::range(8));
  const auto d = a.to_dense();
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(full(i, j), d(i, j));
}

TEST(ExtractSubmatrix, SpotEntries) {
  const SparseMatrix a = random_sparse(8, 8, 0.35, 12);
  const IndexSet rows{0, 2, 3, 7}, cols{1, 4, 6};
  const auto sub = extract_submatrix(a, rows, cols);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) EXPECT_EQ(sub(r, c), a.at(rows[r], cols[c]));
}

TEST(ColumnScale, Examples) {
  const auto id = column_scale(SparseMatrix::identity(4));
  EXPECT_EQ(id.scaled, SparseMatrix::identity(4));
  for (double d : id.scaling.d) EXPECT_EQ(d, 1.0);

  const SparseMatrix a = SparseMatrix::from_triplets(3, 2, {{0, 0, -4.0}, {2, 0, 3.0}, {1, 1, 0.3}});
  const auto s = column_scale(a);
  EXPECT_EQ(s.scaled.at(0, 0), -1.0);
  EXPECT_EQ(s.scaling.d[0], 0.25);
  double mx = 0.0;
  for (double v : s.scaled.col_values(1)) mx = std::max(mx, std::fabs(v));
  EXPECT_EQ(mx, 1.0);
  EXPECT_THROW(column_scale(SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}})), Error);
}

TEST(ColumnScale, UnscaleReconstructs) {
  const SparseMatrix a = random_sparse(20, 20, 0.3, 5).map_values([](double v) { return v * 1e3; });
  std::vector<Triplet> t;
  for (std::size_t j = 0; j < 20; ++j) t.push_back({j, j, 1.0 + static_cast<double>(j)});
  const SparseMatrix b = SparseMatrix::from_triplets(20, 20, t);
  for (const SparseMatrix& m : {a, b}) {
    bool has_zero_col = false;
    for (std::size_t j = 0; j < m.cols(); ++j) has_zero_col = has_zero_col || m.col_rows(j).empty();
    if (has_zero_col) continue;
    const auto s = column_scale(m);
    const SparseMatrix back = column_unscale(s.scaled, s.scaling);
    for (std::size_t j = 0; j < m.cols(); ++j)
      for (std::size_t p = 0; p < m.col_rows(j).size(); ++p) {
        const double ref = m.col_values(j)[p];
        EXPECT_LE(std::fabs(back.col_values(j)[p] - ref), 2 * 0x1p-53 * std::fabs(ref));
      }
  }
}

TEST(Matvec, Examples) {
  const Vector x{1.5, -2.0, 3.25};
  for (Precision p : {kHalf, kSingle, kDouble, kQuad}) EXPECT_EQ(matvec(SparseMatrix::identity(3), x, p).y, x);
  const SparseMatrix a = random_sparse(6, 6, 0.5, 2);
  for (std::size_t k = 0; k < 6; ++k) {
    Vector e(6, 0.0);
    e[k] = 1.0;
    const Vector y = matvec(a, e, kDouble).y;
    for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(y[i], a.at(i, k));
  }
}

TEST(Matvec, HalfWithinSummationBound) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SparseMatrix a = random_sparse(10, 10, 0.5, seed).rounded(kHalf);
    Vector x(10);
    for (double& v : x) v = round_scalar(u(rng), kHalf);
    const Vector yd = matvec(a, x, kDouble).y;
    const Vector yh = matvec(a, x, kHalf).y;
    const double bound = 2.0 * 10 * 0x1p-11 * a.norm_inf() * dense::norm_inf(x);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_LE(std::fabs(yh[i] - yd[i]), bound);
  }
}

TEST(Matvec, OverflowFlagged) {
  const SparseMatrix a = SparseMatrix::from_triplets(1, 2, {{0, 0, 60000.0}, {0, 1, 60000.0}});
  const auto r = matvec(a, Vector{1.0, 1.0}, kHalf);
  EXPECT_TRUE(r.overflow);
  EXPECT_TRUE(std::isinf(r.y[0]));
  EXPECT_FALSE(matvec(a, Vector{1.0, 1.0}, kSingle).overflow);
}

TEST(Residual, QuadRecoversCancellation) {
  // b - A x where the exact residual is far below double resolution of b.
  const SparseMatrix a = SparseMatrix::from_triplets(1, 2, {{0, 0, 1.0}, {0, 1, 1.0}});
  const Vector x{0x1p-60, 1.0};  // tiny term enters first
  const Vector b{1.0};
  EXPECT_EQ(residual(a, x, b, kQuad)[0], -0x1p-60);
  EXPECT_EQ(residual(a, x, b, kDouble)[0], 0.0);
}

TEST(SparseMultiply, MatchesDense) {
  const SparseMatrix a = random_sparse(5, 6, 0.5, 21), b = random_sparse(6, 4, 0.5, 22);
  const auto c = multiply(a, b).to_dense();
  const auto ref = dense::multiply(a.to_dense(), b.to_dense());
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(c(i, j), ref(i, j), 1e-14);
}
