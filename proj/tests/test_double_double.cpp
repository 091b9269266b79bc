#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "spai_ir/reference.hpp"
#include "support.hpp"

using namespace spai_ir;
using testing_support::LD;

TEST(Eft, TwoSumIsExact) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    // Exponent gap small enough that a + b fits a 64-bit long double significand.
    const double a = u(rng), b = std::ldexp(u(rng), -8);
    double s, e;
    eft::two_sum(a, b, s, e);
    ASSERT_EQ(static_cast<LD>(s) + e, static_cast<LD>(a) + b);
    ASSERT_EQ(s, a + b);
  }
}

TEST(Eft, TwoProdIsExact) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::uint32_t> u;
  for (int i = 0; i < 10000; ++i) {
    // 32-bit integers: the exact product has at most 64 bits.
    const double a = u(rng), b = u(rng);
    double p, e;
    eft::two_prod(a, b, p, e);
    ASSERT_EQ(static_cast<LD>(p) + e, static_cast<LD>(a) * static_cast<LD>(b));
  }
}

TEST(DoubleDouble, ArithmeticBeyondDouble) {
  const DoubleDouble one(1.0), tiny(0x1p-80);
  const DoubleDouble s = one + tiny;
  EXPECT_EQ(s.hi, 1.0);
  EXPECT_EQ(s.lo, 0x1p-80);
  EXPECT_EQ((s - one).to_double(), 0x1p-80);
  const DoubleDouble third = DoubleDouble(1.0) / DoubleDouble(3.0);
  const DoubleDouble back = third * DoubleDouble(3.0);
  EXPECT_LE(std::fabs((back - one).to_double()), 0x1p-104);
  const DoubleDouble r = sqrt(DoubleDouble(2.0));
  EXPECT_LE(std::fabs((r * r - DoubleDouble(2.0)).to_double()), 0x1p-102);
  EXPECT_TRUE(DoubleDouble(1.0) < s);
  EXPECT_EQ(abs(DoubleDouble(-2.0, -0x1p-60)).lo, 0x1p-60);
}

TEST(DoubleDouble, AgreesWithLongDouble) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (int i = 0; i < 5000; ++i) {
    const double a = u(rng), b = u(rng), c = u(rng);
    const DoubleDouble x = (DoubleDouble(a) * DoubleDouble(b) + DoubleDouble(c)) / DoubleDouble(b);
    const LD ref = (static_cast<LD>(a) * b + c) / b;
    const LD got = static_cast<LD>(x.hi) + x.lo;
    ASSERT_LE(std::fabs(got - ref), 4 * std::ldexp(1.0L, -63) * std::fabs(ref));
  }
}

TEST(Accumulator, QuadKeepsCancellingTerms) {
  Accumulator q(kQuad);
  q.add(1.0);
  q.add(1e-20);
  q.add(-1.0);
  EXPECT_EQ(q.value(), 1e-20);
  Accumulator d(kDouble);
  d.add(1.0);
  d.add(1e-20);
  d.add(-1.0);
  EXPECT_EQ(d.value(), 0.0);
}

TEST(Accumulator, HalfRoundsEveryStep) {
  Accumulator h(kHalf);
  h.add(2048.0);
  h.add(1.0);  // 2049 ties to 2048
  h.add(1.0);
  EXPECT_EQ(h.value(), 2048.0);
  Accumulator hp(kHalf);
  hp.add_product(0.1, 0.1);
  EXPECT_EQ(hp.value(), round_scalar(round_scalar(0.1 * 0.1, kHalf), kHalf));
}

TEST(DdResidual, IdentityCancelsExactly) {
  const SparseMatrix i5 = SparseMatrix::identity(5);
  const Vector x{0.1, -2.0, 3e-300, 1e300, 7.0};
  const DdVector r = dd_residual(i5, std::span<const double>(x), x);
  for (const auto& v : r) EXPECT_EQ(v.to_double(), 0.0);
}

TEST(DdSolve, DiagonalSystem) {
  const SparseMatrix a = testing_support::diagonal({2.0, 4.0});
  const DdVector x = dd_solve(a, Vector{2.0, 4.0});
  EXPECT_EQ(x[0].to_double(), 1.0);
  EXPECT_EQ(x[1].to_double(), 1.0);
}

TEST(DdSolve, ResidualAtDoubleDoubleLevel) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SparseMatrix a = testing_support::random_diag_dominant(30, 0.2, seed);
    Vector b(30);
    for (std::size_t i = 0; i < 30; ++i) b[i] = std::sin(static_cast<double>(i + seed));
    const DdVector x = dd_solve(a, b);
    const DdVector r = dd_residual(a, std::span<const DoubleDouble>(x), b);
    EXPECT_LE(norm_inf(r), 0x1p-100 * a.norm_inf() * norm_inf(x));
  }
}

TEST(DdSolve, IllConditionedFallsBackAndStaysAccurate) {
  // Hilbert matrix of order 12: kappa ~ 1e16, past double LU refinement.
  const std::size_t n = 12;
  DenseMatrix<double> h(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h(i, j) = 1.0 / static_cast<double>(i + j + 1);
  const Vector b(n, 1.0);
  const DdVector x = dd_solve(h, b);
  const DdVector rdd = dd_residual(SparseMatrix::from_dense(h), std::span<const DoubleDouble>(x), b);
  EXPECT_LE(norm_inf(rdd), 1e-20 * dense::norm_inf(h) * norm_inf(x));
}
