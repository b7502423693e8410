#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "ridgepath/numeric.hpp"
#include "ridgepath/ridge.hpp"

using namespace ridgepath;

namespace {

RidgeProblem random_problem(std::size_t n, std::size_t h, std::uint64_t seed) {
  return assemble(oracle::random_matrix(n, h, seed), oracle::random_vector(n, seed + 100));
}

Vector inverse_oracle(const RidgeProblem& p, double lambda) {
  DenseMatrix a = oracle::naive_gram(p.x);
  for (std::size_t i = 0; i < a.rows(); ++i) a(i, i) += lambda;
  return oracle::naive_matvec(oracle::gauss_jordan_inverse(a),
                              oracle::naive_matvec(oracle::naive_transpose(p.x), p.y));
}

}  // namespace

TEST(Assemble, Examples) {
  const RidgeProblem p = assemble(DenseMatrix::identity(2), Vector{1, 2});
  EXPECT_EQ(p.h, DenseMatrix::identity(2));
  EXPECT_EQ(p.g, (Vector{1, 2}));
  const RidgeProblem q = assemble(DenseMatrix(3, 1, 1.0), Vector{1, 2, 3});
  EXPECT_EQ(q.h(0, 0), 3.0);
  EXPECT_EQ(q.g[0], 6.0);
  EXPECT_THROW(assemble(DenseMatrix(3, 2), Vector{1, 2}), DimensionMismatch);
}

TEST(Assemble, MatchesTripleLoop) {
  const RidgeProblem p = random_problem(10, 4, 1);
  EXPECT_LE(oracle::fro_diff(p.h, oracle::naive_gram(p.x)), 1e-12);
  EXPECT_LE(symmetry_defect(p.h), 1e-12 * p.h.frobenius_norm());
}

TEST(WithIntercept, AppendsOnesColumnLast) {
  const DenseMatrix x = with_intercept(DenseMatrix::from_rows({{2, 3}, {4, 5}}));
  EXPECT_EQ(x, DenseMatrix::from_rows({{2, 3, 1}, {4, 5, 1}}));
}

TEST(SolveExact, Examples) {
  RidgeProblem p = assemble(DenseMatrix::identity(2), Vector{2, 2});
  const Solution s = solve_exact(p, 1.0);
  EXPECT_NEAR(s.theta[0], 1.0, 1e-15);
  EXPECT_NEAR(s.theta[1], 1.0, 1e-15);
  EXPECT_EQ(s.backend, Backend::Chol);
  EXPECT_LE(s.relative_residual, 1e-10);
}

TEST(SolveExact, ShrinksMonotonically) {
  const RidgeProblem p = random_problem(30, 6, 2);
  double prev = INFINITY;
  for (double l : log_space(1e-4, 1e6, 41)) {
    const double n = oracle::vec_norm(solve_exact(p, l).theta);
    EXPECT_LE(n, prev * (1 + 1e-12));
    prev = n;
  }
  EXPECT_LT(oracle::vec_norm(solve_exact(p, 1e6).theta), oracle::vec_norm(solve_exact(p, 1e4).theta));
}

TEST(SolveExact, MatchesGaussJordanOracle) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const RidgeProblem p = random_problem(50, 33, s);
    const Vector want = inverse_oracle(p, 0.3);
    const Solution got = solve_exact(p, 0.3);
    EXPECT_LE(oracle::vec_diff(got.theta, want) / oracle::vec_norm(want), 1e-8);
    EXPECT_LE(got.relative_residual, 1e-10);
  }
}

TEST(SolveExact, LambdaZeroNeedsDefiniteHessian) {
  const RidgeProblem pd = random_problem(10, 3, 3);
  EXPECT_NO_THROW(solve_exact(pd, 0.0));
  const RidgeProblem rank_def = assemble(DenseMatrix(4, 2, 1.0), Vector{1, 2, 3, 4});
  EXPECT_THROW(solve_exact(rank_def, 0.0), NotPositiveDefinite);
  EXPECT_THROW(solve_exact(pd, -1.0), InvalidArgument);
}

TEST(SolveInterp, AtSampleEqualsExact) {
  const RidgeProblem p = random_problem(40, 8, 4);
  const Vector samples{0.1, 0.4, 1.0};
  const InterpModel m = fit(p.h, samples, 2, build_layout(LayoutKind::Recursive, 8, 2));
  for (double l : samples) {
    const Solution a = solve_interp(p, m, l);
    const Solution b = solve_exact(p, l);
    EXPECT_EQ(a.backend, Backend::PIChol);
    EXPECT_LE(oracle::vec_diff(a.theta, b.theta) / oracle::vec_norm(b.theta), 1e-8);
  }
}

TEST(SolveInterp, WindowAccuracy) {
  const RidgeProblem p = assemble(oracle::random_matrix(34, 17, 5), oracle::random_vector(34, 6));
  const InterpModel m = fit(p.h, log_space(0.1, 1.0, 4), 2, build_layout(LayoutKind::RowWise, 17));
  for (double l : log_space(0.1, 1.0, 31)) {
    const Solution a = solve_interp(p, m, l);
    const Solution b = solve_exact(p, l);
    EXPECT_LE(oracle::vec_diff(a.theta, b.theta) / oracle::vec_norm(b.theta), 0.05) << l;
  }
}

TEST(SolveInterp, ExtrapolatedDiagonalCrossingZeroIsSingular) {
  // Scalar problem, L(lambda) = sqrt(1 + lambda). The quadratic fit on [1, 3]
  // is concave and falls below the true factor outside the window, crossing
  // zero far above it.
  const RidgeProblem p = assemble(DenseMatrix(1, 1, 1.0), Vector{1.0});
  const InterpModel m = fit(p.h, Vector{1.0, 2.0, 3.0}, 2, build_layout(LayoutKind::RowWise, 1));
  double lo = 3.0, hi = 3.0;
  while (eval(m, hi)(0, 0) > 0.0) hi *= 2.0;
  ASSERT_LT(hi, 1e6);
  for (int it = 0; it < 200 && std::abs(eval(m, 0.5 * (lo + hi))(0, 0)) >= 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    (eval(m, mid)(0, 0) > 0.0 ? lo : hi) = mid;
  }
  const double root = 0.5 * (lo + hi);
  ASSERT_LT(std::abs(eval(m, root)(0, 0)), 1e-12);
  EXPECT_THROW(solve_interp(p, m, root), SingularInterpolant);
  EXPECT_NO_THROW(solve_interp(p, m, 1.5));
  // Below the window the fitted diagonal stays positive.
  EXPECT_GT(eval(m, 1e-6)(0, 0), 0.0);
}

TEST(SolveSvd, Examples) {
  const RidgeProblem p = assemble(DenseMatrix::identity(2), Vector{4, 6});
  const Solution s = solve_svd(p, 1.0);
  EXPECT_NEAR(s.theta[0], 2.0, 1e-14);
  EXPECT_NEAR(s.theta[1], 3.0, 1e-14);
  EXPECT_EQ(s.backend, Backend::SVD);
  const RidgeProblem sq = assemble(DenseMatrix::from_rows({{2, 1}, {1, 3}}), Vector{1, 2});
  const Solution z = solve_svd(sq, 0.0);
  const Vector want = oracle::naive_matvec(oracle::gauss_jordan_inverse(sq.x), sq.y);
  EXPECT_LE(oracle::vec_diff(z.theta, want), 1e-12);
}

TEST(SolveSvd, AgreesWithExact) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const RidgeProblem p = random_problem(20, 6, s + 10);
    for (double l : {1e-3, 0.1, 10.0}) {
      const Solution a = solve_svd(p, l);
      const Solution b = solve_exact(p, l);
      EXPECT_LE(oracle::vec_diff(a.theta, b.theta) / oracle::vec_norm(b.theta), 1e-8);
    }
  }
}

TEST(SolveSvd, DimensionMismatch) {
  const RidgeProblem p = random_problem(8, 3, 1);
  const SvdFactors f = svd(oracle::random_matrix(8, 4, 2));
  EXPECT_THROW(solve_svd(p, f, p.y, 1.0), DimensionMismatch);
}

TEST(SolveTsvd, FullRankEqualsSvdAndRankDeficient) {
  const RidgeProblem p = random_problem(15, 5, 20);
  const Solution a = solve_tsvd(p, 5, 0.2);
  const Solution b = solve_svd(p, 0.2);
  EXPECT_EQ(a.backend, Backend::TSVD);
  EXPECT_LE(oracle::vec_diff(a.theta, b.theta) / oracle::vec_norm(b.theta), 1e-8);

  // Rank-2 design: truncation at the true rank loses nothing.
  const DenseMatrix x =
      oracle::naive_mul(oracle::random_matrix(15, 2, 1), oracle::random_matrix(2, 5, 2));
  const RidgeProblem r = assemble(x, oracle::random_vector(15, 3));
  const Solution t = solve_tsvd(r, 2, 0.5);
  const Solution f = solve_svd(r, 0.5);
  EXPECT_LE(oracle::vec_diff(t.theta, f.theta) / oracle::vec_norm(f.theta), 1e-8);
  EXPECT_THROW(solve_tsvd(r, 0, 0.5), InvalidRank);
}

TEST(SolveTsvd, RankOneOnDiagonal) {
  const RidgeProblem p = assemble(DenseMatrix::from_rows({{3, 0}, {0, 1}}), Vector{2, 5});
  const Solution s = solve_tsvd(p, 1, 0.5);
  EXPECT_NEAR(s.theta[0], 3.0 * 2.0 / (9.0 + 0.5), 1e-12);
  EXPECT_NEAR(s.theta[1], 0.0, 1e-12);
}

TEST(SolveRsvd, CloseToSvdAtFullRank) {
  const RidgeProblem p = random_problem(40, 8, 30);
  const Solution a = solve_rsvd(p, 6, 2, 3, 9, 0.1);
  EXPECT_EQ(a.backend, Backend::RSVD);
  const Solution b = solve_rsvd(p, 6, 2, 3, 9, 0.1);
  EXPECT_EQ(a.theta, b.theta);
  EXPECT_THROW(solve_rsvd(p, 0, 2, 1, 1, 0.1), InvalidRank);
}
