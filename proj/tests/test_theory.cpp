#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "ridgepath/theory.hpp"

using namespace ridgepath;
using namespace ridgepath::theory;

namespace {

DenseMatrix chol_of(DenseMatrix a, const DenseMatrix& dir, double t) {
  DenseMatrix d = dir;
  d *= t;
  a += d;
  return oracle::naive_cholesky(a);
}

// Central difference of the Cholesky map along `dir`.
DenseMatrix fd_first(const DenseMatrix& a, const DenseMatrix& dir, double h) {
  DenseMatrix r = chol_of(a, dir, h);
  r -= chol_of(a, dir, -h);
  r *= 1.0 / (2.0 * h);
  return r;
}

bool is_lower(const DenseMatrix& x) {
  for (std::size_t j = 0; j < x.cols(); ++j)
    for (std::size_t i = 0; i < j; ++i)
      if (x(i, j) != 0.0) return false;
  return true;
}

double rel(const DenseMatrix& got, const DenseMatrix& want) {
  return oracle::fro_diff(got, want) / want.frobenius_norm();
}

}  // namespace

TEST(KronSum, Examples) {
  EXPECT_EQ(kron_sum_dense(DenseMatrix(1, 1, 3.0)), DenseMatrix(1, 1, 6.0));
  DenseMatrix two = DenseMatrix::identity(4);
  two *= 2.0;
  EXPECT_EQ(kron_sum_dense(DenseMatrix::identity(2)), two);
  const DenseMatrix d = kron_sum_dense(DenseMatrix::from_rows({{1, 0}, {0, 2}}));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(d(i, i), (Vector{2, 3, 3, 4})[i]);
  EXPECT_THROW(kron_sum_dense(DenseMatrix(2, 3)), DimensionMismatch);
}

TEST(KronSum, DenseAgreesWithApply) {
  for (std::size_t m : {1u, 2u, 5u, 9u}) {
    const DenseMatrix x = oracle::random_matrix(m, m, m);
    const Vector v = oracle::random_vector(m * m, m + 1);
    const Vector a = oracle::naive_matvec(kron_sum_dense(x), v);
    const Vector b = kron_sum_apply(x, v);
    EXPECT_LE(oracle::vec_diff(a, b), 1e-12 * (1 + oracle::vec_norm(a)));
  }
}

TEST(KronSum, SolveInvertsAndIsNotTheCholeskyDerivative) {
  const DenseMatrix a = random_spd(5, 1);
  const DenseMatrix l = oracle::naive_cholesky(a);
  const DenseMatrix delta = random_symmetric(5, 2);
  const DenseMatrix x = kron_sum_solve(l, delta);
  const Vector back = kron_sum_apply(l, vec(x));
  EXPECT_LE(oracle::vec_diff(back, vec(delta)), 1e-10);
  // The Kronecker-sum solution is symmetric, the true derivative is lower-triangular.
  EXPECT_LE(symmetry_defect(x), 1e-10);
  const DenseMatrix g = dC(a, delta);
  EXPECT_TRUE(is_lower(g));
  EXPECT_GT(oracle::fro_diff(x, g), 1e-3);
  EXPECT_LE(rel(g, fd_first(a, delta, 1e-5)), 1e-5);

  DenseMatrix half = DenseMatrix::identity(3);
  half *= 0.5;
  EXPECT_LE(oracle::fro_diff(kron_sum_solve(DenseMatrix::identity(3), DenseMatrix::identity(3)), half),
            1e-15);
}

TEST(FirstDerivative, Examples) {
  EXPECT_DOUBLE_EQ(dC(DenseMatrix(1, 1, 4.0), DenseMatrix(1, 1, 1.0))(0, 0), 0.25);
  DenseMatrix half = DenseMatrix::identity(3);
  half *= 0.5;
  EXPECT_EQ(dC(DenseMatrix::identity(3), DenseMatrix::identity(3)), half);
  EXPECT_THROW(dC(DenseMatrix::identity(2), DenseMatrix::from_rows({{0, 1}, {0, 0}})), NotSymmetric);
  EXPECT_THROW(dC(DenseMatrix::identity(33), DenseMatrix::identity(33)), InvalidArgument);
}

TEST(FirstDerivative, ResidualAndFiniteDifference) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const std::size_t m = 3 + 2 * s;
    const DenseMatrix a = random_spd(m, s);
    const DenseMatrix delta = random_symmetric(m, s + 10);
    const DenseMatrix l = oracle::naive_cholesky(a);
    const DenseMatrix g = dC(a, delta);
    ASSERT_TRUE(is_lower(g));
    DenseMatrix resid = oracle::naive_mul(g, oracle::naive_transpose(l));
    resid += oracle::naive_mul(l, oracle::naive_transpose(g));
    EXPECT_LE(oracle::fro_diff(resid, delta), 1e-10);
    EXPECT_LE(rel(g, fd_first(a, delta, 1e-5)), 1e-5);
    EXPECT_EQ(dC_vec(a, vec(delta)), vec(g));
  }
}

TEST(HigherDerivatives, ScalarClosedForms) {
  // C(a) = sqrt(a): C'' = -a^(-3/2) / 4, C''' = 3 a^(-5/2) / 8.
  const DenseMatrix a(1, 1, 4.0);
  const DenseMatrix one(1, 1, 1.0);
  EXPECT_NEAR(d2C(a, one, one)(0, 0), -1.0 / 32.0, 1e-15);
  EXPECT_NEAR(d3C(a, one, one, one)(0, 0), 3.0 / 256.0, 1e-15);
  const DenseMatrix two(1, 1, 2.0);
  EXPECT_NEAR(d2C(a, two, one)(0, 0), -2.0 / 32.0, 1e-15);
}

TEST(HigherDerivatives, SecondIsSymmetricAndMatchesDifference) {
  const DenseMatrix a = random_spd(6, 3);
  const DenseMatrix e1 = random_symmetric(6, 4);
  const DenseMatrix e2 = random_symmetric(6, 5);
  const DenseMatrix h12 = d2C(a, e1, e2);
  EXPECT_LE(oracle::fro_diff(h12, d2C(a, e2, e1)), 1e-13);
  EXPECT_TRUE(is_lower(h12));
  // d/dt dC(A + t e2, e1)
  const double h = 1e-5;
  DenseMatrix ap = a, am = a, s = e2;
  s *= h;
  ap += s;
  am -= s;
  DenseMatrix fd = dC(ap, e1);
  fd -= dC(am, e1);
  fd *= 1.0 / (2 * h);
  EXPECT_LE(rel(h12, fd), 1e-5);
  EXPECT_EQ(d2C_vec(a, vec(e1), vec(e2)), vec(h12));
}

TEST(HigherDerivatives, ThirdMatchesDifferenceAndIsSymmetric) {
  const DenseMatrix a = random_spd(5, 6);
  const DenseMatrix e1 = random_symmetric(5, 7);
  const DenseMatrix e2 = random_symmetric(5, 8);
  const DenseMatrix e3 = random_symmetric(5, 9);
  const DenseMatrix t = d3C(a, e1, e2, e3);
  EXPECT_LE(oracle::fro_diff(t, d3C(a, e3, e1, e2)), 1e-12);
  EXPECT_LE(oracle::fro_diff(t, d3C(a, e2, e3, e1)), 1e-12);
  const double h = 1e-4;
  DenseMatrix ap = a, am = a, s = e3;
  s *= h;
  ap += s;
  am -= s;
  DenseMatrix fd = d2C(ap, e1, e2);
  fd -= d2C(am, e1, e2);
  fd *= 1.0 / (2 * h);
  EXPECT_LE(rel(t, fd), 1e-3);
  EXPECT_EQ(d3C_vec(a, vec(e1), vec(e2), vec(e3)), vec(t));
}

TEST(Taylor, ErrorIsCubic) {
  const DenseMatrix a = random_spd(8, 11);
  const TaylorModel t = taylor_model(a, 1.0);
  EXPECT_EQ(taylor_eval(t, 1.0).matrix(), cholesky_shifted(a, 1.0).matrix());
  std::vector<double> errs;
  const std::vector<double> steps{0.2, 0.1, 0.05, 0.025};
  for (double dl : steps) {
    DenseMatrix shifted = a;
    shifted.add_diagonal(1.0 + dl);
    errs.push_back(oracle::fro_diff(taylor_eval(t, 1.0 + dl).matrix(), oracle::naive_cholesky(shifted)));
  }
  for (std::size_t i = 1; i < steps.size(); ++i) {
    const double slope = std::log(errs[i - 1] / errs[i]) / std::log(steps[i - 1] / steps[i]);
    EXPECT_GE(slope, 2.7);
    EXPECT_LE(slope, 3.3);
  }
}

TEST(Remainder, ScalarClosedForm) {
  for (double a0 : {0.5, 1.0, 4.0}) {
    for (double s : {0.0, 0.3, 2.0}) {
      const RemainderTerms t = remainder_terms(DenseMatrix(1, 1, a0), s);
      const double l = std::sqrt(a0 + s);
      EXPECT_NEAR(t.norm_minv, 1 / (2 * l), 1e-14);
      EXPECT_NEAR(t.norm_minv_e, 1 / (2 * l * l), 1e-14);
      EXPECT_NEAR(t.norm_minv_vi, 1 / (2 * l), 1e-14);
      EXPECT_NEAR(t.value, 3.0 / (16.0 * std::pow(a0 + s, 2.5)), 1e-13);
    }
  }
  EXPECT_NEAR(remainder_R(DenseMatrix(1, 1, 1.0), 0.5, 1.5), 3.0 / (16.0 * std::pow(1.5, 2.5)),
              1e-13);
}

TEST(Remainder, DiagonalInverseNorm) {
  // Off-diagonal directions gain 1/(sqrt2 l_j), diagonal ones 1/(2 l_i).
  const DenseMatrix a = DenseMatrix::from_rows({{1, 0, 0}, {0, 4, 0}, {0, 0, 9}});
  const RemainderTerms t = remainder_terms(a, 0.0);
  EXPECT_NEAR(t.norm_minv, 1.0 / std::sqrt(2.0), 1e-12);
  const double g1 = std::sqrt(0.25 + 1.0 / 16 + 1.0 / 36);
  EXPECT_NEAR(t.norm_minv_vi, g1, 1e-14);
}

TEST(Remainder, NormsAgreeWithPowerIteration) {
  const DenseMatrix op = oracle::random_matrix(12, 9, 3);
  EXPECT_NEAR(operator_norm(op, 3), power_norm(op), 1e-9 * power_norm(op));
  EXPECT_EQ(power_norm(DenseMatrix(3, 3)), 0.0);
}

TEST(Remainder, DecreasingInShiftAndMonotoneInInterval) {
  const DenseMatrix a = random_spd(6, 12);
  double prev = INFINITY;
  for (double s : lin_space(0.0, 3.0, 13)) {
    const double v = remainder_terms(a, s).value;
    EXPECT_LT(v, prev);
    prev = v;
  }
  const double wide = remainder_R(a, 0.2, 2.0);
  const double narrow = remainder_R(a, 0.5, 2.0);
  EXPECT_GE(wide, narrow);
  EXPECT_GE(remainder_R(a, 0.5, 3.0), narrow * (1 - 1e-12));
}

TEST(Remainder, GridRefinementWithinFivePercent) {
  const DenseMatrix a = random_spd(5, 13, 0.1);
  const double coarse = remainder_R(a, 0.5, 1.5);
  const double fine = remainder_R(a, 0.5, 1.5, 64);
  EXPECT_LE(std::abs(coarse - fine), 0.05 * fine);
  EXPECT_THROW(remainder_R(a, 0.5, 1.5, 1), InvalidArgument);
}

TEST(MainBound, HoldsOnRandomSpd) {
  for (std::uint64_t s = 0; s < 4; ++s) {
    const DenseMatrix a = random_spd(4 + s, 100 + s);
    const auto reports = check_main_bound(a, BoundConfig{});
    ASSERT_EQ(reports.size(), 21u);
    for (const auto& r : reports) {
      EXPECT_TRUE(r.satisfied) << "lambda=" << r.lambda << " lhs=" << r.lhs << " rhs=" << r.rhs;
      EXPECT_GT(r.rhs, 0.0);
      EXPECT_EQ(r.d, (4.0 + s) * (5.0 + s) / 2.0);
    }
  }
}

TEST(MainBound, ReportFieldsAndHypotheses) {
  const DenseMatrix a = random_spd(3, 1);
  BoundConfig cfg;
  cfg.sweep = 1;
  const auto r = check_main_bound(a, cfg);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_DOUBLE_EQ(r[0].lambda, 1.0);
  EXPECT_DOUBLE_EQ(r[0].g, 4.0);
  EXPECT_NEAR(r[0].norm_v_dagger,
              pseudo_inverse_norm(observation_matrix(lin_space(0.75, 1.25, 4), 2)), 1e-15);
  cfg.gamma = 1.5;
  EXPECT_THROW(check_main_bound(a, cfg), HypothesisViolated);
  cfg.gamma = 0.2;
  cfg.w = 0.3;
  EXPECT_THROW(check_main_bound(a, cfg), HypothesisViolated);
  cfg.w = 0.1;
  cfg.degree = 3;
  EXPECT_THROW(check_main_bound(a, cfg), InvalidArgument);
}

TEST(RandomInputs, SpdAndUnitDirection) {
  const DenseMatrix a = random_spd(7, 3);
  EXPECT_LE(symmetry_defect(a), 1e-14);
  for (double ev : oracle::symmetric_eigenvalues(a)) EXPECT_GE(ev, 0.5 - 1e-12);
  EXPECT_NEAR(random_symmetric(7, 4).frobenius_norm(), 1.0, 1e-14);
}

TEST(NormLemmas, RandomDraws) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const std::size_t m = 1 + s % 6;
    const Vector v = oracle::random_vector(m * m, s);
    const DenseMatrix x = unvec(v, m);
    EXPECT_NEAR(oracle::vec_norm(vec(x)), x.frobenius_norm(), 1e-14 * (1 + x.frobenius_norm()));
    EXPECT_LE(operator_norm(kron_sum_dense(x), m), 2.0 * oracle::vec_norm(v) * (1 + 1e-12));
    const double lc = 0.01 + 0.05 * static_cast<double>(s);
    EXPECT_LE(operator_norm(shift_basis_matrix(lc), 1), (lc + 1.0) * (1 + 1e-12));
    const double dl = oracle::random_vector(1, s + 1000)[0];
    EXPECT_LE(oracle::vec_norm(taylor_basis(dl)), 1.0 + dl * dl);
  }
}
