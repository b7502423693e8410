#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ridgepath/dense_matrix.hpp"
#include "ridgepath/errors.hpp"
#include "ridgepath/linalg.hpp"
#include "ridgepath/numeric.hpp"
#include "ridgepath/parallel.hpp"
#include "ridgepath/pichol.hpp"
#include "ridgepath/trivec.hpp"

// Derivatives of the Cholesky map A -> C(A) and the error bounds built on
// them. Dense operators of order m^2 (or m(m+1)/2) limit this to m <= 32.

namespace ridgepath::theory {

inline constexpr std::size_t kMaxOrder = 32;

inline void require_order(std::size_t m) {
  if (m < 1 || m > kMaxOrder) {
    throw InvalidArgument("theory routines support orders 1.." + std::to_string(kMaxOrder) +
                          ", got " + std::to_string(m));
  }
}

/// Column-stacking vec.
inline Vector vec(const DenseMatrix& x) { return x.storage(); }

inline DenseMatrix unvec(std::span<const double> v, std::size_t m) {
  if (v.size() != m * m) throw DimensionMismatch("vector length is not m^2");
  return DenseMatrix(m, m, Vector(v.begin(), v.end()));
}

// ---------------------------------------------------------------------------
// Kronecker sum I (x) X + X (x) I
// ---------------------------------------------------------------------------

inline DenseMatrix kron_sum_dense(const DenseMatrix& x) {
  if (!x.is_square()) throw DimensionMismatch("Kronecker sum needs a square matrix");
  const std::size_t m = x.rows();
  DenseMatrix k(m * m, m * m);
  // Block (a, b) of I (x) X is delta_ab X; of X (x) I it is x_ab I.
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          double v = 0.0;
          if (a == b) v += x(i, j);
          if (i == j) v += x(a, b);
          k(a * m + i, b * m + j) = v;
        }
  return k;
}

/// Kronecker-sum action on vec(B): vec(X B + B X^T).
inline Vector kron_sum_apply(const DenseMatrix& x, std::span<const double> v) {
  if (!x.is_square()) throw DimensionMismatch("Kronecker sum needs a square matrix");
  const std::size_t m = x.rows();
  const DenseMatrix b = unvec(v, m);
  DenseMatrix r = matmul(x, b);
  r += matmul(b, x.transpose());
  return vec(r);
}

namespace detail {

// Dense LU with partial pivoting; only used for the literal Kronecker-sum solve.
inline Vector lu_solve(DenseMatrix a, Vector b) {
  const std::size_t n = a.rows();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (a(piv, k) == 0.0) throw NotPositiveDefinite("singular Kronecker sum");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a(k, j) * b[j];
    b[k] = s / a(k, k);
  }
  return b;
}

inline void require_symmetric(const DenseMatrix& d, const char* what) {
  if (!d.is_square()) throw DimensionMismatch(std::string(what) + " must be square");
  if (symmetry_defect(d) > 1e-10 * std::max(1.0, d.frobenius_norm())) {
    throw NotSymmetric(std::string(what) + " must be symmetric");
  }
}

}  // namespace detail

/// Solution of the full Kronecker-sum system: unvec(inv(I (x) L + L (x) I) vec(Delta)).
/// For symmetric Delta the result is symmetric, not lower-triangular, so it
/// is not the derivative of the Cholesky map; kept for comparison.
inline DenseMatrix kron_sum_solve(const DenseMatrix& l, const DenseMatrix& delta) {
  const std::size_t m = l.rows();
  require_order(m);
  if (delta.rows() != m || delta.cols() != m) throw DimensionMismatch("Delta order mismatch");
  return unvec(detail::lu_solve(kron_sum_dense(l), vec(delta)), m);
}

// ---------------------------------------------------------------------------
// The linearized Cholesky operator Gamma -> Gamma L^T + L Gamma^T
// ---------------------------------------------------------------------------

/// X Y^T + Y X^T (symmetric in its arguments).
inline DenseMatrix sym_cross(const DenseMatrix& x, const DenseMatrix& y) {
  DenseMatrix r = matmul(x, y.transpose());
  r += r.transpose();
  return r;
}

/// Unique lower-triangular Gamma with Gamma L^T + L Gamma^T = Delta, for
/// symmetric Delta: Gamma = L low(L^-1 Delta L^-T), where low() keeps the
/// strict lower part and half the diagonal.
inline DenseMatrix lower_lyap_solve(const DenseMatrix& l, const DenseMatrix& delta) {
  const std::size_t m = l.rows();
  if (delta.rows() != m || delta.cols() != m) throw DimensionMismatch("Delta order mismatch");
  DenseMatrix y = delta;
  for (std::size_t j = 0; j < m; ++j) solve_lower_inplace(l, y.col(j));
  DenseMatrix w = y.transpose();
  for (std::size_t j = 0; j < m; ++j) solve_lower_inplace(l, w.col(j));
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < j; ++i) w(i, j) = 0.0;
    w(j, j) *= 0.5;
  }
  DenseMatrix g(m, m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = j; i < m; ++i) {
      double s = 0.0;
      for (std::size_t k = j; k <= i; ++k) s += l(i, k) * w(k, j);
      g(i, j) = s;
    }
  return g;
}

/// Directional derivative of the Cholesky map at A in direction Delta.
inline DenseMatrix dC(const DenseMatrix& a, const DenseMatrix& delta) {
  require_order(a.rows());
  detail::require_symmetric(delta, "Delta");
  const CholeskyFactor l = cholesky(a);
  return lower_lyap_solve(l.matrix(), delta);
}

/// Second derivative: -Minv(sym_cross(G1, G2)) with Gk = dC(A, Dk).
inline DenseMatrix d2C(const DenseMatrix& a, const DenseMatrix& d1, const DenseMatrix& d2) {
  require_order(a.rows());
  detail::require_symmetric(d1, "delta1");
  detail::require_symmetric(d2, "delta2");
  const DenseMatrix l = cholesky(a).matrix();
  const DenseMatrix g1 = lower_lyap_solve(l, d1);
  const DenseMatrix g2 = lower_lyap_solve(l, d2);
  DenseMatrix r = lower_lyap_solve(l, sym_cross(g1, g2));
  r *= -1.0;
  return r;
}

/// Third derivative: Minv of the sum of the three cross terms pairing one
/// first derivative with the second derivative of the other two.
inline DenseMatrix d3C(const DenseMatrix& a, const DenseMatrix& d1, const DenseMatrix& d2,
                       const DenseMatrix& d3) {
  require_order(a.rows());
  detail::require_symmetric(d1, "delta1");
  detail::require_symmetric(d2, "delta2");
  detail::require_symmetric(d3, "delta3");
  const DenseMatrix l = cholesky(a).matrix();
  const DenseMatrix g1 = lower_lyap_solve(l, d1);
  const DenseMatrix g2 = lower_lyap_solve(l, d2);
  const DenseMatrix g3 = lower_lyap_solve(l, d3);
  const DenseMatrix h12 = lower_lyap_solve(l, sym_cross(g1, g2));
  const DenseMatrix h13 = lower_lyap_solve(l, sym_cross(g1, g3));
  const DenseMatrix h23 = lower_lyap_solve(l, sym_cross(g2, g3));
  DenseMatrix s = sym_cross(g3, h12);
  s += sym_cross(g2, h13);
  s += sym_cross(g1, h23);
  return lower_lyap_solve(l, s);
}

/// Vectorized forms over length-m^2 column-stacked inputs.
inline Vector dC_vec(const DenseMatrix& a, std::span<const double> d1) {
  return vec(dC(a, unvec(d1, a.rows())));
}
inline Vector d2C_vec(const DenseMatrix& a, std::span<const double> d1,
                      std::span<const double> d2) {
  const std::size_t m = a.rows();
  return vec(d2C(a, unvec(d1, m), unvec(d2, m)));
}
inline Vector d3C_vec(const DenseMatrix& a, std::span<const double> d1, std::span<const double> d2,
                      std::span<const double> d3) {
  const std::size_t m = a.rows();
  return vec(d3C(a, unvec(d1, m), unvec(d2, m), unvec(d3, m)));
}

// ---------------------------------------------------------------------------
// Taylor model of lambda -> C(A + lambda I)
// ---------------------------------------------------------------------------

struct TaylorModel {
  double lambda_c = 0.0;
  CholeskyFactor l_c;
  /// vec of the first derivative Minv(I).
  Vector first_term;
  /// vec of Minv(sym_cross(G1, G1)); the quadratic coefficient is -1/2 of it.
  Vector second_term;
};

inline TaylorModel taylor_model(const DenseMatrix& a, double lambda_c) {
  require_order(a.rows());
  const std::size_t m = a.rows();
  TaylorModel t;
  t.lambda_c = lambda_c;
  t.l_c = cholesky_shifted(a, lambda_c);
  const DenseMatrix g1 = lower_lyap_solve(t.l_c.matrix(), DenseMatrix::identity(m));
  t.first_term = vec(g1);
  t.second_term = vec(lower_lyap_solve(t.l_c.matrix(), sym_cross(g1, g1)));
  return t;
}

/// L_c + dl G1 - dl^2 / 2 Minv(sym_cross(G1, G1)), dl = lambda - lambda_c.
inline CholeskyFactor taylor_eval(const TaylorModel& t, double lambda) {
  const double dl = lambda - t.lambda_c;
  DenseMatrix out = t.l_c.matrix();
  double* o = out.data();
  for (std::size_t k = 0; k < out.size(); ++k) {
    o[k] += dl * t.first_term[k] - 0.5 * dl * dl * t.second_term[k];
  }
  if (dl == 0.0) return t.l_c;
  return CholeskyFactor(std::move(out));
}

inline CholeskyFactor taylor_eval(const DenseMatrix& a, double lambda_c, double lambda) {
  return taylor_eval(taylor_model(a, lambda_c), lambda);
}

// ---------------------------------------------------------------------------
// Operator norms and the remainder functional
// ---------------------------------------------------------------------------

inline constexpr std::size_t kSvdNormMaxOrder = 16;

/// Spectral norm by power iteration on A^T A.
inline double power_norm(const DenseMatrix& a, int max_iterations = 20000, double tol = 1e-13) {
  const std::size_t n = a.cols();
  if (n == 0 || a.rows() == 0) return 0.0;
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.01 * static_cast<double>(i % 7);
  double est = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    const double nv = norm2(v);
    if (nv == 0.0) return 0.0;
    for (double& x : v) x /= nv;
    const Vector av = matvec(a, v);
    v = matvec_t(a, av);
    const double next = std::sqrt(norm2(v));
    if (std::abs(next - est) <= tol * next) return next;
    est = next;
  }
  return est;
}

/// Spectral norm: Jacobi SVD for operators of small matrices, power
/// iteration when the underlying order exceeds kSvdNormMaxOrder.
inline double operator_norm(const DenseMatrix& op, std::size_t order) {
  if (order > kSvdNormMaxOrder) return power_norm(op);
  const SvdFactors f = svd(op);
  return f.sigma.empty() ? 0.0 : f.sigma.front();
}

namespace detail {

// Orthonormal coordinates: lower-triangular matrices by their entries (i >= j);
// symmetric matrices by the diagonal and sqrt(2) times the strict lower part.
inline std::size_t tri_count(std::size_t m) { return m * (m + 1) / 2; }

inline Vector lower_coords(const DenseMatrix& x) {
  const std::size_t m = x.rows();
  Vector c;
  c.reserve(tri_count(m));
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = j; i < m; ++i) c.push_back(x(i, j));
  return c;
}

inline DenseMatrix lower_basis(std::size_t m, std::size_t i, std::size_t j) {
  DenseMatrix e(m, m);
  e(i, j) = 1.0;
  return e;
}

inline DenseMatrix symmetric_basis(std::size_t m, std::size_t i, std::size_t j) {
  DenseMatrix e(m, m);
  if (i == j) {
    e(i, i) = 1.0;
  } else {
    e(i, j) = e(j, i) = 1.0 / std::sqrt(2.0);
  }
  return e;
}

}  // namespace detail

struct RemainderTerms {
  double shift = 0.0;
  /// ||Minv||: symmetric -> lower-triangular.
  double norm_minv = 0.0;
  /// ||Minv E||: lower -> lower, E = sym_cross(G1, .).
  double norm_minv_e = 0.0;
  /// ||Minv vec(I)|| = ||G1||_F.
  double norm_minv_vi = 0.0;
  double value = 0.0;
};

/// The remainder integrand at shift s, with all norms taken on the spaces
/// the linearized Cholesky operator actually maps between.
inline RemainderTerms remainder_terms(const DenseMatrix& a, double s) {
  const std::size_t m = a.rows();
  require_order(m);
  const DenseMatrix l = cholesky_shifted(a, s).matrix();
  const DenseMatrix g1 = lower_lyap_solve(l, DenseMatrix::identity(m));
  const std::size_t dim = detail::tri_count(m);
  DenseMatrix minv(dim, dim);
  DenseMatrix minv_e(dim, dim);
  std::size_t col = 0;
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = j; i < m; ++i, ++col) {
      const Vector a1 = detail::lower_coords(lower_lyap_solve(l, detail::symmetric_basis(m, i, j)));
      const Vector a2 = detail::lower_coords(
          lower_lyap_solve(l, sym_cross(g1, detail::lower_basis(m, i, j))));
      std::copy(a1.begin(), a1.end(), minv.col(col).begin());
      std::copy(a2.begin(), a2.end(), minv_e.col(col).begin());
    }
  RemainderTerms t;
  t.shift = s;
  t.norm_minv = operator_norm(minv, m);
  t.norm_minv_e = operator_norm(minv_e, m);
  t.norm_minv_vi = g1.frobenius_norm();
  t.value = t.norm_minv_e * t.norm_minv_e * t.norm_minv_vi +
            t.norm_minv * t.norm_minv_e * t.norm_minv_vi * t.norm_minv_vi;
  return t;
}

inline constexpr std::size_t kDefaultRemainderGrid = 33;

/// Shifts at which the remainder is sampled: log-spaced for a positive
/// interval, linear otherwise.
inline Vector remainder_grid(double a, double b, std::size_t grid_n) {
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  if (lo == hi) return {lo};
  return lo > 0.0 ? log_space(lo, hi, grid_n) : lin_space(lo, hi, grid_n);
}

/// Grid maximum of the remainder integrand over [min(a,b), max(a,b)]. This
/// under-estimates the continuous maximum by at most the grid resolution.
inline double remainder_R(const DenseMatrix& a, double lo, double hi,
                          std::size_t grid_n = kDefaultRemainderGrid) {
  if (grid_n < 2) throw InvalidArgument("remainder grid needs at least 2 points");
  const Vector shifts = remainder_grid(lo, hi, grid_n);
  Vector vals(shifts.size());
  parallel_for(shifts.size(), [&](std::size_t i) { vals[i] = remainder_terms(a, shifts[i]).value; });
  return *std::max_element(vals.begin(), vals.end());
}

// ---------------------------------------------------------------------------
// Bound checks
// ---------------------------------------------------------------------------

struct BoundConfig {
  double lambda_c = 1.0;
  double gamma = 0.5;
  double w = 0.25;
  std::size_t samples = 4;
  std::size_t degree = 2;
  /// Evaluation points in [lambda_c - gamma, lambda_c + gamma].
  std::size_t sweep = 21;
  std::size_t remainder_grid = kDefaultRemainderGrid;
};

struct BoundReport {
  double lambda = 0.0;
  double gamma = 0.0;
  double w = 0.0;
  double g = 0.0;
  double d = 0.0;
  double norm_v_dagger = 0.0;
  double r_interval = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
  /// lhs / rhs > 0.9: the bound is close to being violated.
  bool near_tight = false;
};

inline constexpr double kBoundSlack = 1e-9;
inline constexpr double kNearTightRatio = 0.9;

/// ||V^+||_2 = 1 / sigma_min of the raw monomial observation matrix.
inline double pseudo_inverse_norm(const DenseMatrix& v) {
  const SvdFactors f = svd(v);
  const double lo = f.sigma.empty() ? 0.0 : f.sigma.back();
  return lo > 0.0 ? 1.0 / lo : std::numeric_limits<double>::infinity();
}

/// Fits the interpolation model with `samples` equally spaced shifts in
/// [lambda_c - w, lambda_c + w], then compares the RMS factor error with the
/// uniform bound at every sweep point of [lambda_c - gamma, lambda_c + gamma].
inline std::vector<BoundReport> check_main_bound(const DenseMatrix& a, const BoundConfig& cfg) {
  const std::size_t m = a.rows();
  require_order(m);
  if (!(cfg.lambda_c > cfg.gamma && cfg.gamma >= cfg.w && cfg.w > 0.0)) {
    throw HypothesisViolated("need lambda_c > gamma >= w > 0");
  }
  if (cfg.degree != 2) throw InvalidArgument("the bound is stated for quadratic fits");
  if (cfg.samples <= cfg.degree) throw InsufficientSamples("need samples > degree");
  if (cfg.sweep < 1) throw InvalidArgument("sweep needs at least one point");

  const Vector sample_lambdas = lin_space(cfg.lambda_c - cfg.w, cfg.lambda_c + cfg.w, cfg.samples);
  const VecLayout layout = build_layout(LayoutKind::RowWise, m);
  const InterpModel model = fit(a, sample_lambdas, cfg.degree, layout);
  const double v_dag = pseudo_inverse_norm(observation_matrix(sample_lambdas, cfg.degree));
  const double big_d = static_cast<double>(detail::tri_count(m));
  const double r = remainder_R(a, cfg.lambda_c - cfg.gamma, cfg.lambda_c + cfg.gamma,
                               cfg.remainder_grid);
  const double g = static_cast<double>(cfg.samples);
  const double rhs = (std::pow(cfg.gamma, 3) + std::sqrt(g) * std::pow(cfg.w, 3) *
                                                  (1.0 + cfg.gamma * cfg.gamma) *
                                                  (cfg.lambda_c + 1.0) * v_dag) *
                     r / std::sqrt(big_d);

  const Vector sweep = cfg.sweep == 1 ? Vector{cfg.lambda_c}
                                      : lin_space(cfg.lambda_c - cfg.gamma,
                                                  cfg.lambda_c + cfg.gamma, cfg.sweep);
  std::vector<BoundReport> out(sweep.size());
  parallel_for(sweep.size(), [&](std::size_t i) {
    const double lambda = sweep[i];
    const CholeskyFactor exact = cholesky_shifted(a, lambda);
    const CholeskyFactor approx = eval(model, lambda);
    DenseMatrix diff = exact.matrix();
    diff -= approx.matrix();
    BoundReport rep;
    rep.lambda = lambda;
    rep.gamma = cfg.gamma;
    rep.w = cfg.w;
    rep.g = g;
    rep.d = big_d;
    rep.norm_v_dagger = v_dag;
    rep.r_interval = r;
    rep.lhs = diff.frobenius_norm() / std::sqrt(big_d);
    rep.rhs = rhs;
    rep.satisfied = rep.lhs <= rep.rhs * (1.0 + kBoundSlack);
    rep.near_tight = rep.rhs > 0.0 && rep.lhs / rep.rhs > kNearTightRatio;
    out[i] = rep;
  });
  return out;
}

/// Change of basis between quadratic monomials around 0 and around lambda_c,
/// as used by the interpolation stability argument: I + lambda_c * (unit shift).
inline DenseMatrix shift_basis_matrix(double lambda_c) {
  return DenseMatrix::from_rows({{1.0, lambda_c, 0.0}, {0.0, 1.0, lambda_c}, {0.0, 0.0, 1.0}});
}

/// (1, dl, dl^2): the quadratic Taylor basis at offset dl.
inline Vector taylor_basis(double dl) { return {1.0, dl, dl * dl}; }

/// Random SPD test matrix B^T B / m + shift I with Gaussian B.
inline DenseMatrix random_spd(std::size_t m, std::uint64_t seed, double shift = 0.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseMatrix b(m, m);
  for (std::size_t k = 0; k < m * m; ++k) b.data()[k] = normal(rng);
  DenseMatrix a = gram(b);
  a *= 1.0 / static_cast<double>(m);
  a.add_diagonal(shift);
  return a;
}

/// Random symmetric direction with unit Frobenius norm.
inline DenseMatrix random_symmetric(std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseMatrix s(m, m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = j; i < m; ++i) s(i, j) = s(j, i) = normal(rng);
  s *= 1.0 / s.frobenius_norm();
  return s;
}

}  // namespace ridgepath::theory
