#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "ridgepath/dense_matrix.hpp"
#include "ridgepath/errors.hpp"
#include "ridgepath/linalg.hpp"
#include "ridgepath/pichol.hpp"

namespace ridgepath {

enum class Backend { Chol, PIChol, SVD, TSVD, RSVD };

inline std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::Chol: return "chol";
    case Backend::PIChol: return "pichol";
    case Backend::SVD: return "svd";
    case Backend::TSVD: return "tsvd";
    case Backend::RSVD: return "rsvd";
  }
  return "?";
}

/// Design matrix (intercept column already present), targets, and the cached
/// normal-equation pieces H = X^T X and g = X^T y.
struct RidgeProblem {
  DenseMatrix x;
  Vector y;
  DenseMatrix h;
  Vector g;

  std::size_t samples() const noexcept { return x.rows(); }
  std::size_t order() const noexcept { return x.cols(); }
};

/// Copy of `features` with a trailing column of ones.
inline DenseMatrix with_intercept(const DenseMatrix& features) {
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  DenseMatrix x(n, d + 1, 1.0);
  for (std::size_t j = 0; j < d; ++j) {
    auto src = features.col(j);
    auto dst = x.col(j);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return x;
}

inline RidgeProblem assemble(DenseMatrix x, Vector y) {
  if (x.rows() < 1) throw DimensionMismatch("design matrix needs at least one row");
  if (x.cols() < 1) throw DimensionMismatch("design matrix needs at least one column");
  if (y.size() != x.rows()) {
    throw DimensionMismatch("y has " + std::to_string(y.size()) + " entries, X has " +
                            std::to_string(x.rows()) + " rows");
  }
  RidgeProblem p;
  p.h = gram(x);
  p.g = matvec_t(x, y);
  p.x = std::move(x);
  p.y = std::move(y);
  return p;
}

struct Solution {
  Vector theta;
  double lambda = 0.0;
  Backend backend = Backend::Chol;
  /// ||(H + lambda I) theta - g|| / ||g||.
  double relative_residual = 0.0;
};

/// ||(H + lambda I) theta - g|| / ||g|| (absolute when g = 0).
inline double normal_residual(const RidgeProblem& p, std::span<const double> theta, double lambda) {
  Vector r = matvec(p.h, theta);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += lambda * theta[i] - p.g[i];
  const double gn = norm2(p.g);
  return gn > 0.0 ? norm2(r) / gn : norm2(r);
}

namespace detail {

inline Solution make_solution(const RidgeProblem& p, Vector theta, double lambda, Backend b) {
  for (double t : theta) {
    if (!std::isfinite(t)) throw NonFiniteValue("solution has non-finite entries");
  }
  Solution s;
  s.relative_residual = normal_residual(p, theta, lambda);
  s.theta = std::move(theta);
  s.lambda = lambda;
  s.backend = b;
  return s;
}

inline void check_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("lambda must be finite and >= 0");
  }
}

}  // namespace detail

/// Solves (H + lambda I) theta = g through an exact Cholesky factorization.
inline Solution solve_exact(const RidgeProblem& p, double lambda, const CholeskyOptions& opts = {}) {
  detail::check_lambda(lambda);
  const CholeskyFactor l = cholesky_shifted(p.h, lambda, opts);
  return detail::make_solution(p, solve_chol(l, p.g), lambda, Backend::Chol);
}

/// Solves with an already computed factor of H + lambda I.
inline Solution solve_with_factor(const RidgeProblem& p, const CholeskyFactor& l, double lambda,
                                  Backend backend) {
  const DenseMatrix& m = l.matrix();
  for (std::size_t i = 0; i < l.dim(); ++i) {
    if (!(std::abs(m(i, i)) >= 1e-12)) {
      throw SingularInterpolant("factor diagonal entry " + std::to_string(i) + " is " +
                                std::to_string(m(i, i)));
    }
  }
  return detail::make_solution(p, solve_chol(l, p.g), lambda, backend);
}

inline Solution solve_interp(const RidgeProblem& p, const InterpModel& model, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be > 0");
  if (model.order() != p.order()) throw DimensionMismatch("model order != problem order");
  return solve_with_factor(p, eval(model, lambda), lambda, Backend::PIChol);
}

/// theta = V diag(sigma_i / (sigma_i^2 + lambda)) U^T y.
inline Solution solve_svd(const RidgeProblem& p, const SvdFactors& f, std::span<const double> y,
                          double lambda) {
  detail::check_lambda(lambda);
  if (f.u.rows() != y.size() || f.v.rows() != p.order() || f.u.cols() != f.rank() ||
      f.v.cols() != f.rank()) {
    throw DimensionMismatch("SVD factors do not match the problem");
  }
  Vector coef = matvec_t(f.u, y);
  for (std::size_t i = 0; i < coef.size(); ++i) {
    const double s = f.sigma[i];
    const double den = s * s + lambda;
    // zero singular value at lambda 0: pseudo-inverse convention
    coef[i] = den == 0.0 ? 0.0 : coef[i] * s / den;
  }
  Backend b = Backend::SVD;
  if (f.randomized) b = Backend::RSVD;
  else if (f.truncated) b = Backend::TSVD;
  return detail::make_solution(p, matvec(f.v, coef), lambda, b);
}

inline Solution solve_svd(const RidgeProblem& p, double lambda) {
  return solve_svd(p, svd(p.x), p.y, lambda);
}

inline Solution solve_tsvd(const RidgeProblem& p, std::size_t k, double lambda) {
  return solve_svd(p, truncated_svd(p.x, k), p.y, lambda);
}

inline Solution solve_rsvd(const RidgeProblem& p, std::size_t k, std::size_t oversample,
                           std::size_t power_iters, std::uint64_t seed, double lambda) {
  return solve_svd(p, randomized_svd(p.x, k, oversample, power_iters, seed), p.y, lambda);
}

}  // namespace ridgepath
