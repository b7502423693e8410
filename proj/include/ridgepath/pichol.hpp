#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ridgepath/dense_matrix.hpp"
#include "ridgepath/errors.hpp"
#include "ridgepath/linalg.hpp"
#include "ridgepath/numeric.hpp"
#include "ridgepath/parallel.hpp"
#include "ridgepath/trivec.hpp"

namespace ridgepath {

/// Affine change of variable t = (lambda - shift) / scale applied before the
/// monomial basis is evaluated. The identity map gives raw monomials in lambda.
struct PolynomialBasis {
  double shift = 0.0;
  double scale = 1.0;

  double map(double lambda) const noexcept { return (lambda - shift) / scale; }
  bool is_raw() const noexcept { return shift == 0.0 && scale == 1.0; }
};

struct FitOptions {
  /// Keep raw monomials in lambda even when the observation matrix is
  /// badly conditioned.
  bool raw_monomials = false;
  /// Above this condition number the samples are mapped onto [-1, 1].
  double max_condition = 1e8;
  CholeskyOptions cholesky{};
};

struct FitTimings {
  double factorize = 0.0;
  double vec = 0.0;
  double fit = 0.0;
};

/// Fitted per-entry polynomials. Column j of `theta` holds the degree+1
/// coefficients (constant term first, in the basis variable) of the
/// polynomial for vector position j of `layout`.
struct InterpModel {
  std::size_t degree = 0;
  Vector sample_lambdas;
  DenseMatrix theta;
  VecLayout layout;
  /// Condition number of the raw monomial observation matrix.
  double cond_v = 0.0;
  PolynomialBasis basis;
  /// ||T - V Theta||_F and ||T||_F from the fit.
  double residual_fro = 0.0;
  double target_fro = 0.0;
  FitTimings timings;

  std::size_t order() const noexcept { return layout.h(); }
  std::size_t entries() const noexcept { return theta.cols(); }
};

/// The g x (r+1) matrix with rows (1, t_s, ..., t_s^r), t_s = basis.map(lambda_s).
inline DenseMatrix observation_matrix(std::span<const double> lambdas, std::size_t degree,
                                      const PolynomialBasis& basis = {}) {
  DenseMatrix v(lambdas.size(), degree + 1);
  for (std::size_t s = 0; s < lambdas.size(); ++s) {
    const double t = basis.map(lambdas[s]);
    double p = 1.0;
    for (std::size_t k = 0; k <= degree; ++k) {
      v(s, k) = p;
      p *= t;
    }
  }
  return v;
}

inline double condition_number(const DenseMatrix& m) {
  const SvdFactors f = svd(m);
  if (f.sigma.empty()) return 0.0;
  const double lo = f.sigma.back();
  return lo > 0.0 ? f.sigma.front() / lo : std::numeric_limits<double>::infinity();
}

/// Evaluates packed polynomials by Horner's rule: out[j] = sum_k c[j*(r+1)+k] x^k.
/// Exactly r multiplications and r additions per output.
template <class T>
void horner_columns(std::span<const T> coeffs, std::size_t degree, const T& x,
                    std::span<T> out) {
  const std::size_t stride = degree + 1;
  for (std::size_t j = 0; j < out.size(); ++j) {
    const T* c = coeffs.data() + j * stride;
    T acc = c[degree];
    for (std::size_t k = degree; k-- > 0;) acc = acc * x + c[k];
    out[j] = acc;
  }
}

namespace detail {

inline void check_samples(std::span<const double> lambdas, std::size_t degree) {
  if (degree < 1) throw InvalidArgument("polynomial degree must be >= 1");
  if (lambdas.size() <= degree) {
    throw InsufficientSamples("need more than " + std::to_string(degree) + " samples, got " +
                              std::to_string(lambdas.size()));
  }
  for (std::size_t s = 0; s < lambdas.size(); ++s) {
    if (!(lambdas[s] > 0.0) || !std::isfinite(lambdas[s])) {
      throw InvalidArgument("sample lambdas must be finite and > 0");
    }
    for (std::size_t t = 0; t < s; ++t) {
      if (lambdas[t] == lambdas[s]) {
        throw DegenerateSamples("duplicate sample lambda " + std::to_string(lambdas[s]));
      }
    }
  }
}

inline PolynomialBasis choose_basis(std::span<const double> lambdas, std::size_t degree,
                                    const FitOptions& options, double& raw_condition) {
  raw_condition = condition_number(observation_matrix(lambdas, degree));
  if (options.raw_monomials || raw_condition <= options.max_condition) return {};
  const auto [lo, hi] = std::minmax_element(lambdas.begin(), lambdas.end());
  return {0.5 * (*lo + *hi), 0.5 * (*hi - *lo)};
}

}  // namespace detail

/// Least-squares coefficients Theta = (V^T V)^{-1} V^T T for every target
/// column. `targets` is D x g: column s holds the g-th sample's values.
/// The normal-equation matrix is factored with `cholesky`.
inline DenseMatrix fit_polynomials(const DenseMatrix& v, const DenseMatrix& targets) {
  const std::size_t g = v.rows();
  const std::size_t p = v.cols();
  if (targets.cols() != g) throw DimensionMismatch("targets must have one column per sample");
  const CholeskyFactor normal = cholesky(gram(v));
  // proj = (V^T V)^{-1} V^T, a p x g matrix.
  DenseMatrix proj(p, g);
  for (std::size_t s = 0; s < g; ++s) {
    Vector rhs(p);
    for (std::size_t k = 0; k < p; ++k) rhs[k] = v(s, k);
    const Vector col = solve_chol(normal, rhs);
    for (std::size_t k = 0; k < p; ++k) proj(k, s) = col[k];
  }
  const std::size_t d = targets.rows();
  DenseMatrix theta(p, d);
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(d, 64));
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t begin = d * c / chunks;
    const std::size_t end = d * (c + 1) / chunks;
    double* th = theta.data();
    for (std::size_t s = 0; s < g; ++s) {
      const double* ts = targets.data() + s * d;
      for (std::size_t j = begin; j < end; ++j) {
        const double t = ts[j];
        for (std::size_t k = 0; k < p; ++k) th[k + j * p] += proj(k, s) * t;
      }
    }
  });
  return theta;
}

/// Fits the interpolation model from already computed exact factors. Each
/// factor must carry the lambda it was computed at.
inline InterpModel fit_from_factors(std::span<const CholeskyFactor> factors, std::size_t degree,
                                    const VecLayout& layout, const FitOptions& options = {}) {
  Vector lambdas;
  lambdas.reserve(factors.size());
  for (const auto& f : factors) {
    if (!f.lambda()) throw InvalidArgument("fit needs exact factors tagged with lambda");
    lambdas.push_back(*f.lambda());
  }
  detail::check_samples(lambdas, degree);

  InterpModel model;
  model.degree = degree;
  model.sample_lambdas = lambdas;
  model.layout = layout;

  Stopwatch sw;
  const TargetMatrix targets = bulk_gather(factors, layout);
  model.timings.vec = sw.seconds();

  sw.restart();
  model.basis = detail::choose_basis(lambdas, degree, options, model.cond_v);
  const DenseMatrix v = observation_matrix(lambdas, degree, model.basis);
  model.theta = fit_polynomials(v, targets.transposed());

  // Fit residual ||T - V Theta||_F.
  double res = 0.0;
  double tot = 0.0;
  const std::size_t p = degree + 1;
  for (std::size_t s = 0; s < lambdas.size(); ++s) {
    const auto row = targets.row(s);
    for (std::size_t j = 0; j < row.size(); ++j) {
      double fitted = 0.0;
      for (std::size_t k = 0; k < p; ++k) fitted += v(s, k) * model.theta(k, j);
      const double e = row[j] - fitted;
      res += e * e;
      tot += row[j] * row[j];
    }
  }
  model.residual_fro = std::sqrt(res);
  model.target_fro = std::sqrt(tot);
  model.timings.fit = sw.seconds();
  return model;
}

/// Factors H + lambda_s I at every sample, vectorizes the factors through
/// `layout`, and fits one degree-r polynomial per lower-triangular entry.
inline InterpModel fit(const DenseMatrix& h, std::span<const double> sample_lambdas,
                       std::size_t degree, const VecLayout& layout,
                       const FitOptions& options = {}) {
  detail::check_samples(sample_lambdas, degree);
  if (!h.is_square() || h.rows() != layout.h()) {
    throw DimensionMismatch("Hessian order does not match layout order");
  }
  Vector lambdas(sample_lambdas.begin(), sample_lambdas.end());
  std::sort(lambdas.begin(), lambdas.end());

  Stopwatch sw;
  std::vector<CholeskyFactor> factors(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t s) {
    factors[s] = cholesky_shifted(h, lambdas[s], options.cholesky);
  });
  const double factorize = sw.seconds();

  InterpModel model = fit_from_factors(factors, degree, layout, options);
  model.timings.factorize = factorize;
  return model;
}

/// Interpolated vectorized factor at lambda (before unvectorization).
inline Vector eval_vector(const InterpModel& model, double lambda) {
  const std::size_t d = model.entries();
  const std::size_t p = model.degree + 1;
  const double t = model.basis.map(lambda);
  Vector out(d);
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(d, 64));
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t begin = d * c / chunks;
    const std::size_t end = d * (c + 1) / chunks;
    horner_columns<double>(
        std::span<const double>(model.theta.data() + begin * p, (end - begin) * p),
        model.degree, t, std::span<double>(out.data() + begin, end - begin));
  });
  return out;
}

/// Interpolated Cholesky factor at lambda. Extrapolation is allowed; the
/// result is not checked for a positive diagonal.
inline CholeskyFactor eval(const InterpModel& model, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be > 0");
  return unvectorize(eval_vector(model, lambda), model.layout);
}

/// ||interp - exact||_F divided by the range of the exact factor's
/// lower-triangular entries. A zero range (order 1) falls back to the largest
/// absolute entry.
inline double factor_nrmse(const CholeskyFactor& interp, const CholeskyFactor& exact) {
  if (interp.dim() != exact.dim()) throw DimensionMismatch("factor orders differ");
  const std::size_t n = exact.dim();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double err = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j; i < n; ++i) {
      const double e = exact(i, j);
      lo = std::min(lo, e);
      hi = std::max(hi, e);
      const double d = interp(i, j) - e;
      err += d * d;
    }
  double range = hi - lo;
  if (range == 0.0) range = std::max(std::abs(hi), std::abs(lo));
  if (range == 0.0) range = 1.0;
  return std::sqrt(err) / range;
}

struct FitDiagnostics {
  std::vector<std::pair<double, double>> nrmse_per_lambda;
  double max_nrmse = 0.0;
  double residual_fro = 0.0;
};

/// Compares interpolated factors against exact factorizations of
/// H + lambda I at every requested lambda.
inline FitDiagnostics diagnostics(const InterpModel& model, const DenseMatrix& h,
                                  std::span<const double> dense_lambdas,
                                  const CholeskyOptions& chol = {}) {
  if (dense_lambdas.empty()) throw InvalidArgument("diagnostics needs at least one lambda");
  for (double l : dense_lambdas) {
    if (!(l > 0.0)) throw InvalidArgument("diagnostic lambdas must be > 0");
  }
  FitDiagnostics out;
  out.residual_fro = model.residual_fro;
  out.nrmse_per_lambda.resize(dense_lambdas.size());
  parallel_for(dense_lambdas.size(), [&](std::size_t i) {
    const double l = dense_lambdas[i];
    const CholeskyFactor exact = cholesky_shifted(h, l, chol);
    out.nrmse_per_lambda[i] = {l, factor_nrmse(eval(model, l), exact)};
  });
  for (const auto& [l, e] : out.nrmse_per_lambda) out.max_nrmse = std::max(out.max_nrmse, e);
  return out;
}

}  // namespace ridgepath
