#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ridgepath/dense_matrix.hpp"
#include "ridgepath/errors.hpp"
#include "ridgepath/parallel.hpp"

namespace ridgepath {

// ---------------------------------------------------------------------------
// Products
// ---------------------------------------------------------------------------

/// C = A * B.
inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("matmul: inner dimensions differ");
  DenseMatrix c(a.rows(), b.cols());
  const std::size_t m = a.rows();
  parallel_for(b.cols(), [&](std::size_t j) {
    double* cj = c.data() + j * m;
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double bpj = b(p, j);
      if (bpj == 0.0) continue;
      const double* ap = a.data() + p * m;
      for (std::size_t i = 0; i < m; ++i) cj[i] += ap[i] * bpj;
    }
  });
  return c;
}

/// C = A^T * B.
inline DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) throw DimensionMismatch("matmul_tn: row counts differ");
  DenseMatrix c(a.cols(), b.cols());
  parallel_for(b.cols(), [&](std::size_t j) {
    for (std::size_t i = 0; i < a.cols(); ++i) c(i, j) = dot(a.col(i), b.col(j));
  });
  return c;
}

/// Gram matrix X^T X. Each entry is a single column dot product, so the
/// result is exactly symmetric.
inline DenseMatrix gram(const DenseMatrix& x) {
  const std::size_t h = x.cols();
  DenseMatrix g(h, h);
  parallel_for(h, [&](std::size_t j) {
    for (std::size_t i = j; i < h; ++i) g(i, j) = dot(x.col(i), x.col(j));
  });
  for (std::size_t j = 0; j < h; ++j)
    for (std::size_t i = j + 1; i < h; ++i) g(j, i) = g(i, j);
  return g;
}

/// y = A x.
inline Vector matvec(const DenseMatrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw DimensionMismatch("matvec: length mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t j = 0; j < a.cols(); ++j) {
    const double xj = x[j];
    const double* aj = a.data() + j * a.rows();
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] += aj[i] * xj;
  }
  return y;
}

/// y = A^T x.
inline Vector matvec_t(const DenseMatrix& a, std::span<const double> x) {
  if (a.rows() != x.size()) throw DimensionMismatch("matvec_t: length mismatch");
  Vector y(a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) y[j] = dot(a.col(j), x);
  return y;
}

inline double symmetry_defect(const DenseMatrix& a) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = j + 1; i < a.rows(); ++i) {
      const double d = a(i, j) - a(j, i);
      s += 2.0 * d * d;
    }
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Cholesky
// ---------------------------------------------------------------------------

/// Lower-triangular Cholesky factor. `lambda` records the shift at which an
/// exact factor was computed; interpolated factors leave it empty.
class CholeskyFactor {
 public:
  CholeskyFactor() = default;
  explicit CholeskyFactor(DenseMatrix lower, std::optional<double> lambda = std::nullopt)
      : l_(std::move(lower)), lambda_(lambda) {
    if (!l_.is_square()) throw DimensionMismatch("Cholesky factor must be square");
  }

  std::size_t dim() const noexcept { return l_.rows(); }
  const DenseMatrix& matrix() const noexcept { return l_; }
  DenseMatrix& matrix() noexcept { return l_; }
  std::optional<double> lambda() const noexcept { return lambda_; }
  bool interpolated() const noexcept { return !lambda_.has_value(); }

  double operator()(std::size_t i, std::size_t j) const noexcept { return l_(i, j); }

  /// L * L^T.
  DenseMatrix reconstruct() const {
    const std::size_t n = dim();
    DenseMatrix a(n, n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = j; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k <= j; ++k) s += l_(i, k) * l_(j, k);
        a(i, j) = s;
        a(j, i) = s;
      }
    return a;
  }

 private:
  DenseMatrix l_;
  std::optional<double> lambda_;
};

struct CholeskyOptions {
  /// Matrices larger than this use the blocked right-looking variant.
  std::size_t block_size = 64;
  /// Relative symmetry tolerance, measured against ||A||_F.
  double symmetry_tol = 1e-10;
};

namespace detail {

[[noreturn]] inline void throw_pivot(std::size_t k, double value) {
  throw NotPositiveDefinite("pivot " + std::to_string(k) + " is " + std::to_string(value));
}

// Right-looking unblocked factorization of the trailing-free diagonal block
// a[k0:k0+kb, k0:k0+kb] (lower part only), leading dimension n.
inline void potrf_unblocked(double* a, std::size_t n, std::size_t k0, std::size_t kb) {
  for (std::size_t k = k0; k < k0 + kb; ++k) {
    double* ck = a + k * n;
    const double d = ck[k];
    if (!(d > 0.0) || !std::isfinite(d)) throw_pivot(k, d);
    const double lkk = std::sqrt(d);
    ck[k] = lkk;
    const double inv = 1.0 / lkk;
    for (std::size_t i = k + 1; i < k0 + kb; ++i) ck[i] *= inv;
    for (std::size_t j = k + 1; j < k0 + kb; ++j) {
      const double c = ck[j];
      double* cj = a + j * n;
      for (std::size_t i = j; i < k0 + kb; ++i) cj[i] -= ck[i] * c;
    }
  }
}

// Panel solve: A21 := A21 * L11^{-T} for rows [r0, n), columns [k0, k0+kb).
inline void trsm_panel(double* a, std::size_t n, std::size_t k0, std::size_t kb, std::size_t r0) {
  for (std::size_t j = k0; j < k0 + kb; ++j) {
    double* cj = a + j * n;
    for (std::size_t p = k0; p < j; ++p) {
      const double c = a[j + p * n];
      const double* cp = a + p * n;
      for (std::size_t i = r0; i < n; ++i) cj[i] -= cp[i] * c;
    }
    const double inv = 1.0 / cj[j];
    for (std::size_t i = r0; i < n; ++i) cj[i] *= inv;
  }
}

// Trailing update A22 -= A21 A21^T (lower part), columns [r0, n).
// Four target columns share each load of a panel column.
inline void syrk_trailing(double* a, std::size_t n, std::size_t k0, std::size_t kb,
                          std::size_t r0) {
  const std::size_t ncols = n - r0;
  const std::size_t groups = (ncols + 3) / 4;
  parallel_for(groups, [&](std::size_t grp) {
    const std::size_t j = r0 + grp * 4;
    const std::size_t jw = std::min<std::size_t>(4, n - j);
    // Small triangle inside the column group.
    for (std::size_t jj = 0; jj < jw; ++jj) {
      double* cj = a + (j + jj) * n;
      for (std::size_t i = j + jj; i < j + jw; ++i) {
        double s = 0.0;
        for (std::size_t p = k0; p < k0 + kb; ++p) s += a[i + p * n] * a[j + jj + p * n];
        cj[i] -= s;
      }
    }
    const std::size_t i0 = j + jw;
    if (i0 >= n) return;
    const std::size_t len = n - i0;
    if (jw == 4) {
      double* d0 = a + j * n + i0;
      double* d1 = a + (j + 1) * n + i0;
      double* d2 = a + (j + 2) * n + i0;
      double* d3 = a + (j + 3) * n + i0;
      for (std::size_t p = k0; p < k0 + kb; ++p) {
        const double* src = a + p * n;
        const double c0 = src[j], c1 = src[j + 1], c2 = src[j + 2], c3 = src[j + 3];
        const double* s = src + i0;
        for (std::size_t i = 0; i < len; ++i) {
          const double v = s[i];
          d0[i] -= c0 * v;
          d1[i] -= c1 * v;
          d2[i] -= c2 * v;
          d3[i] -= c3 * v;
        }
      }
    } else {
      for (std::size_t jj = 0; jj < jw; ++jj) {
        double* d = a + (j + jj) * n + i0;
        for (std::size_t p = k0; p < k0 + kb; ++p) {
          const double* s = a + p * n + i0;
          const double c = a[j + jj + p * n];
          for (std::size_t i = 0; i < len; ++i) d[i] -= c * s[i];
        }
      }
    }
  });
}

}  // namespace detail

/// Cholesky factorization A = L L^T of a symmetric positive-definite matrix.
///
/// Throws NotSymmetric when ||A - A^T||_F exceeds options.symmetry_tol * ||A||_F
/// and NotPositiveDefinite when a pivot is not strictly positive.
inline CholeskyFactor cholesky(const DenseMatrix& a, const CholeskyOptions& options = {}) {
  if (!a.is_square()) throw DimensionMismatch("cholesky: matrix is not square");
  const double fro = a.frobenius_norm();
  if (symmetry_defect(a) > options.symmetry_tol * fro) {
    throw NotSymmetric("||A - A^T||_F exceeds tolerance");
  }
  const std::size_t n = a.rows();
  DenseMatrix l = a;
  double* p = l.data();
  const std::size_t nb = std::max<std::size_t>(1, options.block_size);
  if (n <= nb) {
    detail::potrf_unblocked(p, n, 0, n);
  } else {
    for (std::size_t k0 = 0; k0 < n; k0 += nb) {
      const std::size_t kb = std::min(nb, n - k0);
      detail::potrf_unblocked(p, n, k0, kb);
      if (k0 + kb < n) {
        detail::trsm_panel(p, n, k0, kb, k0 + kb);
        detail::syrk_trailing(p, n, k0, kb, k0 + kb);
      }
    }
  }
  for (std::size_t j = 1; j < n; ++j)
    for (std::size_t i = 0; i < j; ++i) l(i, j) = 0.0;
  return CholeskyFactor(std::move(l));
}

/// Factor of A + shift * I, tagged with the shift.
inline CholeskyFactor cholesky_shifted(const DenseMatrix& a, double shift,
                                       const CholeskyOptions& options = {}) {
  DenseMatrix s = a;
  s.add_diagonal(shift);
  CholeskyFactor f = cholesky(s, options);
  return CholeskyFactor(std::move(f.matrix()), shift);
}

/// Solves L w = b in place (forward substitution).
inline void solve_lower_inplace(const DenseMatrix& l, std::span<double> b) {
  const std::size_t n = l.rows();
  for (std::size_t j = 0; j < n; ++j) {
    const double* cj = l.data() + j * n;
    b[j] /= cj[j];
    const double w = b[j];
    for (std::size_t i = j + 1; i < n; ++i) b[i] -= cj[i] * w;
  }
}

/// Solves L^T x = b in place (back substitution).
inline void solve_lower_transpose_inplace(const DenseMatrix& l, std::span<double> b) {
  const std::size_t n = l.rows();
  for (std::size_t jj = n; jj-- > 0;) {
    const double* cj = l.data() + jj * n;
    double s = b[jj];
    for (std::size_t i = jj + 1; i < n; ++i) s -= cj[i] * b[i];
    b[jj] = s / cj[jj];
  }
}

/// Solves L L^T theta = g.
inline Vector solve_chol(const CholeskyFactor& l, std::span<const double> g) {
  if (l.dim() != g.size()) {
    throw DimensionMismatch("solve_chol: factor order " + std::to_string(l.dim()) +
                            " != rhs length " + std::to_string(g.size()));
  }
  Vector x(g.begin(), g.end());
  solve_lower_inplace(l.matrix(), x);
  solve_lower_transpose_inplace(l.matrix(), x);
  return x;
}

// ---------------------------------------------------------------------------
// Orthonormalization
// ---------------------------------------------------------------------------

/// Orthonormalizes the columns of q in place with two-pass modified
/// Gram-Schmidt. Columns that vanish are replaced by the first canonical
/// basis vector that survives projection, so the result always has
/// orthonormal columns (requires cols <= rows).
inline void orthonormalize_columns(DenseMatrix& q) {
  const std::size_t m = q.rows();
  const std::size_t k = q.cols();
  if (k > m) throw DimensionMismatch("orthonormalize: more columns than rows");
  std::size_t next_unit = 0;
  for (std::size_t j = 0; j < k; ++j) {
    auto cj = q.col(j);
    double original = norm2(cj);
    for (int attempt = 0;; ++attempt) {
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t p = 0; p < j; ++p) {
          auto cp = q.col(p);
          const double r = dot(cp, cj);
          for (std::size_t i = 0; i < m; ++i) cj[i] -= r * cp[i];
        }
      }
      const double nrm = norm2(cj);
      if (nrm > 1e-10 * original && nrm > 0.0) {
        for (double& v : cj) v /= nrm;
        break;
      }
      if (next_unit >= m || attempt > static_cast<int>(m)) {
        throw ConvergenceFailure("orthonormalize: cannot complete basis");
      }
      std::fill(cj.begin(), cj.end(), 0.0);
      cj[next_unit++] = 1.0;
      original = 1.0;
    }
  }
}

// ---------------------------------------------------------------------------
// Singular value decomposition
// ---------------------------------------------------------------------------

/// Thin SVD X = U diag(sigma) V^T with sigma non-increasing.
struct SvdFactors {
  DenseMatrix u;
  Vector sigma;
  DenseMatrix v;
  bool truncated = false;
  bool randomized = false;

  std::size_t rank() const noexcept { return sigma.size(); }

  DenseMatrix reconstruct() const {
    DenseMatrix us = u;
    for (std::size_t j = 0; j < sigma.size(); ++j)
      for (double& x : us.col(j)) x *= sigma[j];
    return matmul(us, v.transpose());
  }
};

struct SvdOptions {
  int max_sweeps = 100;
};

namespace detail {

// One-sided Jacobi for m >= n.
inline SvdFactors jacobi_svd_tall(const DenseMatrix& x, const SvdOptions& options) {
  const std::size_t m = x.rows();
  const std::size_t n = x.cols();
  DenseMatrix w = x;
  DenseMatrix v = DenseMatrix::identity(n);
  const double tol = 4.0 * std::numeric_limits<double>::epsilon();
  bool converged = n < 2;
  for (int sweep = 0; sweep < options.max_sweeps && !converged; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double* wp = w.data() + p * m;
        double* wq = w.data() + q * m;
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += wp[i] * wp[i];
          beta += wq[i] * wq[i];
          gamma += wp[i] * wq[i];
        }
        if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double a = wp[i], b = wq[i];
          wp[i] = c * a - s * b;
          wq[i] = s * a + c * b;
        }
        double* vp = v.data() + p * n;
        double* vq = v.data() + q * n;
        for (std::size_t i = 0; i < n; ++i) {
          const double a = vp[i], b = vq[i];
          vp[i] = c * a - s * b;
          vq[i] = s * a + c * b;
        }
      }
    }
    converged = !rotated;
  }
  if (!converged) throw ConvergenceFailure("Jacobi SVD hit the sweep cap");

  Vector sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = norm2(w.col(j));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

  SvdFactors out;
  out.sigma.resize(n);
  out.u = DenseMatrix(m, n);
  out.v = DenseMatrix(n, n);
  std::vector<std::size_t> zero_cols;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.sigma[k] = sigma[j];
    std::copy(v.col(j).begin(), v.col(j).end(), out.v.col(k).begin());
    if (sigma[j] > 0.0 && std::isfinite(1.0 / sigma[j])) {
      auto dst = out.u.col(k);
      const auto src = w.col(j);
      for (std::size_t i = 0; i < m; ++i) dst[i] = src[i] / sigma[j];
    } else {
      out.sigma[k] = 0.0;
      zero_cols.push_back(k);
    }
  }
  if (!zero_cols.empty()) {
    // Zero singular values leave U columns free; complete to an orthonormal set.
    orthonormalize_columns(out.u);
  }
  return out;
}

}  // namespace detail

/// Full (thin) SVD by one-sided Jacobi rotations.
inline SvdFactors svd(const DenseMatrix& x, const SvdOptions& options = {}) {
  if (!x.all_finite()) throw NonFiniteValue("svd: input has NaN/Inf");
  if (x.rows() >= x.cols()) return detail::jacobi_svd_tall(x, options);
  SvdFactors t = detail::jacobi_svd_tall(x.transpose(), options);
  std::swap(t.u, t.v);
  return t;
}

namespace detail {

inline SvdFactors take_leading(SvdFactors f, std::size_t k) {
  SvdFactors out;
  out.sigma.assign(f.sigma.begin(), f.sigma.begin() + static_cast<std::ptrdiff_t>(k));
  out.u = DenseMatrix(f.u.rows(), k,
                      std::vector<double>(f.u.data(), f.u.data() + f.u.rows() * k));
  out.v = DenseMatrix(f.v.rows(), k,
                      std::vector<double>(f.v.data(), f.v.data() + f.v.rows() * k));
  return out;
}

inline DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> data(rows * cols);
  for (double& v : data) v = dist(rng);
  return DenseMatrix(rows, cols, std::move(data));
}

// Rayleigh-Ritz: thin SVD of X restricted to the column span of q (orthonormal).
inline SvdFactors ritz_factors(const DenseMatrix& x, const DenseMatrix& q) {
  SvdFactors small = svd(matmul(x, q));
  SvdFactors out;
  out.u = std::move(small.u);
  out.sigma = std::move(small.sigma);
  out.v = matmul(q, small.v);
  return out;
}

}  // namespace detail

struct TruncatedSvdOptions {
  int max_iterations = 2000;
  /// Convergence when every leading Ritz triplet has ||X^T u - sigma v|| <= tol * sigma_1.
  double tol = 1e-13;
};

/// Leading-k singular triplets by block subspace iteration with
/// Rayleigh-Ritz extraction. Falls back to the full SVD when the working
/// block would cover the whole column space.
inline SvdFactors truncated_svd(const DenseMatrix& x, std::size_t k,
                                const TruncatedSvdOptions& options = {}) {
  const std::size_t min_dim = std::min(x.rows(), x.cols());
  if (k < 1 || k > min_dim) {
    throw InvalidRank("truncated_svd: k=" + std::to_string(k) + " outside [1, " +
                      std::to_string(min_dim) + "]");
  }
  const std::size_t block = std::min(min_dim, k + std::max<std::size_t>(k, 8));
  SvdFactors result;
  if (block >= min_dim) {
    result = detail::take_leading(svd(x), k);
  } else {
    DenseMatrix q = detail::gaussian_matrix(x.cols(), block, 0x7275'6e63ULL);
    orthonormalize_columns(q);
    bool converged = false;
    for (int it = 0; it < options.max_iterations; ++it) {
      SvdFactors ritz = detail::ritz_factors(x, q);
      const double scale = ritz.sigma.empty() ? 0.0 : ritz.sigma[0];
      DenseMatrix xtu = matmul_tn(x, ritz.u);
      double worst = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        double r = 0.0;
        for (std::size_t p = 0; p < x.cols(); ++p) {
          const double d = xtu(p, i) - ritz.sigma[i] * ritz.v(p, i);
          r += d * d;
        }
        worst = std::max(worst, std::sqrt(r));
      }
      if (worst <= options.tol * scale || scale == 0.0) {
        result = detail::take_leading(std::move(ritz), k);
        converged = true;
        break;
      }
      q = std::move(xtu);
      orthonormalize_columns(q);
    }
    if (!converged) throw ConvergenceFailure("truncated_svd: subspace iteration cap hit");
  }
  result.truncated = true;
  return result;
}

/// Randomized range-finder SVD with power iterations (Halko, Martinsson &
/// Tropp). Deterministic for a fixed seed.
inline SvdFactors randomized_svd(const DenseMatrix& x, std::size_t k, std::size_t oversample,
                                 std::size_t power_iters, std::uint64_t seed) {
  const std::size_t min_dim = std::min(x.rows(), x.cols());
  if (k < 1 || k > min_dim) {
    throw InvalidRank("randomized_svd: need 1 <= k <= " + std::to_string(min_dim));
  }
  // Oversampling is capped by the smaller dimension.
  const std::size_t l = std::min(k + oversample, min_dim);
  DenseMatrix omega = detail::gaussian_matrix(x.cols(), l, seed);
  DenseMatrix q = matmul(x, omega);
  orthonormalize_columns(q);
  for (std::size_t it = 0; it < power_iters; ++it) {
    DenseMatrix z = matmul_tn(x, q);
    orthonormalize_columns(z);
    q = matmul(x, z);
    orthonormalize_columns(q);
  }
  // B = Q^T X is l x cols; its SVD lifts back through Q.
  SvdFactors small = svd(matmul_tn(q, x));
  SvdFactors lifted;
  lifted.u = matmul(q, small.u);
  lifted.sigma = std::move(small.sigma);
  lifted.v = std::move(small.v);
  SvdFactors out = detail::take_leading(std::move(lifted), k);
  out.truncated = true;
  out.randomized = true;
  return out;
}

}  // namespace ridgepath
