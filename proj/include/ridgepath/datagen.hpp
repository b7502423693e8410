#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "ridgepath/dense_matrix.hpp"
#include "ridgepath/errors.hpp"
#include "ridgepath/linalg.hpp"
#include "ridgepath/ridge.hpp"

namespace ridgepath {

enum class SpectrumKind { Uniform, Decay };
enum class LabelKind { Continuous, Binary };

/// Singular values of the feature block: Uniform is linearly spaced from
/// `scale` down to scale/10; Decay gives scale * (i+1)^(-rate).
struct Spectrum {
  SpectrumKind kind = SpectrumKind::Uniform;
  double rate = 0.5;
  double scale = 1.0;
};

struct SynthSpec {
  std::size_t n = 200;
  std::size_t d = 32;
  Spectrum spectrum{};
  double noise_sigma = 0.3;
  LabelKind label_kind = LabelKind::Continuous;
  std::uint64_t seed = 1;
};

struct SynthData {
  /// n x d features, no intercept column.
  DenseMatrix features;
  /// n x (d+1) design matrix with the trailing intercept column.
  DenseMatrix x;
  Vector y;
  /// Length d+1, intercept last.
  Vector theta_true;
  /// Set when n < d+1, where the requested spectrum cannot be realized exactly.
  bool underdetermined = false;
};

inline Vector spectrum_values(const Spectrum& s, std::size_t d) {
  Vector sigma(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (s.kind == SpectrumKind::Uniform) {
      const double t = d > 1 ? static_cast<double>(i) / static_cast<double>(d - 1) : 0.0;
      sigma[i] = s.scale * (1.0 - 0.9 * t);
    } else {
      sigma[i] = s.scale * std::pow(static_cast<double>(i + 1), -s.rate);
    }
  }
  return sigma;
}

inline std::string_view to_string(LabelKind k) {
  return k == LabelKind::Binary ? "binary" : "continuous";
}

/// Features Q diag(sigma) R^T with Q orthonormal and orthogonal to the ones
/// vector, R a random rotation; targets from a Gaussian theta plus noise.
inline SynthData generate(const SynthSpec& spec) {
  if (spec.n < 1) throw InvalidArgument("n must be >= 1");
  if (!(spec.noise_sigma >= 0.0)) throw InvalidArgument("noise_sigma must be >= 0");
  if (!(spec.spectrum.scale > 0.0)) throw InvalidArgument("spectrum scale must be > 0");
  if (spec.spectrum.kind == SpectrumKind::Decay && !(spec.spectrum.rate >= 0.0)) {
    throw InvalidArgument("decay rate must be >= 0");
  }
  const std::size_t n = spec.n;
  const std::size_t d = spec.d;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian = [&](std::size_t rows, std::size_t cols) {
    DenseMatrix m(rows, cols);
    for (std::size_t j = 0; j < cols; ++j)
      for (std::size_t i = 0; i < rows; ++i) m(i, j) = normal(rng);
    return m;
  };

  SynthData out;
  out.underdetermined = n < d + 1;
  const Vector sigma = spectrum_values(spec.spectrum, d);

  DenseMatrix features(n, d);
  if (d > 0) {
    DenseMatrix rot = gaussian(d, d);
    orthonormalize_columns(rot);
    DenseMatrix q;
    if (!out.underdetermined) {
      // First column is the ones direction; it is dropped after orthonormalizing.
      DenseMatrix basis = gaussian(n, d + 1);
      for (std::size_t i = 0; i < n; ++i) basis(i, 0) = 1.0;
      orthonormalize_columns(basis);
      q = DenseMatrix(n, d, std::vector<double>(basis.data() + n, basis.data() + n * (d + 1)));
    } else {
      q = gaussian(n, d);
      q *= 1.0 / std::sqrt(static_cast<double>(n));
    }
    for (std::size_t j = 0; j < d; ++j)
      for (double& v : q.col(j)) v *= sigma[j];
    features = matmul(q, rot.transpose());
  }

  out.theta_true.resize(d + 1);
  for (double& t : out.theta_true) t = normal(rng);
  out.x = with_intercept(features);
  out.features = std::move(features);
  out.y = matvec(out.x, out.theta_true);
  for (double& v : out.y) {
    v += spec.noise_sigma * normal(rng);
    if (spec.label_kind == LabelKind::Binary) v = v >= 0.0 ? 1.0 : -1.0;
  }
  return out;
}

}  // namespace ridgepath
