#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "ridgepath/datagen.hpp"

using namespace ridgepath;

TEST(Spectrum, Values) {
  const Vector u = spectrum_values({SpectrumKind::Uniform, 0.5, 2.0}, 4);
  EXPECT_DOUBLE_EQ(u[0], 2.0);
  EXPECT_NEAR(u[3], 0.2, 1e-15);
  const Vector d = spectrum_values({SpectrumKind::Decay, 1.0, 1.0}, 3);
  EXPECT_NEAR(d[1], 0.5, 1e-15);
  EXPECT_NEAR(d[2], 1.0 / 3.0, 1e-15);
}

TEST(Generate, ShapesAndInterceptColumn) {
  SynthSpec spec;
  spec.n = 50;
  spec.d = 6;
  const SynthData g = generate(spec);
  EXPECT_EQ(g.features.rows(), 50u);
  EXPECT_EQ(g.features.cols(), 6u);
  EXPECT_EQ(g.x.cols(), 7u);
  EXPECT_EQ(g.theta_true.size(), 7u);
  EXPECT_EQ(g.y.size(), 50u);
  EXPECT_FALSE(g.underdetermined);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(g.x(i, 6), 1.0);
  // Features are orthogonal to the ones vector.
  for (std::size_t j = 0; j < 6; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < 50; ++i) s += g.features(i, j);
    EXPECT_NEAR(s, 0.0, 1e-12);
  }
}

TEST(Generate, SingularValuesMatchSpectrum) {
  SynthSpec spec;
  spec.n = 80;
  spec.d = 5;
  spec.spectrum = {SpectrumKind::Uniform, 0.5, 3.0};
  const SynthData g = generate(spec);
  Vector ev = oracle::symmetric_eigenvalues(oracle::naive_gram(g.features));
  std::sort(ev.rbegin(), ev.rend());
  const Vector want = spectrum_values(spec.spectrum, 5);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(std::sqrt(ev[i]), want[i], 1e-10);
}

TEST(Generate, DecayConditionNumberWithinOnePercent) {
  SynthSpec spec;
  spec.n = 100;
  spec.d = 10;
  spec.spectrum = {SpectrumKind::Decay, 1.0, 1.0};
  const SynthData g = generate(spec);
  const Vector ev = oracle::symmetric_eigenvalues(oracle::naive_gram(g.features));
  const auto [lo, hi] = std::minmax_element(ev.begin(), ev.end());
  EXPECT_NEAR(*hi / *lo, 100.0, 1.0);
}

TEST(Generate, NoiselessRecovery) {
  SynthSpec spec;
  spec.n = 60;
  spec.d = 8;
  spec.noise_sigma = 0.0;
  const SynthData g = generate(spec);
  DenseMatrix h = oracle::naive_gram(g.x);
  const Vector theta = oracle::naive_matvec(oracle::gauss_jordan_inverse(h),
                                            oracle::naive_matvec(oracle::naive_transpose(g.x), g.y));
  EXPECT_LE(oracle::vec_diff(theta, g.theta_true), 1e-8 * oracle::vec_norm(g.theta_true));
}

TEST(Generate, SeedDeterminism) {
  SynthSpec spec;
  spec.n = 30;
  spec.d = 4;
  const SynthData a = generate(spec);
  const SynthData b = generate(spec);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.y, b.y);
  spec.seed = 2;
  EXPECT_NE(generate(spec).y, a.y);
}

TEST(Generate, BinaryLabels) {
  SynthSpec spec;
  spec.n = 40;
  spec.d = 3;
  spec.label_kind = LabelKind::Binary;
  const SynthData g = generate(spec);
  for (double v : g.y) EXPECT_TRUE(v == 1.0 || v == -1.0);
}

TEST(Generate, UnderdeterminedAndErrors) {
  SynthSpec spec;
  spec.n = 5;
  spec.d = 10;
  const SynthData g = generate(spec);
  EXPECT_TRUE(g.underdetermined);
  EXPECT_EQ(g.x.rows(), 5u);
  EXPECT_EQ(g.x.cols(), 11u);
  spec.n = 0;
  EXPECT_THROW(generate(spec), InvalidArgument);
  spec.n = 10;
  spec.noise_sigma = -1.0;
  EXPECT_THROW(generate(spec), InvalidArgument);
}
