#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "olrl/noise.hpp"

namespace olrl {
namespace {

TEST(WhiteNoiseTest, ZeroSigmaIsIdentity) {
  Rng rng(1);
  const ActionSequence base = gaussian_actions(20, 3, 1.0, rng);
  EXPECT_EQ(white_noise_perturb(base, 0.0, rng), base);
  EXPECT_THROW(white_noise_perturb(base, -1.0, rng), std::invalid_argument);
}

TEST(WhiteNoiseTest, EmpiricalStd) {
  Rng rng(2);
  const ActionSequence base = ActionSequence::Constant(50000, 2, 3.0);
  const double sigma = 0.37;
  const ActionSequence out = white_noise_perturb(base, sigma, rng);
  const Eigen::ArrayXd d = (out - base).reshaped().array();
  const double mean = d.mean();
  const double std = std::sqrt((d - mean).square().sum() / static_cast<double>(d.size() - 1));
  EXPECT_NEAR(std / sigma, 1.0, 0.01);
  EXPECT_NEAR(mean, 0.0, 0.01 * sigma);
}

TEST(WhiteNoiseTest, SeededDeterminism) {
  const ActionSequence base = ActionSequence::Zero(10, 2);
  Rng a(3), b(3);
  EXPECT_EQ(white_noise_perturb(base, 0.5, a), white_noise_perturb(base, 0.5, b));
  Rng c(3), d(3);
  EXPECT_EQ(gaussian_actions(10, 2, 0.1, c), gaussian_actions(10, 2, 0.1, d));
}

TEST(PinkNoiseTest, Validation) {
  Rng rng(4);
  EXPECT_THROW(pink_noise_sequence(0, 1, 1.0, rng), std::invalid_argument);
  EXPECT_THROW(pink_noise_sequence(10, 1, 0.0, rng), std::invalid_argument);
  const ActionSequence one = pink_noise_sequence(1, 2, 1.0, rng);
  EXPECT_EQ(one.rows(), 1);
  EXPECT_TRUE(one.allFinite());
}

TEST(PinkNoiseTest, VarianceMatchesScale) {
  Rng rng(5);
  const double scale = 0.5;
  double sum = 0.0, sq = 0.0;
  long n = 0;
  for (int i = 0; i < 200; ++i) {
    const ActionSequence s = pink_noise_sequence(512, 1, scale, rng);
    sum += s.sum();
    sq += s.squaredNorm();
    n += s.size();
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  EXPECT_NEAR(var / (scale * scale), 1.0, 0.1);
}

TEST(PinkNoiseTest, SpectralSlopeIsMinusOne) {
  Rng rng(6);
  const int T = 1024, f_lo = 10, f_hi = 100;
  std::vector<double> power(f_hi + 1, 0.0);
  for (int i = 0; i < 100; ++i) {
    const ActionSequence s = pink_noise_sequence(T, 1, 1.0, rng);
    for (int f = f_lo; f <= f_hi; ++f) {
      double re = 0.0, im = 0.0;
      for (int t = 0; t < T; ++t) {
        const double phase = 2.0 * std::numbers::pi * f * t / T;
        re += s(t, 0) * std::cos(phase);
        im -= s(t, 0) * std::sin(phase);
      }
      power[f] += re * re + im * im;
    }
  }
  // Least-squares slope of log power against log frequency.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = f_hi - f_lo + 1;
  for (int f = f_lo; f <= f_hi; ++f) {
    const double x = std::log(f), y = std::log(power[f]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  EXPECT_NEAR(slope, -1.0, 0.3);
}

TEST(PinkNoiseTest, DimensionsAreUncorrelated) {
  Rng rng(7);
  double sab = 0, saa = 0, sbb = 0;
  for (int i = 0; i < 200; ++i) {
    const ActionSequence s = pink_noise_sequence(256, 2, 1.0, rng);
    sab += s.col(0).dot(s.col(1));
    saa += s.col(0).squaredNorm();
    sbb += s.col(1).squaredNorm();
  }
  EXPECT_LE(std::abs(sab / std::sqrt(saa * sbb)), 0.1);
}

TEST(PinkNoiseTest, ZeroMeanAndSeeded) {
  Rng a(8), b(8);
  const ActionSequence x = pink_noise_sequence(64, 2, 1.0, a);
  EXPECT_EQ(x, pink_noise_sequence(64, 2, 1.0, b));
  // The DC bin is zero, so each column sums to zero.
  EXPECT_NEAR(x.col(0).sum(), 0.0, 1e-10);
  EXPECT_NEAR(x.col(1).sum(), 0.0, 1e-10);
}

}  // namespace
}  // namespace olrl
