#include "olrl/noise.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace olrl {

ActionSequence pink_noise_sequence(int T, int K, double scale, Rng& rng) {
  if (T < 1 || K < 1) {
    throw std::invalid_argument("pink_noise_sequence: T, K must be positive");
  }
  if (!(scale > 0.0)) {
    throw std::invalid_argument("pink_noise_sequence: scale must be > 0");
  }
  ActionSequence out = ActionSequence::Zero(T, K);
  if (T == 1) {
    // No non-DC frequency exists; fall back to white noise.
    std::normal_distribution<double> normal(0.0, scale);
    for (int k = 0; k < K; ++k) out(0, k) = normal(rng);
    return out;
  }
  // x_t = sum_{f=1}^{T/2} w_f (a_f cos(2 pi f t / T) + b_f sin(2 pi f t / T))
  // with w_f = (f / T)^{-1/2}. Var(x_t) = sum_f w_f^2 exactly.
  const int bins = T / 2;
  std::vector<double> weight(bins + 1, 0.0);
  double variance = 0.0;
  for (int f = 1; f <= bins; ++f) {
    weight[f] = 1.0 / std::sqrt(static_cast<double>(f) / T);
    variance += weight[f] * weight[f];
  }
  const double norm = scale / std::sqrt(variance);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> a(bins + 1), b(bins + 1);
  for (int k = 0; k < K; ++k) {
    for (int f = 1; f <= bins; ++f) {
      a[f] = normal(rng);
      b[f] = normal(rng);
    }
    for (int t = 0; t < T; ++t) {
      double x = 0.0;
      for (int f = 1; f <= bins; ++f) {
        const double phase = 2.0 * std::numbers::pi * f * t / T;
        x += weight[f] * (a[f] * std::cos(phase) + b[f] * std::sin(phase));
      }
      out(t, k) = norm * x;
    }
  }
  return out;
}

ActionSequence white_noise_perturb(const ActionSequence& base, double sigma,
                                   Rng& rng) {
  if (!(sigma >= 0.0)) {
    throw std::invalid_argument("white_noise_perturb: sigma must be >= 0");
  }
  if (sigma == 0.0) return base;
  std::normal_distribution<double> normal(0.0, 1.0);
  ActionSequence out = base;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out.data()[i] += sigma * normal(rng);
  }
  return out;
}

ActionSequence gaussian_actions(int T, int K, double std, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ActionSequence out(T, K);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out.data()[i] = std * normal(rng);
  }
  return out;
}

}  // namespace olrl
