#pragma once

#include "olrl/types.hpp"

namespace olrl {

/// Zero-mean Gaussian noise with power spectral density proportional to 1/f,
/// independent across the K columns. Synthesized in the frequency domain
/// (DC bin zeroed) and scaled so that every entry has standard deviation
/// `scale`.
ActionSequence pink_noise_sequence(int T, int K, double scale, Rng& rng);

/// base + sigma * N(0, I), entry by entry. sigma = 0 returns base unchanged.
ActionSequence white_noise_perturb(const ActionSequence& base, double sigma,
                                   Rng& rng);

/// Entries drawn i.i.d. from N(0, std^2).
ActionSequence gaussian_actions(int T, int K, double std, Rng& rng);

}  // namespace olrl
