#pragma once

#include "olrl/environment.hpp"

namespace olrl {

/// Moves all running rewards into the terminal reward by appending an
/// accumulator rho to the state: rho_{t+1} = rho_t + r(x_t, u_t),
/// r'_T(x, rho) = r_T(x) + rho, r' = 0. Returns are preserved bit-for-bit.
EnvPtr augment_terminal_reward(EnvPtr env);

}  // namespace olrl
