#pragma once

#include <cstdint>
#include <string_view>

#include "olrl/types.hpp"

namespace olrl {

enum class OptimizerKind { kPlain, kAdam };

OptimizerKind parse_optimizer_kind(std::string_view name);
std::string_view to_string(OptimizerKind kind);

/// Gradient-ascent state for a T x K action sequence.
struct OptimizerState {
  OptimizerKind kind = OptimizerKind::kAdam;
  double step_size = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  RowMatrix first_moment;
  RowMatrix second_moment;
  std::int64_t steps = 0;

  OptimizerState() = default;
  OptimizerState(OptimizerKind kind, double step_size, int T, int K);
};

/// Ascent step: plain u += eta g; Adam u += eta m_hat / (sqrt(v_hat) + eps)
/// with bias-corrected moments. Throws NumericOverflow naming
/// the first offending time step if g or the updated actions are not finite;
/// the actions are left unchanged in that case.
void apply_update(OptimizerState& state, ActionSequence& actions,
                  const GradientSequence& g);

}  // namespace olrl
