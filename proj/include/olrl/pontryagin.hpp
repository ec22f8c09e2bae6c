#pragma once

#include "olrl/environment.hpp"

namespace olrl {

/// Source of per-step Jacobian estimates (A_t, B_t) for the backward pass.
///
/// The backward pass queries each step exactly once, in the order
/// t = T-1, ..., 0. Providers may be stateful (recursive estimators update
/// themselves when queried).
class JacobianProvider {
 public:
  virtual ~JacobianProvider() = default;
  virtual JacobianEstimate estimate(int t, const ConstVectorRef& x,
                                    const ConstVectorRef& u,
                                    const Trajectory& traj) = 0;
};

struct BackwardPassResult {
  /// Row t holds lambda_{t+1}; the last row is grad r_T(x_T).
  RowMatrix costates;
  /// lambda_0, computed with A_0 but not needed for the gradient.
  Vector initial_costate;
  GradientSequence gradient;
};

/// Costate recursion
///   lambda_T = grad r_T(x_T)
///   lambda_t = grad_x r(x_t, u_t) + A_t lambda_{t+1}
///   g_t      = grad_u r(x_t, u_t) + B_t lambda_{t+1}
/// along the states stored in `traj`.
BackwardPassResult backward_pass(const Trajectory& traj,
                                 JacobianProvider& provider,
                                 const Environment& env);

/// Exact-Jacobian gradient of J (finite-difference oracle Jacobians). Counts
/// one rollout on `counter`; the Jacobian probes are not counted.
GradientSequence true_gradient(const Environment& env,
                               const ActionSequence& actions,
                               RolloutCounter& counter);
GradientSequence true_gradient(const Environment& env,
                               const ActionSequence& actions);

}  // namespace olrl
