#include "olrl/pontryagin.hpp"

#include <string>

#include "olrl/errors.hpp"
#include "olrl/jacobians.hpp"

namespace olrl {

BackwardPassResult backward_pass(const Trajectory& traj,
                                 JacobianProvider& provider,
                                 const Environment& env) {
  const int T = env.horizon(), D = env.state_dim(), K = env.action_dim();
  if (traj.horizon() != T || traj.actions.cols() != K ||
      traj.states.rows() != T + 1 || traj.states.cols() != D) {
    throw DimensionMismatch("backward_pass: trajectory does not match env");
  }
  BackwardPassResult out;
  out.costates.resize(T, D);
  out.gradient.resize(T, K);

  Vector lambda(D), next_lambda(D), rx(D), ru(K);
  env.terminal_reward_gradient(traj.states.row(T), lambda);
  out.costates.row(T - 1) = lambda.transpose();

  for (int t = T - 1; t >= 0; --t) {
    const auto x = traj.states.row(t);
    const auto u = traj.actions.row(t);
    JacobianEstimate jac;
    try {
      jac = provider.estimate(t, x, u, traj);
    } catch (const ProviderError&) {
      throw;
    } catch (const std::exception& e) {
      throw ProviderError(t, e.what());
    }
    if (jac.A.rows() != D || jac.A.cols() != D || jac.B.rows() != K ||
        jac.B.cols() != D) {
      throw ProviderError(t, "estimate has wrong shape");
    }
    env.running_reward_gradient(x, u, rx, ru);
    // lambda currently holds lambda_{t+1}.
    out.gradient.row(t) = (ru + jac.B * lambda).transpose();
    next_lambda.noalias() = jac.A * lambda;
    next_lambda += rx;
    lambda.swap(next_lambda);
    if (!lambda.allFinite() || !out.gradient.row(t).allFinite()) {
      throw NumericOverflow(t, "non-finite costate");
    }
    if (t > 0) out.costates.row(t - 1) = lambda.transpose();
  }
  out.initial_costate = lambda;
  return out;
}

GradientSequence true_gradient(const Environment& env,
                               const ActionSequence& actions,
                               RolloutCounter& counter) {
  const Trajectory traj = rollout(env, actions, counter);
  OracleProvider oracle(env);
  return backward_pass(traj, oracle, env).gradient;
}

GradientSequence true_gradient(const Environment& env,
                               const ActionSequence& actions) {
  return true_gradient(env, actions, global_rollout_counter());
}

}  // namespace olrl
