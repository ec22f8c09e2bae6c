#include "olrl/environment.hpp"

#include <stdexcept>
#include <string>

#include "olrl/errors.hpp"

namespace olrl {

void EnvSpec::validate() const {
  if (state_dim < 1 || action_dim < 1 || horizon < 1) {
    throw std::invalid_argument("EnvSpec: D, K and T must be positive");
  }
  if (x0.size() != state_dim) {
    throw std::invalid_argument("EnvSpec: x0 must have D entries");
  }
  if (!x0.allFinite()) {
    throw std::invalid_argument("EnvSpec: x0 must be finite");
  }
}

Environment::Environment(EnvSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
}

Vector Environment::step(const ConstVectorRef& x,
                         const ConstVectorRef& u) const {
  Vector next(state_dim());
  step(x, u, next);
  return next;
}

RolloutCounter& global_rollout_counter() {
  static RolloutCounter counter;
  return counter;
}

void check_action_shape(const Environment& env,
                        const ActionSequence& actions) {
  if (actions.rows() != env.horizon() || actions.cols() != env.action_dim()) {
    throw DimensionMismatch(
        "action sequence is " + std::to_string(actions.rows()) + "x" +
        std::to_string(actions.cols()) + ", expected " +
        std::to_string(env.horizon()) + "x" +
        std::to_string(env.action_dim()));
  }
}

Trajectory rollout(const Environment& env, const ActionSequence& actions,
                   RolloutCounter& counter) {
  check_action_shape(env, actions);
  if (!actions.allFinite()) {
    throw std::invalid_argument("rollout: actions must be finite");
  }
  const int T = env.horizon();
  Trajectory traj;
  traj.actions = actions;
  traj.states.resize(T + 1, env.state_dim());
  traj.running_rewards.resize(T);
  traj.states.row(0) = env.spec().x0.transpose();
  counter.add();
  for (int t = 0; t < T; ++t) {
    env.step(traj.states.row(t), actions.row(t), traj.states.row(t + 1));
    if (!traj.states.row(t + 1).allFinite()) throw DivergedRollout(t + 1);
    traj.running_rewards[t] =
        env.running_reward(traj.states.row(t), actions.row(t));
  }
  traj.terminal_reward = env.terminal_reward(traj.states.row(T));
  double sum = 0.0;
  for (int t = 0; t < T; ++t) sum += traj.running_rewards[t];
  traj.return_J = sum + traj.terminal_reward;
  return traj;
}

double evaluate_return(const Environment& env, const ActionSequence& actions,
                       RolloutCounter& counter) {
  return rollout(env, actions, counter).return_J;
}

}  // namespace olrl
