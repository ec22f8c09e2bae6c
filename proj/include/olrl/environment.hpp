#pragma once

#include <atomic>
#include <cstdint>
#include <memory>

#include "olrl/types.hpp"

namespace olrl {

struct EnvSpec {
  int state_dim = 1;   // D
  int action_dim = 1;  // K
  int horizon = 1;     // T
  Vector x0;

  /// Throws std::invalid_argument if a dimension is non-positive or x0 is
  /// malformed.
  void validate() const;
};

/// Deterministic dynamics with known, differentiable rewards.
///
/// Implementations are immutable after construction and may be shared between
/// threads. Gradients use the same layout as the dynamics Jacobians, i.e. the
/// reward gradient with respect to x is a D-vector.
class Environment {
 public:
  virtual ~Environment() = default;

  const EnvSpec& spec() const { return spec_; }
  int state_dim() const { return spec_.state_dim; }
  int action_dim() const { return spec_.action_dim; }
  int horizon() const { return spec_.horizon; }

  virtual void step(const ConstVectorRef& x, const ConstVectorRef& u,
                    VectorRef next) const = 0;
  Vector step(const ConstVectorRef& x, const ConstVectorRef& u) const;

  virtual double running_reward(const ConstVectorRef& x,
                                const ConstVectorRef& u) const = 0;
  virtual double terminal_reward(const ConstVectorRef& x) const = 0;

  virtual void running_reward_gradient(const ConstVectorRef& x,
                                       const ConstVectorRef& u, VectorRef dx,
                                       VectorRef du) const = 0;
  virtual void terminal_reward_gradient(const ConstVectorRef& x,
                                        VectorRef dx) const = 0;

 protected:
  explicit Environment(EnvSpec spec);

 private:
  EnvSpec spec_;
};

using EnvPtr = std::shared_ptr<const Environment>;

/// Record of one pass through the dynamics.
struct Trajectory {
  ActionSequence actions;  // T x K
  RowMatrix states;        // (T+1) x D, row t is x_t
  Vector running_rewards;  // T
  double terminal_reward = 0.0;
  double return_J = 0.0;

  int horizon() const { return static_cast<int>(actions.rows()); }
};

/// Monotone tally of rollouts through the true environment.
class RolloutCounter {
 public:
  void add(std::int64_t n = 1) { count_.fetch_add(n, std::memory_order_relaxed); }
  std::int64_t count() const { return count_.load(std::memory_order_relaxed); }

 private:
  std::atomic<std::int64_t> count_{0};
};

/// Process-wide counter used when a caller does not supply its own tally.
RolloutCounter& global_rollout_counter();

/// Runs the action sequence through the environment once and increments
/// `counter`. Throws DivergedRollout if a state becomes non-finite.
Trajectory rollout(const Environment& env, const ActionSequence& actions,
                   RolloutCounter& counter = global_rollout_counter());

/// Same pass without keeping the trajectory.
double evaluate_return(const Environment& env, const ActionSequence& actions,
                       RolloutCounter& counter = global_rollout_counter());

/// Throws DimensionMismatch unless `actions` is T x K for `env`.
void check_action_shape(const Environment& env, const ActionSequence& actions);

}  // namespace olrl
