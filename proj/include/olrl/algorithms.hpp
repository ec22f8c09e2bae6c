#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "olrl/environment.hpp"
#include "olrl/jacobians.hpp"
#include "olrl/mlp.hpp"
#include "olrl/models.hpp"
#include "olrl/optim.hpp"
#include "olrl/pendulum.hpp"

namespace olrl {

enum class Algorithm {
  kOracle,
  kModelBased,
  kPlanner,
  kOnTrajectory,
  kOnTrajectoryAffine,
  kOffTrajectory,
  kFiniteDifference,
  kCem,
};

Algorithm parse_algorithm(std::string_view name);
std::string_view to_string(Algorithm algorithm);

RlsInit parse_rls_init(std::string_view name);
std::string_view to_string(RlsInit init);

/// Everything needed to reproduce one optimization run. Defaults are the
/// pendulum hyperparameters.
struct RunConfig {
  // Environment.
  std::string env = "pendulum";  // pendulum | lqr | linear
  int horizon = 100;
  PendulumParams pendulum;
  int lqr_state_dim = 2;
  int lqr_action_dim = 1;
  std::uint64_t lqr_seed = 0;

  // Optimization.
  Algorithm algorithm = Algorithm::kOffTrajectory;
  int iterations = 50000;  // N
  double eta = 0.001;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double init_std = 0.01;
  double sigma = 0.001;
  int rollouts = 10;  // M
  double alpha = 0.8;
  double q0 = 0.001;
  RlsInit rls_init = RlsInit::kIdentity;
  int elite = 0;  // CEM elite size L; 0 selects max(1, ceil(M / 5))

  // Model for model_based / planner: true | perturbed | mlp.
  std::string model = "true";
  double model_scale = 0.0;  // s
  MlpConfig mlp;

  // Bookkeeping.
  std::uint64_t seed = 0;  // master seed
  int eval_every = 50;     // mean-sequence evaluation cadence (off-traj, CEM)
  double threshold = PendulumEnv::kSolveThreshold;
  bool oracle = false;  // record oracle-gradient diagnostics
  double monitor_mu = 0.5;
  double monitor_nu = 1.5;
  bool stop_when_solved = false;

  int elite_size() const;
  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct CurvePoint {
  std::int64_t iteration = 0;
  std::int64_t rollouts = 0;       // cumulative true-environment rollouts
  std::int64_t eval_rollouts = 0;  // of which evaluation-only
  double J = 0.0;                  // return of the iterate u^(iteration)
  double J_max = 0.0;
};

/// Oracle-gradient diagnostics of one iteration.
struct IterationDiagnostics {
  std::int64_t iteration = 0;
  double grad_norm = 0.0;
  double true_grad_norm = 0.0;
  int inner_ok = 0;  // steps with g_t' dJ_t >= mu ||dJ_t||^2
  int both_ok = 0;   // ... and ||g_t|| <= nu ||dJ_t||
  int steps = 0;
};

struct LearningCurve {
  std::vector<CurvePoint> points;
  double J_max = -std::numeric_limits<double>::infinity();
  std::int64_t iterations_run = 0;
  std::int64_t learning_rollouts = 0;
  std::int64_t eval_rollouts = 0;
  std::int64_t model_rollouts = 0;  // spent fitting a learned model

  /// Sum over iterations of ||grad_{u_t} J(u^(k))||^2 (oracle flag only).
  Vector true_grad_sq_sum;
  std::int64_t true_grad_count = 0;
  std::vector<IterationDiagnostics> diagnostics;

  ActionSequence final_actions;
  ActionSequence best_actions;
  std::optional<std::string> error;

  bool solved(double threshold) const { return J_max > threshold; }
  /// Cumulative rollouts at the first recorded point above the threshold.
  std::optional<std::int64_t> rollouts_to_solve(double threshold) const;
};

/// RNG stream `stream` of run `run_index` under master seed `seed`.
Rng make_rng(std::uint64_t seed, std::uint64_t run_index, std::uint64_t stream);

enum RngStream : std::uint64_t {
  kInitStream = 0,
  kNoiseStream = 1,
  kModelStream = 2,
  kTrainingStream = 3,
};

ActionSequence initial_actions(const RunConfig& cfg, const Environment& env,
                               std::uint64_t run_index);

// ---------------------------------------------------------------------------
// End-to-end optimizers. Numeric failures stop the run; the partial curve is
// returned with `error` set.

LearningCurve run_oracle(const RunConfig& cfg, const Environment& env,
                         std::uint64_t run_index = 0);
LearningCurve run_model_based(const RunConfig& cfg, const Environment& env,
                              const DifferentiableModel& model,
                              std::uint64_t run_index = 0);
LearningCurve run_planner(const RunConfig& cfg, const Environment& env,
                          const DifferentiableModel& model,
                          std::uint64_t run_index = 0);
LearningCurve run_on_trajectory(const RunConfig& cfg, const Environment& env,
                                std::uint64_t run_index = 0);
LearningCurve run_off_trajectory(const RunConfig& cfg, const Environment& env,
                                 std::uint64_t run_index = 0);
LearningCurve run_finite_difference(const RunConfig& cfg,
                                    const Environment& env,
                                    std::uint64_t run_index = 0);
LearningCurve run_cem(const RunConfig& cfg, const Environment& env,
                      std::uint64_t run_index = 0);

struct BuiltModel {
  ModelPtr model;
  std::int64_t rollouts = 0;
};

/// Model selected by cfg.model for `env` (pendulum, linear-quadratic).
BuiltModel build_model(const RunConfig& cfg, const Environment& env,
                       std::uint64_t run_index);

/// Builds whatever the configured algorithm needs and runs it.
LearningCurve run_algorithm(const RunConfig& cfg, const Environment& env,
                            std::uint64_t run_index = 0);

/// True rollouts per iteration spent by the algorithm itself.
std::int64_t rollouts_per_iteration(const RunConfig& cfg);

// ---------------------------------------------------------------------------
// Building blocks, exposed for testing.

/// Rollout through the model from x0 with rewards of `env`.
Trajectory imagined_rollout(const Environment& env,
                            const DifferentiableModel& model,
                            const ActionSequence& actions);

/// Backpropagation-through-the-model gradient of the imagined return.
GradientSequence planner_gradient(const Environment& env,
                                  const DifferentiableModel& model,
                                  const ActionSequence& actions);

/// Minimum-norm g with J_i - J_ref ~ g' vec(u_i - u_ref).
GradientSequence finite_difference_gradient(
    const ActionSequence& reference, double reference_return,
    std::span<const ActionSequence> samples, std::span<const double> returns);

/// Mean of the `elite` highest-return samples; ties go to the lower index.
ActionSequence cem_update(std::span<const ActionSequence> samples,
                          std::span<const double> returns, int elite);

struct OffTrajectoryStep {
  Trajectory rollout;  // perturbed rollout used for estimation
  GradientSequence gradient;
};

/// One iteration of the off-trajectory method: perturb, roll out, update the
/// RLS estimates during the backward pass, and ascend on the mean sequence.
OffTrajectoryStep off_trajectory_iteration(const Environment& env,
                                           RlsState& rls, ActionSequence& mean,
                                           OptimizerState& opt, double sigma,
                                           Rng& rng, RolloutCounter& counter);

}  // namespace olrl
