#include "olrl/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/QR>

#include "olrl/errors.hpp"
#include "olrl/linear_quadratic.hpp"
#include "olrl/noise.hpp"
#include "olrl/pontryagin.hpp"

namespace olrl {

namespace {

struct AlgorithmName {
  Algorithm algorithm;
  std::string_view name;
};

constexpr AlgorithmName kAlgorithmNames[] = {
    {Algorithm::kOracle, "oracle"},
    {Algorithm::kModelBased, "model_based"},
    {Algorithm::kPlanner, "planner"},
    {Algorithm::kOnTrajectory, "on_trajectory"},
    {Algorithm::kOnTrajectoryAffine, "on_trajectory_affine"},
    {Algorithm::kOffTrajectory, "off_trajectory"},
    {Algorithm::kFiniteDifference, "finite_difference"},
    {Algorithm::kCem, "cem"},
};

// Tracks rollouts and the per-iterate returns of one run.
class Recorder {
 public:
  Recorder(const RunConfig& cfg, const Environment& env, LearningCurve& curve)
      : cfg_(cfg), env_(env), curve_(curve) {
    if (cfg.oracle) curve_.true_grad_sq_sum = Vector::Zero(env.horizon());
  }

  RolloutCounter& learning() { return learning_; }
  RolloutCounter& eval() { return eval_; }

  // Records J(u^(k)) and reports whether the run may stop early.
  bool record(std::int64_t k, double J, const ActionSequence& actions) {
    if (J > curve_.J_max || curve_.points.empty()) {
      curve_.J_max = std::max(curve_.J_max, J);
      curve_.best_actions = actions;
    }
    curve_.points.push_back({k, total(), eval_.count(), J, curve_.J_max});
    return cfg_.stop_when_solved && curve_.J_max > cfg_.threshold;
  }

  // Evaluation-only rollout of the current iterate.
  bool evaluate(std::int64_t k, const ActionSequence& actions) {
    return record(k, evaluate_return(env_, actions, eval_), actions);
  }

  void diagnose(std::int64_t k, const ActionSequence& iterate,
                const GradientSequence& g) {
    if (!cfg_.oracle) return;
    const GradientSequence truth = true_gradient(env_, iterate, scratch_);
    IterationDiagnostics d;
    d.iteration = k;
    d.grad_norm = g.norm();
    d.true_grad_norm = truth.norm();
    d.steps = static_cast<int>(g.rows());
    for (Eigen::Index t = 0; t < g.rows(); ++t) {
      const double sq = truth.row(t).squaredNorm();
      curve_.true_grad_sq_sum[t] += sq;
      const bool inner = g.row(t).dot(truth.row(t)) >= cfg_.monitor_mu * sq;
      const bool norm = g.row(t).norm() <= cfg_.monitor_nu * std::sqrt(sq);
      d.inner_ok += inner;
      d.both_ok += inner && norm;
    }
    ++curve_.true_grad_count;
    curve_.diagnostics.push_back(d);
  }

  void finish(std::int64_t iterations, const ActionSequence& actions) {
    curve_.iterations_run = iterations;
    curve_.learning_rollouts = learning_.count();
    curve_.eval_rollouts = eval_.count();
    curve_.final_actions = actions;
  }

 private:
  std::int64_t total() const {
    return learning_.count() + eval_.count() + curve_.model_rollouts;
  }

  const RunConfig& cfg_;
  const Environment& env_;
  LearningCurve& curve_;
  RolloutCounter learning_, eval_, scratch_;
};

// Runs `body(k)` for k = 0..N-1, then evaluates the final iterate. Errors
// from the library abort the loop and are stored on the curve.
template <class Body>
void drive(const RunConfig& cfg, Recorder& rec, LearningCurve& curve,
           ActionSequence& actions, Body&& body) {
  std::int64_t k = 0;
  try {
    bool stop = false;
    for (; k < cfg.iterations && !stop; ++k) stop = body(k);
    if (!stop) rec.evaluate(k, actions);
  } catch (const Error& e) {
    curve.error = e.what();
  } catch (const DimensionMismatch& e) {
    curve.error = e.what();
  }
  rec.finish(k, actions);
}

void check_model(const Environment& env, const DifferentiableModel& model) {
  if (model.state_dim() != env.state_dim() ||
      model.action_dim() != env.action_dim()) {
    throw DimensionMismatch("model dimensions do not match the environment");
  }
}

}  // namespace

Algorithm parse_algorithm(std::string_view name) {
  for (const auto& entry : kAlgorithmNames) {
    if (entry.name == name) return entry.algorithm;
  }
  throw ConfigError("algorithm", "unknown algorithm '" + std::string(name) + "'");
}

std::string_view to_string(Algorithm algorithm) {
  for (const auto& entry : kAlgorithmNames) {
    if (entry.algorithm == algorithm) return entry.name;
  }
  return "unknown";
}

RlsInit parse_rls_init(std::string_view name) {
  if (name == "identity") return RlsInit::kIdentity;
  if (name == "zero") return RlsInit::kZero;
  throw ConfigError("rls_init", "rls_init must be identity or zero");
}

std::string_view to_string(RlsInit init) {
  return init == RlsInit::kIdentity ? "identity" : "zero";
}

int RunConfig::elite_size() const {
  if (elite > 0) return elite;
  return std::max(1, (rollouts + 4) / 5);
}

void RunConfig::validate() const {
  auto fail = [](const char* field, const std::string& msg) {
    throw ConfigError(field, msg);
  };
  if (env != "pendulum" && env != "lqr" && env != "linear") {
    fail("env", "env must be one of pendulum, lqr, linear");
  }
  if (horizon < 1) fail("horizon", "horizon must be positive");
  try {
    pendulum.validate();
  } catch (const std::invalid_argument& e) {
    fail("pendulum", e.what());
  }
  if (lqr_state_dim < 1) fail("lqr_state_dim", "lqr_state_dim must be positive");
  if (lqr_action_dim < 1) {
    fail("lqr_action_dim", "lqr_action_dim must be positive");
  }
  if (iterations < 0) fail("N", "N must be non-negative");
  if (!(eta > 0.0)) fail("eta", "eta must be positive");
  if (!(init_std >= 0.0)) fail("init_std", "init_std must be non-negative");
  if (!(sigma >= 0.0)) fail("sigma", "sigma must be non-negative");
  if (rollouts < 1) fail("M", "M must be at least 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) fail("alpha", "alpha must lie in (0,1]");
  if (!(q0 > 0.0)) fail("q0", "q0 must be positive");
  if (elite < 0) fail("elite", "elite must be non-negative");
  if (elite_size() > rollouts) fail("elite", "elite must not exceed M");
  if (model != "true" && model != "perturbed" && model != "mlp") {
    fail("model", "model must be one of true, perturbed, mlp");
  }
  if (!(model_scale >= 0.0)) fail("model_scale", "model_scale must be >= 0");
  try {
    mlp.validate();
  } catch (const std::invalid_argument& e) {
    fail("mlp", e.what());
  }
  if (eval_every < 1) fail("eval_every", "eval_every must be positive");
  if (!std::isfinite(threshold)) fail("threshold", "threshold must be finite");
  if (!(monitor_mu <= monitor_nu)) {
    fail("monitor_mu", "monitor_mu must not exceed monitor_nu");
  }
  const bool perturbs = algorithm == Algorithm::kOnTrajectory ||
                        algorithm == Algorithm::kOnTrajectoryAffine ||
                        algorithm == Algorithm::kOffTrajectory ||
                        algorithm == Algorithm::kFiniteDifference ||
                        algorithm == Algorithm::kCem;
  if (perturbs && !(sigma > 0.0)) {
    fail("sigma", "sigma must be positive for perturbation-based methods");
  }
}

std::optional<std::int64_t> LearningCurve::rollouts_to_solve(
    double threshold) const {
  for (const CurvePoint& p : points) {
    if (p.J > threshold) return p.rollouts;
  }
  return std::nullopt;
}

Rng make_rng(std::uint64_t seed, std::uint64_t run_index,
             std::uint64_t stream) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(run_index), hi(run_index),
                    lo(stream), hi(stream)};
  return Rng(seq);
}

ActionSequence initial_actions(const RunConfig& cfg, const Environment& env,
                               std::uint64_t run_index) {
  Rng rng = make_rng(cfg.seed, run_index, kInitStream);
  return gaussian_actions(env.horizon(), env.action_dim(), cfg.init_std, rng);
}

std::int64_t rollouts_per_iteration(const RunConfig& cfg) {
  switch (cfg.algorithm) {
    case Algorithm::kOracle:
    case Algorithm::kModelBased:
    case Algorithm::kOffTrajectory:
      return 1;
    case Algorithm::kPlanner:
      return 0;
    case Algorithm::kOnTrajectory:
    case Algorithm::kOnTrajectoryAffine:
    case Algorithm::kFiniteDifference:
      return cfg.rollouts + 1;
    case Algorithm::kCem:
      return cfg.rollouts;
  }
  return 0;
}

// ---------------------------------------------------------------------------

LearningCurve run_oracle(const RunConfig& cfg, const Environment& env,
                         std::uint64_t run_index) {
  cfg.validate();
  LearningCurve curve;
  Recorder rec(cfg, env, curve);
  ActionSequence u = initial_actions(cfg, env, run_index);
  OptimizerState opt(cfg.optimizer, cfg.eta, env.horizon(), env.action_dim());
  OracleProvider provider(env);
  drive(cfg, rec, curve, u, [&](std::int64_t k) {
    const Trajectory traj = rollout(env, u, rec.learning());
    const bool stop = rec.record(k, traj.return_J, u);
    const GradientSequence g = backward_pass(traj, provider, env).gradient;
    rec.diagnose(k, u, g);
    if (!stop) apply_update(opt, u, g);
    return stop;
  });
  return curve;
}

LearningCurve run_model_based(const RunConfig& cfg, const Environment& env,
                              const DifferentiableModel& model,
                              std::uint64_t run_index) {
  cfg.validate();
  check_model(env, model);
  LearningCurve curve;
  Recorder rec(cfg, env, curve);
  ActionSequence u = initial_actions(cfg, env, run_index);
  OptimizerState opt(cfg.optimizer, cfg.eta, env.horizon(), env.action_dim());
  ModelProvider provider(model);
  drive(cfg, rec, curve, u, [&](std::int64_t k) {
    const Trajectory traj = rollout(env, u, rec.learning());
    const bool stop = rec.record(k, traj.return_J, u);
    const GradientSequence g = backward_pass(traj, provider, env).gradient;
    rec.diagnose(k, u, g);
    if (!stop) apply_update(opt, u, g);
    return stop;
  });
  return curve;
}

Trajectory imagined_rollout(const Environment& env,
                            const DifferentiableModel& model,
                            const ActionSequence& actions) {
  check_action_shape(env, actions);
  check_model(env, model);
  const int T = env.horizon();
  Trajectory traj;
  traj.actions = actions;
  traj.states.resize(T + 1, env.state_dim());
  traj.running_rewards.resize(T);
  traj.states.row(0) = env.spec().x0.transpose();
  for (int t = 0; t < T; ++t) {
    model.predict(traj.states.row(t), actions.row(t), traj.states.row(t + 1));
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

GradientSequence planner_gradient(const Environment& env,
                                  const DifferentiableModel& model,
                                  const ActionSequence& actions) {
  const Trajectory imagined = imagined_rollout(env, model, actions);
  ModelProvider provider(model);
  return backward_pass(imagined, provider, env).gradient;
}

LearningCurve run_planner(const RunConfig& cfg, const Environment& env,
                          const DifferentiableModel& model,
                          std::uint64_t run_index) {
  cfg.validate();
  check_model(env, model);
  LearningCurve curve;
  Recorder rec(cfg, env, curve);
  ActionSequence u = initial_actions(cfg, env, run_index);
  OptimizerState opt(cfg.optimizer, cfg.eta, env.horizon(), env.action_dim());
  drive(cfg, rec, curve, u, [&](std::int64_t k) {
    // The true rollout only measures J; learning uses the imagined pass.
    const bool stop = rec.evaluate(k, u);
    const GradientSequence g = planner_gradient(env, model, u);
    rec.diagnose(k, u, g);
    if (!stop) apply_update(opt, u, g);
    return stop;
  });
  return curve;
}

LearningCurve run_on_trajectory(const RunConfig& cfg, const Environment& env,
                                std::uint64_t run_index) {
  cfg.validate();
  LearningCurve curve;
  Recorder rec(cfg, env, curve);
  ActionSequence u = initial_actions(cfg, env, run_index);
  OptimizerState opt(cfg.optimizer, cfg.eta, env.horizon(), env.action_dim());
  Rng rng = make_rng(cfg.seed, run_index, kNoiseStream);
  const bool affine = cfg.algorithm == Algorithm::kOnTrajectoryAffine;
  std::vector<Trajectory> perturbed(cfg.rollouts);
  drive(cfg, rec, curve, u, [&](std::int64_t k) {
    const Trajectory ref = rollout(env, u, rec.learning());
    const bool stop = rec.record(k, ref.return_J, u);
    for (auto& traj : perturbed) {
      traj = rollout(env, white_noise_perturb(u, cfg.sigma, rng), rec.learning());
    }
    FixedProvider provider(affine ? fit_on_trajectory_affine(
                                        transitions_by_step(perturbed))
                                  : fit_on_trajectory(ref, perturbed));
    const GradientSequence g = backward_pass(ref, provider, env).gradient;
    rec.diagnose(k, u, g);
    if (!stop) apply_update(opt, u, g);
    return stop;
  });
  return curve;
}

OffTrajectoryStep off_trajectory_iteration(const Environment& env,
                                           RlsState& rls, ActionSequence& mean,
                                           OptimizerState& opt, double sigma,
                                           Rng& rng, RolloutCounter& counter) {
  OffTrajectoryStep step;
  step.rollout = rollout(env, white_noise_perturb(mean, sigma, rng), counter);
  RlsProvider provider(rls);
  step.gradient = backward_pass(step.rollout, provider, env).gradient;
  apply_update(opt, mean, step.gradient);
  return step;
}

LearningCurve run_off_trajectory(const RunConfig& cfg, const Environment& env,
                                 std::uint64_t run_index) {
  cfg.validate();
  LearningCurve curve;
  Recorder rec(cfg, env, curve);
  ActionSequence u = initial_actions(cfg, env, run_index);
  OptimizerState opt(cfg.optimizer, cfg.eta, env.horizon(), env.action_dim());
  Rng rng = make_rng(cfg.seed, run_index, kNoiseStream);
  RlsState rls(env.horizon(), env.state_dim(), env.action_dim(), cfg.alpha,
               cfg.q0, cfg.rls_init);
  drive(cfg, rec, curve, u, [&](std::int64_t k) {
    if (k % cfg.eval_every == 0 && rec.evaluate(k, u)) return true;
    if (cfg.oracle) {
      const ActionSequence before = u;
      const OffTrajectoryStep step =
          off_trajectory_iteration(env, rls, u, opt, cfg.sigma, rng, rec.learning());
      rec.diagnose(k, before, step.gradient);
    } else {
      off_trajectory_iteration(env, rls, u, opt, cfg.sigma, rng, rec.learning());
    }
    return false;
  });
  return curve;
}

GradientSequence finite_difference_gradient(
    const ActionSequence& reference, double reference_return,
    std::span<const ActionSequence> samples, std::span<const double> returns) {
  if (samples.empty() || samples.size() != returns.size()) {
    throw std::invalid_argument(
        "finite_difference_gradient: need M >= 1 samples with returns");
  }
  const Eigen::Index n = reference.size();
  const Eigen::Index M = static_cast<Eigen::Index>(samples.size());
  Matrix X(M, n);
  Vector y(M);
  for (Eigen::Index i = 0; i < M; ++i) {
    const ActionSequence& s = samples[i];
    if (s.rows() != reference.rows() || s.cols() != reference.cols()) {
      throw DimensionMismatch("finite_difference_gradient: sample shape");
    }
    // Row-major storage makes vec(u) the raw data order.
    X.row(i) = Eigen::Map<const Vector>(s.data(), n).transpose() -
               Eigen::Map<const Vector>(reference.data(), n).transpose();
    y[i] = returns[i] - reference_return;
  }
  const Vector g = Eigen::CompleteOrthogonalDecomposition<Matrix>(X).solve(y);
  GradientSequence out(reference.rows(), reference.cols());
  Eigen::Map<Vector>(out.data(), n) = g;
  return out;
}

LearningCurve run_finite_difference(const RunConfig& cfg,
                                    const Environment& env,
                                    std::uint64_t run_index) {
  cfg.validate();
  LearningCurve curve;
  Recorder rec(cfg, env, curve);
  ActionSequence u = initial_actions(cfg, env, run_index);
  OptimizerState opt(cfg.optimizer, cfg.eta, env.horizon(), env.action_dim());
  Rng rng = make_rng(cfg.seed, run_index, kNoiseStream);
  std::vector<ActionSequence> samples(cfg.rollouts);
  std::vector<double> returns(cfg.rollouts);
  drive(cfg, rec, curve, u, [&](std::int64_t k) {
    const double J_ref = evaluate_return(env, u, rec.learning());
    const bool stop = rec.record(k, J_ref, u);
    for (int i = 0; i < cfg.rollouts; ++i) {
      samples[i] = white_noise_perturb(u, cfg.sigma, rng);
      returns[i] = evaluate_return(env, samples[i], rec.learning());
    }
    const GradientSequence g =
        finite_difference_gradient(u, J_ref, samples, returns);
    rec.diagnose(k, u, g);
    if (!stop) apply_update(opt, u, g);
    return stop;
  });
  return curve;
}

ActionSequence cem_update(std::span<const ActionSequence> samples,
                          std::span<const double> returns, int elite) {
  if (samples.empty() || samples.size() != returns.size()) {
    throw std::invalid_argument("cem_update: need matching samples and returns");
  }
  if (elite < 1 || elite > static_cast<int>(samples.size())) {
    throw std::invalid_argument("cem_update: need 1 <= L <= M");
  }
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return returns[a] > returns[b];
  });
  ActionSequence mean = ActionSequence::Zero(samples[0].rows(), samples[0].cols());
  for (int i = 0; i < elite; ++i) mean += samples[order[i]];
  return mean / static_cast<double>(elite);
}

LearningCurve run_cem(const RunConfig& cfg, const Environment& env,
                      std::uint64_t run_index) {
  cfg.validate();
  LearningCurve curve;
  Recorder rec(cfg, env, curve);
  ActionSequence u = initial_actions(cfg, env, run_index);
  Rng rng = make_rng(cfg.seed, run_index, kNoiseStream);
  std::vector<ActionSequence> samples(cfg.rollouts);
  std::vector<double> returns(cfg.rollouts);
  const int elite = cfg.elite_size();
  drive(cfg, rec, curve, u, [&](std::int64_t k) {
    if (k % cfg.eval_every == 0 && rec.evaluate(k, u)) return true;
    for (int i = 0; i < cfg.rollouts; ++i) {
      samples[i] = white_noise_perturb(u, cfg.sigma, rng);
      returns[i] = evaluate_return(env, samples[i], rec.learning());
    }
    u = cem_update(samples, returns, elite);
    return false;
  });
  return curve;
}

// ---------------------------------------------------------------------------

BuiltModel build_model(const RunConfig& cfg, const Environment& env,
                       std::uint64_t run_index) {
  BuiltModel built;
  if (cfg.model == "mlp") {
    Rng rng = make_rng(cfg.seed, run_index, kTrainingStream);
    RolloutCounter counter;
    MlpConfig mlp = cfg.mlp;
    built.model = train_mlp_model(env, mlp, rng, counter);
    built.rollouts = counter.count();
    return built;
  }
  if (const auto* pendulum = dynamic_cast<const PendulumEnv*>(&env)) {
    if (cfg.model == "true") {
      built.model = std::make_shared<const PendulumModel>(pendulum->params());
    } else {
      Rng rng = make_rng(cfg.seed, run_index, kModelStream);
      built.model = perturbed_pendulum_model(pendulum->params(),
                                             cfg.model_scale, rng())
                        .model;
    }
    return built;
  }
  if (const auto* lq = dynamic_cast<const LinearQuadraticEnv*>(&env)) {
    if (cfg.model != "true") {
      throw ConfigError("model",
                        "only the true model is available for linear envs");
    }
    built.model = std::make_shared<const LinearModel>(lq->A(), lq->B(), lq->c());
    return built;
  }
  throw ConfigError("model", "no model available for this environment");
}

LearningCurve run_algorithm(const RunConfig& cfg, const Environment& env,
                            std::uint64_t run_index) {
  switch (cfg.algorithm) {
    case Algorithm::kOracle:
      return run_oracle(cfg, env, run_index);
    case Algorithm::kModelBased:
    case Algorithm::kPlanner: {
      const BuiltModel built = build_model(cfg, env, run_index);
      RunConfig run_cfg = cfg;
      LearningCurve curve;
      // Model-fitting rollouts count toward the sample budget.
      if (cfg.algorithm == Algorithm::kModelBased) {
        curve = run_model_based(run_cfg, env, *built.model, run_index);
      } else {
        curve = run_planner(run_cfg, env, *built.model, run_index);
      }
      curve.model_rollouts = built.rollouts;
      for (CurvePoint& p : curve.points) p.rollouts += built.rollouts;
      return curve;
    }
    case Algorithm::kOnTrajectory:
    case Algorithm::kOnTrajectoryAffine:
      return run_on_trajectory(cfg, env, run_index);
    case Algorithm::kOffTrajectory:
      return run_off_trajectory(cfg, env, run_index);
    case Algorithm::kFiniteDifference:
      return run_finite_difference(cfg, env, run_index);
    case Algorithm::kCem:
      return run_cem(cfg, env, run_index);
  }
  throw ConfigError("algorithm", "unhandled algorithm");
}

}  // namespace olrl
