#pragma once

#include <span>
#include <vector>

#include "olrl/models.hpp"
#include "olrl/pontryagin.hpp"

namespace olrl {

// ---------------------------------------------------------------------------
// Oracle and model Jacobians

/// Central finite differences of env.step, one column of the state-space
/// Jacobian per probe pair, returned in gradient layout. Uses 2(D+K) step
/// evaluations, which are not counted as rollouts.
JacobianEstimate oracle_jacobians(const Environment& env,
                                  const ConstVectorRef& x,
                                  const ConstVectorRef& u, double h = 1e-6);

class OracleProvider final : public JacobianProvider {
 public:
  explicit OracleProvider(const Environment& env, double h = 1e-6);
  JacobianEstimate estimate(int t, const ConstVectorRef& x,
                            const ConstVectorRef& u,
                            const Trajectory& traj) override;

 private:
  const Environment& env_;
  double h_;
};

JacobianEstimate model_jacobians(const DifferentiableModel& model,
                                 const ConstVectorRef& x,
                                 const ConstVectorRef& u);

class ModelProvider final : public JacobianProvider {
 public:
  explicit ModelProvider(const DifferentiableModel& model);
  JacobianEstimate estimate(int t, const ConstVectorRef& x,
                            const ConstVectorRef& u,
                            const Trajectory& traj) override;

 private:
  const DifferentiableModel& model_;
};

/// Serves a precomputed list of estimates indexed by t.
class FixedProvider final : public JacobianProvider {
 public:
  explicit FixedProvider(std::vector<JacobianEstimate> estimates);
  JacobianEstimate estimate(int t, const ConstVectorRef& x,
                            const ConstVectorRef& u,
                            const Trajectory& traj) override;

 private:
  std::vector<JacobianEstimate> estimates_;
};

// ---------------------------------------------------------------------------
// On-trajectory least squares

/// For every t, the minimum-norm solution of
///   min_{A,B} sum_i || A' dx_t^i + B' du_t^i - dx_{t+1}^i ||^2
/// with deltas taken relative to `ref`.
std::vector<JacobianEstimate> fit_on_trajectory(
    const Trajectory& ref, std::span<const Trajectory> perturbed);

struct Transition {
  Vector x, u, next;
};

/// For every t, a solution of
///   min_{A,B,c} sum_i || A' x_t^i + B' u_t^i + c - x_{t+1}^i ||^2
/// with minimum norm in (A, B); c is left unpenalized. transitions[t] holds
/// the M samples of step t.
std::vector<JacobianEstimate> fit_on_trajectory_affine(
    const std::vector<std::vector<Transition>>& transitions);

/// Collects the per-step transitions of a set of trajectories.
std::vector<std::vector<Transition>> transitions_by_step(
    std::span<const Trajectory> trajectories);

// ---------------------------------------------------------------------------
// Off-trajectory recursive least squares

/// Starting coefficients: identity holds x_{t+1} = x_t (A = I, B = 0,
/// c = 0); zero starts from F = 0.
enum class RlsInit { kIdentity, kZero };

/// Per-step linear models x_{t+1} ~ F_t z_t with z_t = (x_t, u_t, 1) and
/// their precision matrices.
class RlsState {
 public:
  RlsState(int horizon, int state_dim, int action_dim, double alpha,
           double q0, RlsInit init = RlsInit::kIdentity);

  int horizon() const { return static_cast<int>(F_.size()); }
  int state_dim() const { return D_; }
  int action_dim() const { return K_; }
  int feature_dim() const { return D_ + K_ + 1; }
  double alpha() const { return alpha_; }
  double q0() const { return q0_; }

  /// D x (D+K+1), F_t = [A_t' B_t' c_t].
  const Matrix& coefficients(int t) const { return F_.at(t); }
  const Matrix& precision(int t) const { return Q_.at(t); }

  /// A_t, B_t, c_t read off F_t in gradient layout.
  JacobianEstimate estimate(int t) const;

  /// Q_t <- alpha Q_t + (1 - alpha) q0 I + z z'
  /// F_t <- F_t + (x_next - F_t z) (Q_t^{-1} z)'
  void update(int t, const ConstVectorRef& z, const ConstVectorRef& x_next);

 private:
  int D_, K_;
  double alpha_, q0_;
  std::vector<Matrix> F_;
  std::vector<Matrix> Q_;
};

void rls_update(RlsState& state, int t, const ConstVectorRef& z,
                const ConstVectorRef& x_next);

/// Feeds the transition (x_t, u_t) -> x_{t+1} of the queried trajectory into
/// the RLS state and returns the updated estimate.
class RlsProvider final : public JacobianProvider {
 public:
  explicit RlsProvider(RlsState& state);
  JacobianEstimate estimate(int t, const ConstVectorRef& x,
                            const ConstVectorRef& u,
                            const Trajectory& traj) override;

 private:
  RlsState& state_;
  Vector z_;
};

}  // namespace olrl
