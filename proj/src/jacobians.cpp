#include "olrl/jacobians.hpp"

#include <string>

#include <Eigen/QR>

#include "olrl/errors.hpp"

namespace olrl {

JacobianEstimate oracle_jacobians(const Environment& env,
                                  const ConstVectorRef& x,
                                  const ConstVectorRef& u, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("oracle_jacobians: h must be > 0");
  const int D = env.state_dim(), K = env.action_dim();
  JacobianEstimate jac;
  jac.A.resize(D, D);
  jac.B.resize(K, D);
  Vector xp = x, up = u, plus(D), minus(D);
  const double inv = 0.5 / h;
  for (int i = 0; i < D; ++i) {
    xp[i] = x[i] + h;
    env.step(xp, u, plus);
    xp[i] = x[i] - h;
    env.step(xp, u, minus);
    xp[i] = x[i];
    jac.A.row(i) = ((plus - minus) * inv).transpose();
  }
  for (int i = 0; i < K; ++i) {
    up[i] = u[i] + h;
    env.step(x, up, plus);
    up[i] = u[i] - h;
    env.step(x, up, minus);
    up[i] = u[i];
    jac.B.row(i) = ((plus - minus) * inv).transpose();
  }
  if (!jac.A.allFinite() || !jac.B.allFinite()) {
    throw DivergedProbe("oracle_jacobians: non-finite probe result");
  }
  return jac;
}

OracleProvider::OracleProvider(const Environment& env, double h)
    : env_(env), h_(h) {}

JacobianEstimate OracleProvider::estimate(int t, const ConstVectorRef& x,
                                          const ConstVectorRef& u,
                                          const Trajectory&) {
  JacobianEstimate jac = oracle_jacobians(env_, x, u, h_);
  jac.t = t;
  return jac;
}

JacobianEstimate model_jacobians(const DifferentiableModel& model,
                                 const ConstVectorRef& x,
                                 const ConstVectorRef& u) {
  if (x.size() != model.state_dim() || u.size() != model.action_dim()) {
    throw DimensionMismatch("model_jacobians: model dimensions do not match");
  }
  return model.jacobians(x, u);
}

ModelProvider::ModelProvider(const DifferentiableModel& model)
    : model_(model) {}

JacobianEstimate ModelProvider::estimate(int t, const ConstVectorRef& x,
                                         const ConstVectorRef& u,
                                         const Trajectory&) {
  JacobianEstimate jac = model_jacobians(model_, x, u);
  jac.t = t;
  return jac;
}

FixedProvider::FixedProvider(std::vector<JacobianEstimate> estimates)
    : estimates_(std::move(estimates)) {}

JacobianEstimate FixedProvider::estimate(int t, const ConstVectorRef&,
                                         const ConstVectorRef&,
                                         const Trajectory&) {
  return estimates_.at(t);
}

namespace {

// Minimum-Frobenius-norm solution of X W = Y.
Matrix min_norm_solve(const Matrix& X, const Matrix& Y) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(X);
  return cod.solve(Y);
}

void check_same_shape(const Trajectory& a, const Trajectory& b) {
  if (a.actions.rows() != b.actions.rows() ||
      a.actions.cols() != b.actions.cols() ||
      a.states.rows() != b.states.rows() ||
      a.states.cols() != b.states.cols()) {
    throw DimensionMismatch("trajectories have different shapes");
  }
}

}  // namespace

std::vector<JacobianEstimate> fit_on_trajectory(
    const Trajectory& ref, std::span<const Trajectory> perturbed) {
  if (perturbed.empty()) {
    throw std::invalid_argument("fit_on_trajectory: need M >= 1");
  }
  for (const Trajectory& p : perturbed) check_same_shape(ref, p);
  const int T = ref.horizon();
  const int D = static_cast<int>(ref.states.cols());
  const int K = static_cast<int>(ref.actions.cols());
  const int M = static_cast<int>(perturbed.size());

  std::vector<JacobianEstimate> out(T);
  Matrix X(M, D + K), Y(M, D);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < M; ++i) {
      X.row(i).head(D) = perturbed[i].states.row(t) - ref.states.row(t);
      X.row(i).tail(K) = perturbed[i].actions.row(t) - ref.actions.row(t);
      Y.row(i) = perturbed[i].states.row(t + 1) - ref.states.row(t + 1);
    }
    const Matrix W = min_norm_solve(X, Y);  // (D+K) x D = [A_t; B_t]
    out[t].t = t;
    out[t].A = W.topRows(D);
    out[t].B = W.bottomRows(K);
  }
  return out;
}

std::vector<JacobianEstimate> fit_on_trajectory_affine(
    const std::vector<std::vector<Transition>>& transitions) {
  std::vector<JacobianEstimate> out(transitions.size());
  for (std::size_t t = 0; t < transitions.size(); ++t) {
    const auto& samples = transitions[t];
    if (samples.empty()) {
      throw std::invalid_argument("fit_on_trajectory_affine: need M >= 1");
    }
    const Eigen::Index D = samples.front().x.size();
    const Eigen::Index K = samples.front().u.size();
    const Eigen::Index M = static_cast<Eigen::Index>(samples.size());
    Matrix X(M, D + K), Y(M, D);
    for (Eigen::Index i = 0; i < M; ++i) {
      const Transition& s = samples[i];
      if (s.x.size() != D || s.u.size() != K || s.next.size() != D) {
        throw DimensionMismatch("fit_on_trajectory_affine: sample shape");
      }
      X.row(i) << s.x.transpose(), s.u.transpose();
      Y.row(i) = s.next.transpose();
    }
    // The offset is unpenalized: fit on centered data, then c = y_bar - W' z_bar.
    const Eigen::RowVectorXd z_bar = X.colwise().mean();
    const Eigen::RowVectorXd y_bar = Y.colwise().mean();
    const Matrix W = min_norm_solve(X.rowwise() - z_bar, Y.rowwise() - y_bar);
    out[t].t = static_cast<int>(t);
    out[t].A = W.topRows(D);
    out[t].B = W.bottomRows(K);
    out[t].c = (y_bar - z_bar * W).transpose();
  }
  return out;
}

std::vector<std::vector<Transition>> transitions_by_step(
    std::span<const Trajectory> trajectories) {
  if (trajectories.empty()) return {};
  const int T = trajectories.front().horizon();
  std::vector<std::vector<Transition>> out(T);
  for (const Trajectory& traj : trajectories) {
    check_same_shape(trajectories.front(), traj);
    for (int t = 0; t < T; ++t) {
      out[t].push_back({traj.states.row(t).transpose(),
                        traj.actions.row(t).transpose(),
                        traj.states.row(t + 1).transpose()});
    }
  }
  return out;
}

}  // namespace olrl
