#include "olrl/jacobians.hpp"

#include <Eigen/Cholesky>

#include "olrl/errors.hpp"

namespace olrl {

RlsState::RlsState(int horizon, int state_dim, int action_dim, double alpha,
                   double q0, RlsInit init)
    : D_(state_dim), K_(action_dim), alpha_(alpha), q0_(q0) {
  if (horizon < 1 || state_dim < 1 || action_dim < 1) {
    throw std::invalid_argument("RlsState: dimensions must be positive");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("RlsState: alpha must lie in (0,1]");
  }
  if (!(q0 > 0.0)) throw std::invalid_argument("RlsState: q0 must be > 0");
  const int n = feature_dim();
  F_.assign(horizon, Matrix::Zero(D_, n));
  if (init == RlsInit::kIdentity) {
    for (Matrix& F : F_) F.leftCols(D_).setIdentity();
  }
  Q_.assign(horizon, q0 * Matrix::Identity(n, n));
}

JacobianEstimate RlsState::estimate(int t) const {
  const Matrix& F = F_.at(t);
  JacobianEstimate jac;
  jac.t = t;
  jac.A = F.leftCols(D_).transpose();
  jac.B = F.middleCols(D_, K_).transpose();
  jac.c = F.col(D_ + K_);
  return jac;
}

void RlsState::update(int t, const ConstVectorRef& z,
                      const ConstVectorRef& x_next) {
  const int n = feature_dim();
  if (z.size() != n || x_next.size() != D_) {
    throw DimensionMismatch("rls_update: z or x_next has wrong size");
  }
  Matrix& Q = Q_.at(t);
  Matrix& F = F_.at(t);
  Q *= alpha_;
  Q.diagonal().array() += (1.0 - alpha_) * q0_;
  Q.noalias() += z * z.transpose();
  Eigen::LLT<Matrix> llt(Q);
  if (llt.info() != Eigen::Success) {
    throw NumericOverflow(t, "rls_update: precision matrix lost definiteness");
  }
  const Vector gain = llt.solve(z);
  const Vector residual = x_next - F * z;
  F.noalias() += residual * gain.transpose();
}

void rls_update(RlsState& state, int t, const ConstVectorRef& z,
                const ConstVectorRef& x_next) {
  state.update(t, z, x_next);
}

RlsProvider::RlsProvider(RlsState& state)
    : state_(state), z_(state.feature_dim()) {}

JacobianEstimate RlsProvider::estimate(int t, const ConstVectorRef& x,
                                       const ConstVectorRef& u,
                                       const Trajectory& traj) {
  const int D = state_.state_dim(), K = state_.action_dim();
  z_.head(D) = x;
  z_.segment(D, K) = u;
  z_[D + K] = 1.0;
  state_.update(t, z_, traj.states.row(t + 1));
  return state_.estimate(t);
}

}  // namespace olrl
