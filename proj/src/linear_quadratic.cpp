#include "olrl/linear_quadratic.hpp"

#include <string>

#include <Eigen/Eigenvalues>

#include "olrl/errors.hpp"

namespace olrl {

namespace {

EnvSpec make_spec(const Matrix& B, Vector x0, int horizon) {
  EnvSpec spec;
  spec.state_dim = static_cast<int>(B.rows());
  spec.action_dim = static_cast<int>(B.cols());
  spec.horizon = horizon;
  spec.x0 = std::move(x0);
  return spec;
}

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                   const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionMismatch(std::string(name) + " must be " +
                            std::to_string(rows) + "x" + std::to_string(cols));
  }
}

void require_symmetric(const Matrix& m, const char* name) {
  if (!m.isApprox(m.transpose(), 1e-12) &&
      (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument(std::string(name) + " must be symmetric");
  }
}

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

LinearQuadraticEnv::LinearQuadraticEnv(Matrix A, Matrix B, Vector c, Matrix Q,
                                       Matrix R, Matrix Qf, Vector x0,
                                       int horizon)
    : Environment(make_spec(B, std::move(x0), horizon)),
      A_(std::move(A)),
      B_(std::move(B)),
      c_(std::move(c)),
      Q_(std::move(Q)),
      R_(std::move(R)),
      Qf_(std::move(Qf)) {
  const int D = state_dim(), K = action_dim();
  require_shape(A_, D, D, "A");
  require_shape(B_, D, K, "B");
  require_shape(Q_, D, D, "Q");
  require_shape(R_, K, K, "R");
  require_shape(Qf_, D, D, "Qf");
  if (c_.size() != D) throw DimensionMismatch("c must have D entries");
}

void LinearQuadraticEnv::step(const ConstVectorRef& x, const ConstVectorRef& u,
                              VectorRef next) const {
  next.noalias() = A_ * x;
  next.noalias() += B_ * u;
  next += c_;
}

double LinearQuadraticEnv::running_reward(const ConstVectorRef& x,
                                          const ConstVectorRef& u) const {
  return -x.dot(Q_ * x) - u.dot(R_ * u);
}

double LinearQuadraticEnv::terminal_reward(const ConstVectorRef& x) const {
  return -x.dot(Qf_ * x);
}

void LinearQuadraticEnv::running_reward_gradient(const ConstVectorRef& x,
                                                 const ConstVectorRef& u,
                                                 VectorRef dx,
                                                 VectorRef du) const {
  dx.noalias() = -2.0 * (Q_ * x);
  du.noalias() = -2.0 * (R_ * u);
}

void LinearQuadraticEnv::terminal_reward_gradient(const ConstVectorRef& x,
                                                  VectorRef dx) const {
  dx.noalias() = -2.0 * (Qf_ * x);
}

RiccatiSolution LinearQuadraticEnv::riccati() const {
  if (!c_.isZero(0.0)) {
    throw std::logic_error("riccati: only defined for linear dynamics (c = 0)");
  }
  const int T = horizon(), K = action_dim();
  RiccatiSolution sol;
  sol.cost_to_go.resize(T + 1);
  sol.gains.resize(T);
  sol.cost_to_go[T] = Qf_;
  for (int t = T - 1; t >= 0; --t) {
    const Matrix& P = sol.cost_to_go[t + 1];
    const Matrix S = R_ + B_.transpose() * P * B_;
    Eigen::LLT<Matrix> llt(S);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("riccati: R + B'PB is not positive definite");
    }
    sol.gains[t] = llt.solve(B_.transpose() * P * A_);
    Matrix Pt = Q_ + A_.transpose() * P * A_ -
                A_.transpose() * P * B_ * sol.gains[t];
    sol.cost_to_go[t] = 0.5 * (Pt + Pt.transpose());
  }
  sol.actions.resize(T, K);
  Vector x = spec().x0;
  for (int t = 0; t < T; ++t) {
    const Vector u = -sol.gains[t] * x;
    sol.actions.row(t) = u.transpose();
    x = A_ * x + B_ * u;
  }
  sol.optimal_return = -spec().x0.dot(sol.cost_to_go[0] * spec().x0);
  return sol;
}

Matrix LinearQuadraticEnv::return_hessian() const {
  const int T = horizon(), D = state_dim(), K = action_dim();
  // x_t = Phi_t x0 + sum_{s<t} A^{t-1-s} B u_s; G(t) maps vec(u) to x_t.
  std::vector<Matrix> G(T + 1, Matrix::Zero(D, T * K));
  for (int t = 0; t < T; ++t) {
    G[t + 1] = A_ * G[t];
    G[t + 1].middleCols(t * K, K) += B_;
  }
  Matrix H = Matrix::Zero(T * K, T * K);
  for (int t = 0; t < T; ++t) {
    H += G[t].transpose() * Q_ * G[t];
    H.block(t * K, t * K, K, K) += R_;
  }
  H += G[T].transpose() * Qf_ * G[T];
  return -2.0 * H;
}

double LinearQuadraticEnv::smoothness_constant() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(return_hessian(),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

LqrPtr lqr_env(const Matrix& A, const Matrix& B, const Matrix& Q,
               const Matrix& R, const Matrix& Qf, const Vector& x0,
               int horizon) {
  const Eigen::Index D = A.rows(), K = B.cols();
  require_shape(A, D, D, "A");
  require_shape(B, D, K, "B");
  require_shape(Q, D, D, "Q");
  require_shape(R, K, K, "R");
  require_shape(Qf, D, D, "Qf");
  require_symmetric(Q, "Q");
  require_symmetric(R, "R");
  require_symmetric(Qf, "Qf");
  if (min_eigenvalue(Q) < -1e-12) throw std::invalid_argument("Q must be PSD");
  if (min_eigenvalue(Qf) < -1e-12) {
    throw std::invalid_argument("Qf must be PSD");
  }
  if (!(min_eigenvalue(R) > 0.0)) {
    throw std::invalid_argument("R must be positive definite");
  }
  return std::make_shared<const LinearQuadraticEnv>(
      A, B, Vector::Zero(D), Q, R, Qf, x0, horizon);
}

LqrPtr linear_env(const Matrix& A, const Matrix& B, const Vector& c,
                  const Vector& x0, int horizon) {
  const Eigen::Index D = A.rows(), K = B.cols();
  return std::make_shared<const LinearQuadraticEnv>(
      A, B, c, Matrix::Zero(D, D), Matrix::Zero(K, K), Matrix::Identity(D, D),
      x0, horizon);
}

LqrPtr random_lqr_env(int state_dim, int action_dim, int horizon, Rng& rng,
                      double max_radius) {
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian = [&](int rows, int cols) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = normal(rng);
    return m;
  };
  Matrix A = gaussian(state_dim, state_dim);
  const double radius =
      Eigen::EigenSolver<Matrix>(A, false).eigenvalues().cwiseAbs().maxCoeff();
  if (radius > max_radius) A *= max_radius / radius;
  const Matrix B = gaussian(state_dim, action_dim);
  const Matrix Mq = gaussian(state_dim, state_dim);
  const Matrix Mr = gaussian(action_dim, action_dim);
  const Matrix Mf = gaussian(state_dim, state_dim);
  const Matrix Q = Mq.transpose() * Mq / state_dim;
  const Matrix R = Mr.transpose() * Mr / action_dim +
                   0.5 * Matrix::Identity(action_dim, action_dim);
  const Matrix Qf = Mf.transpose() * Mf / state_dim;
  const Vector x0 = gaussian(state_dim, 1);
  return lqr_env(A, B, Q, R, Qf, x0, horizon);
}

}  // namespace olrl
