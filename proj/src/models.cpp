#include "olrl/models.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/AutoDiff>

#include "olrl/errors.hpp"

namespace olrl {

Vector DifferentiableModel::predict(const ConstVectorRef& x,
                                    const ConstVectorRef& u) const {
  Vector next(state_dim());
  predict(x, u, next);
  return next;
}

PendulumModel::PendulumModel(const PendulumParams& params) : params_(params) {
  params_.validate();
}

void PendulumModel::predict(const ConstVectorRef& x, const ConstVectorRef& u,
                            VectorRef next) const {
  const Eigen::Vector4d s(x[0], x[1], x[2], x[3]);
  next = pendulum_rk4_step<double>(params_, s, u[0]);
}

JacobianEstimate PendulumModel::jacobians(const ConstVectorRef& x,
                                          const ConstVectorRef& u) const {
  using Deriv = Eigen::Matrix<double, 5, 1>;
  using AD = Eigen::AutoDiffScalar<Deriv>;
  Eigen::Matrix<AD, 4, 1> xs;
  for (int i = 0; i < 4; ++i) xs[i] = AD(x[i], 5, i);
  const AD us(u[0], 5, 4);
  const Eigen::Matrix<AD, 4, 1> next = pendulum_rk4_step<AD>(params_, xs, us);
  JacobianEstimate jac;
  jac.A.resize(4, 4);
  jac.B.resize(1, 4);
  for (int j = 0; j < 4; ++j) {
    const Deriv& d = next[j].derivatives();
    for (int i = 0; i < 4; ++i) jac.A(i, j) = d[i];
    jac.B(0, j) = d[4];
  }
  return jac;
}

LinearModel::LinearModel(Matrix A, Matrix B, Vector c)
    : A_(std::move(A)), B_(std::move(B)), c_(std::move(c)) {
  if (A_.rows() != A_.cols() || B_.rows() != A_.rows() ||
      c_.size() != A_.rows()) {
    throw DimensionMismatch("LinearModel: inconsistent dimensions");
  }
}

void LinearModel::predict(const ConstVectorRef& x, const ConstVectorRef& u,
                          VectorRef next) const {
  next.noalias() = A_ * x;
  next.noalias() += B_ * u;
  next += c_;
}

JacobianEstimate LinearModel::jacobians(const ConstVectorRef&,
                                        const ConstVectorRef&) const {
  JacobianEstimate jac;
  jac.A = A_.transpose();
  jac.B = B_.transpose();
  return jac;
}

PerturbedPendulum perturbed_pendulum_model(const PendulumParams& base,
                                           double s, std::uint64_t seed) {
  if (!(s >= 0.0)) {
    throw std::invalid_argument("perturbed_pendulum_model: s must be >= 0");
  }
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  PerturbedPendulum out;
  std::array<double, 5> m = base.physical();
  for (int i = 0; i < 5; ++i) {
    out.multipliers[i] = std::exp(s * normal(rng));
    m[i] *= out.multipliers[i];
  }
  out.model = std::make_shared<const PendulumModel>(base.with_physical(m));
  return out;
}

}  // namespace olrl
