#include "olrl/pendulum.hpp"

#include <numbers>
#include <stdexcept>

namespace olrl {

namespace {

EnvSpec pendulum_spec(int horizon) {
  EnvSpec spec;
  spec.state_dim = 4;
  spec.action_dim = 1;
  spec.horizon = horizon;
  spec.x0 = Vector::Zero(4);
  spec.x0[2] = std::numbers::pi;
  return spec;
}

}  // namespace

void PendulumParams::validate() const {
  for (double m : physical()) {
    if (!(m > 0.0) || !std::isfinite(m)) {
      throw std::invalid_argument(
          "PendulumParams: physical parameters must be positive");
    }
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("PendulumParams: dt must be positive");
  }
  if (!std::isfinite(force_unit)) {
    throw std::invalid_argument("PendulumParams: force_unit must be finite");
  }
}

std::array<double, 5> PendulumParams::physical() const {
  return {cart_mass, tip_mass, length, linear_friction, rotational_friction};
}

PendulumParams PendulumParams::with_physical(
    const std::array<double, 5>& m) const {
  PendulumParams p = *this;
  p.cart_mass = m[0];
  p.tip_mass = m[1];
  p.length = m[2];
  p.linear_friction = m[3];
  p.rotational_friction = m[4];
  return p;
}

PendulumEnv::PendulumEnv(const PendulumParams& params, int horizon)
    : Environment(pendulum_spec(horizon)), params_(params) {
  params_.validate();
}

void PendulumEnv::step(const ConstVectorRef& x, const ConstVectorRef& u,
                       VectorRef next) const {
  const Eigen::Vector4d s(x[0], x[1], x[2], x[3]);
  next = pendulum_rk4_step<double>(params_, s, u[0]);
}

double PendulumEnv::running_reward(const ConstVectorRef&,
                                   const ConstVectorRef& u) const {
  return -kActionPenalty * u[0] * u[0];
}

double PendulumEnv::terminal_reward(const ConstVectorRef& x) const {
  return -x.lpNorm<1>();
}

void PendulumEnv::running_reward_gradient(const ConstVectorRef&,
                                          const ConstVectorRef& u,
                                          VectorRef dx, VectorRef du) const {
  dx.setZero();
  du[0] = -2.0 * kActionPenalty * u[0];
}

void PendulumEnv::terminal_reward_gradient(const ConstVectorRef& x,
                                           VectorRef dx) const {
  // Subgradient 0 at exact zeros.
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    dx[i] = x[i] > 0.0 ? -1.0 : (x[i] < 0.0 ? 1.0 : 0.0);
  }
}

std::shared_ptr<const PendulumEnv> pendulum_env(const PendulumParams& params,
                                                int horizon) {
  return std::make_shared<const PendulumEnv>(params, horizon);
}

}  // namespace olrl
