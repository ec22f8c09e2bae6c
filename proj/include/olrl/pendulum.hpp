#pragma once

#include <array>
#include <cmath>

#include "olrl/environment.hpp"

namespace olrl {

/// Cart-pole with a point-mass tip on a massless rod and viscous friction.
struct PendulumParams {
  double cart_mass = 1.0;             // m1 [kg]
  double tip_mass = 0.1;              // m2 [kg]
  double length = 0.5;                // m3 [m]
  double linear_friction = 0.01;      // m4 [N s / m]
  double rotational_friction = 0.01;  // m5 [N m s / rad]
  double dt = 0.01;                   // integration step [s]
  double force_unit = 50.0;           // force per unit action [N]

  static constexpr double kGravity = 9.81;

  void validate() const;

  /// (m1, ..., m5) in order.
  std::array<double, 5> physical() const;
  PendulumParams with_physical(const std::array<double, 5>& m) const;
};

/// Time derivative of x = (l, l_dot, theta, theta_dot) with theta = 0 upright.
template <class S>
Eigen::Matrix<S, 4, 1> pendulum_derivative(const PendulumParams& p,
                                           const Eigen::Matrix<S, 4, 1>& x,
                                           const S& action) {
  using std::cos;
  using std::sin;
  const S force = p.force_unit * action;
  const S s = sin(x[2]);
  const S c = cos(x[2]);
  const double m1 = p.cart_mass, m2 = p.tip_mass, m3 = p.length;
  // Mass matrix [[m11, m12], [m12, m22]] of the (l, theta) coordinates.
  const double m11 = m1 + m2;
  const S m12 = m2 * m3 * c;
  const double m22 = m2 * m3 * m3;
  const S f1 = force - p.linear_friction * x[1] + m2 * m3 * s * x[3] * x[3];
  const S f2 = m2 * PendulumParams::kGravity * m3 * s -
               p.rotational_friction * x[3];
  const S det = m11 * m22 - m12 * m12;
  Eigen::Matrix<S, 4, 1> dx;
  dx[0] = x[1];
  dx[1] = (m22 * f1 - m12 * f2) / det;
  dx[2] = x[3];
  dx[3] = (m11 * f2 - m12 * f1) / det;
  return dx;
}

/// One classical Runge-Kutta step of length p.dt.
template <class S>
Eigen::Matrix<S, 4, 1> pendulum_rk4_step(const PendulumParams& p,
                                         const Eigen::Matrix<S, 4, 1>& x,
                                         const S& action) {
  const double h = p.dt;
  const Eigen::Matrix<S, 4, 1> k1 = pendulum_derivative<S>(p, x, action);
  const Eigen::Matrix<S, 4, 1> k2 =
      pendulum_derivative<S>(p, (x + (0.5 * h) * k1).eval(), action);
  const Eigen::Matrix<S, 4, 1> k3 =
      pendulum_derivative<S>(p, (x + (0.5 * h) * k2).eval(), action);
  const Eigen::Matrix<S, 4, 1> k4 =
      pendulum_derivative<S>(p, (x + h * k3).eval(), action);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Swing-up task: starts hanging down at rest, r = -0.001 u^2,
/// r_T = -||x||_1.
class PendulumEnv final : public Environment {
 public:
  PendulumEnv(const PendulumParams& params, int horizon);

  const PendulumParams& params() const { return params_; }

  using Environment::step;
  void step(const ConstVectorRef& x, const ConstVectorRef& u,
            VectorRef next) const override;
  double running_reward(const ConstVectorRef& x,
                        const ConstVectorRef& u) const override;
  double terminal_reward(const ConstVectorRef& x) const override;
  void running_reward_gradient(const ConstVectorRef& x, const ConstVectorRef& u,
                               VectorRef dx, VectorRef du) const override;
  void terminal_reward_gradient(const ConstVectorRef& x,
                                VectorRef dx) const override;

  static constexpr double kActionPenalty = 0.001;
  static constexpr double kSolveThreshold = -0.03;

 private:
  PendulumParams params_;
};

std::shared_ptr<const PendulumEnv> pendulum_env(
    const PendulumParams& params = {}, int horizon = 100);

}  // namespace olrl
