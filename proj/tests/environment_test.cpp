#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "olrl/augment.hpp"
#include "olrl/errors.hpp"
#include "olrl/linear_quadratic.hpp"
#include "olrl/noise.hpp"
#include "olrl/pendulum.hpp"

namespace olrl {
namespace {

using std::numbers::pi;

// Cart-pole accelerations from the Lagrangian, solved with a dense 2x2
// inverse instead of the closed form used by the library.
Eigen::Vector4d reference_derivative(const PendulumParams& p,
                                     const Eigen::Vector4d& x, double u) {
  const double g = PendulumParams::kGravity;
  const double m1 = p.cart_mass, m2 = p.tip_mass, l = p.length;
  Eigen::Matrix2d M;
  M << m1 + m2, m2 * l * std::cos(x[2]), m2 * l * std::cos(x[2]), m2 * l * l;
  Eigen::Vector2d rhs;
  rhs << p.force_unit * u - p.linear_friction * x[1] +
             m2 * l * std::sin(x[2]) * x[3] * x[3],
      m2 * g * l * std::sin(x[2]) - p.rotational_friction * x[3];
  const Eigen::Vector2d acc = M.inverse() * rhs;
  return {x[1], acc[0], x[3], acc[1]};
}

double pendulum_energy(const PendulumParams& p, const Eigen::Vector4d& x) {
  const double m1 = p.cart_mass, m2 = p.tip_mass, l = p.length;
  // Tip at (cart + l sin(theta), l cos(theta)).
  const double vx = x[1] + l * std::cos(x[2]) * x[3];
  const double vy = -l * std::sin(x[2]) * x[3];
  return 0.5 * m1 * x[1] * x[1] + 0.5 * m2 * (vx * vx + vy * vy) +
         m2 * PendulumParams::kGravity * l * std::cos(x[2]);
}

TEST(PendulumTest, DefaultParameters) {
  const PendulumParams p;
  EXPECT_EQ(p.cart_mass, 1.0);
  EXPECT_EQ(p.tip_mass, 0.1);
  EXPECT_EQ(p.length, 0.5);
  EXPECT_EQ(p.linear_friction, 0.01);
  EXPECT_EQ(p.rotational_friction, 0.01);
  EXPECT_EQ(p.dt, 0.01);
  EXPECT_EQ(p.force_unit, 50.0);
  const auto env = pendulum_env();
  EXPECT_EQ(env->state_dim(), 4);
  EXPECT_EQ(env->action_dim(), 1);
  EXPECT_EQ(env->horizon(), 100);
  EXPECT_EQ(env->spec().x0, Eigen::Vector4d(0, 0, pi, 0));
}

TEST(PendulumTest, RejectsNonPositiveParameters) {
  PendulumParams p;
  p.tip_mass = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  EXPECT_THROW(pendulum_env(p), std::invalid_argument);
  p = {};
  p.dt = -0.01;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(PendulumTest, ZeroActionsStayAtHangingEquilibrium) {
  const auto env = pendulum_env();
  RolloutCounter counter;
  const Trajectory traj = rollout(*env, ActionSequence::Zero(100, 1), counter);
  EXPECT_EQ(counter.count(), 1);
  for (int t = 0; t <= 100; ++t) {
    for (int i = 0; i < 4; ++i) {
      EXPECT_NEAR(traj.states(t, i), env->spec().x0[i], 1e-9);
    }
  }
  EXPECT_NEAR(traj.return_J, -pi, 1e-9);
}

TEST(PendulumTest, Rewards) {
  const auto env = pendulum_env();
  const Eigen::Vector4d x(0.3, -1.0, 2.0, 0.5);
  EXPECT_DOUBLE_EQ(env->running_reward(x, Vector::Constant(1, 1.0)), -0.001);
  EXPECT_DOUBLE_EQ(env->running_reward(x, Vector::Constant(1, -2.0)), -0.004);
  EXPECT_EQ(env->terminal_reward(Vector::Zero(4)), 0.0);
  EXPECT_DOUBLE_EQ(env->terminal_reward(x), -3.8);
  Vector dx(4);
  env->terminal_reward_gradient(Eigen::Vector4d(1, 2, 3, 4), dx);
  EXPECT_EQ(dx, Eigen::Vector4d(-1, -1, -1, -1));
  env->terminal_reward_gradient(Eigen::Vector4d(-1, 0, 3, 0), dx);
  EXPECT_EQ(dx, Eigen::Vector4d(1, 0, -1, 0));
}

TEST(PendulumTest, DerivativeMatchesLagrangianReference) {
  const PendulumParams p;
  Rng rng(3);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector4d x(n(rng), n(rng), n(rng), n(rng));
    const double u = n(rng);
    const Eigen::Vector4d ref = reference_derivative(p, x, u);
    const Eigen::Vector4d got = pendulum_derivative<double>(p, x, u);
    EXPECT_LE((got - ref).norm(), 1e-12 * (1.0 + ref.norm()));
  }
}

TEST(PendulumTest, Rk4StepMatchesFineEulerIntegration) {
  const PendulumParams p;
  const auto env = pendulum_env(p);
  const Eigen::Vector4d x0(0, 0, pi, 0);
  const Vector next = env->step(x0, Vector::Constant(1, 0.1));
  Eigen::Vector4d x = x0;
  const int substeps = 1000;
  const double h = p.dt / substeps;
  for (int i = 0; i < substeps; ++i) x += h * reference_derivative(p, x, 0.1);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(next[i], x[i], 1e-6);
}

TEST(PendulumTest, FrictionlessMotionConservesEnergy) {
  PendulumParams p;
  p.linear_friction = 1e-300;  // validation demands positive values
  p.rotational_friction = 1e-300;
  const auto env = pendulum_env(p);
  Eigen::Vector4d x(0.1, 0.4, pi - 0.7, -1.2);
  const double E0 = pendulum_energy(p, x);
  for (int t = 0; t < 300; ++t) x = env->step(x, Vector::Zero(1));
  EXPECT_NEAR(pendulum_energy(p, x), E0, 1e-6 * std::abs(E0));  // RK4 truncation only
}

TEST(PendulumTest, FrictionDissipatesEnergy) {
  const PendulumParams p;
  const auto env = pendulum_env(p);
  Eigen::Vector4d x(0.0, 1.0, pi - 1.0, 2.0);
  double E = pendulum_energy(p, x);
  for (int t = 0; t < 200; ++t) {
    x = env->step(x, Vector::Zero(1));
    const double next = pendulum_energy(p, x);
    EXPECT_LT(next, E);
    E = next;
  }
}

TEST(PendulumTest, Rk4IsFourthOrder) {
  // Error against a much finer RK4 solution shrinks ~16x when dt halves.
  auto integrate = [](double dt, int steps) {
    PendulumParams p;
    p.dt = dt;
    const auto env = pendulum_env(p);
    Eigen::Vector4d x(0, 0, pi - 0.3, 0);
    for (int i = 0; i < steps; ++i) x = env->step(x, Vector::Constant(1, 0.2));
    return x;
  };
  const Eigen::Vector4d ref = integrate(0.1 / 1024, 1024);
  const double e1 = (integrate(0.1 / 4, 4) - ref).norm();
  const double e2 = (integrate(0.1 / 8, 8) - ref).norm();
  EXPECT_GT(e1 / e2, 12.0);
  EXPECT_LT(e1 / e2, 20.0);
}

TEST(EnvironmentTest, RewardGradientsMatchFiniteDifferences) {
  Rng rng(11);
  const auto lqr = random_lqr_env(3, 2, 5, rng);
  const auto pend = pendulum_env();
  std::normal_distribution<double> n(0.0, 1.0);
  const double h = 1e-6;
  for (const EnvPtr& env : {EnvPtr(lqr), EnvPtr(pend)}) {
    const int D = env->state_dim(), K = env->action_dim();
    for (int trial = 0; trial < 100; ++trial) {
      Vector x(D), u(K);
      for (int i = 0; i < D; ++i) x[i] = n(rng);
      for (int i = 0; i < K; ++i) u[i] = n(rng);
      Vector dx(D), du(K), dT(D);
      env->running_reward_gradient(x, u, dx, du);
      env->terminal_reward_gradient(x, dT);
      for (int i = 0; i < D; ++i) {
        Vector xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fd = (env->running_reward(xp, u) - env->running_reward(xm, u)) / (2 * h);
        const double fdT = (env->terminal_reward(xp) - env->terminal_reward(xm)) / (2 * h);
        EXPECT_NEAR(dx[i], fd, 1e-5 * std::max(1.0, std::abs(fd)));
        EXPECT_NEAR(dT[i], fdT, 1e-5 * std::max(1.0, std::abs(fdT)));
      }
      for (int i = 0; i < K; ++i) {
        Vector up = u, um = u;
        up[i] += h;
        um[i] -= h;
        const double fd = (env->running_reward(x, up) - env->running_reward(x, um)) / (2 * h);
        EXPECT_NEAR(du[i], fd, 1e-5 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST(RolloutTest, LinearIntegratorExample) {
  const auto env = linear_env(Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                              Vector::Zero(1), Vector::Zero(1), 2);
  ActionSequence u(2, 1);
  u << 1, -1;
  RolloutCounter counter;
  const Trajectory traj = rollout(*env, u, counter);
  EXPECT_EQ(traj.states(0, 0), 0.0);
  EXPECT_EQ(traj.states(1, 0), 1.0);
  EXPECT_EQ(traj.states(2, 0), 0.0);
  EXPECT_EQ(traj.return_J, 0.0);
}

TEST(RolloutTest, TrajectoryInvariantsAndDeterminism) {
  const auto env = pendulum_env();
  Rng rng(5);
  const ActionSequence u = gaussian_actions(100, 1, 0.3, rng);
  RolloutCounter counter;
  const Trajectory a = rollout(*env, u, counter);
  const Trajectory b = rollout(*env, u, counter);
  EXPECT_EQ(counter.count(), 2);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.return_J, b.return_J);
  EXPECT_EQ(a.states.row(0).transpose(), env->spec().x0);
  double sum = 0.0;
  for (int t = 0; t < 100; ++t) {
    EXPECT_EQ(a.states.row(t + 1).transpose(), env->step(a.states.row(t), u.row(t)));
    EXPECT_EQ(a.running_rewards[t], env->running_reward(a.states.row(t), u.row(t)));
    sum += a.running_rewards[t];
  }
  EXPECT_EQ(a.return_J, sum + a.terminal_reward);
  EXPECT_EQ(evaluate_return(*env, u, counter), a.return_J);
  EXPECT_EQ(counter.count(), 3);
}

TEST(RolloutTest, ShapeAndFinitenessChecks) {
  const auto env = pendulum_env();
  EXPECT_THROW(rollout(*env, ActionSequence::Zero(99, 1)), DimensionMismatch);
  EXPECT_THROW(rollout(*env, ActionSequence::Zero(100, 2)), DimensionMismatch);
  ActionSequence u = ActionSequence::Zero(100, 1);
  u(3, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(rollout(*env, u), std::invalid_argument);
}

TEST(RolloutTest, DivergenceReportsStep) {
  // x' = 10 x + u overflows after a few hundred steps.
  const auto env = linear_env(Matrix::Constant(1, 1, 1e100), Matrix::Identity(1, 1),
                              Vector::Zero(1), Vector::Ones(1), 10);
  try {
    rollout(*env, ActionSequence::Zero(10, 1));
    FAIL() << "expected DivergedRollout";
  } catch (const DivergedRollout& e) {
    EXPECT_EQ(e.step(), 4);
  }
}

TEST(EnvSpecTest, Validation) {
  EnvSpec s;
  s.state_dim = 2;
  s.action_dim = 1;
  s.horizon = 3;
  s.x0 = Vector::Zero(2);
  EXPECT_NO_THROW(s.validate());
  s.horizon = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.horizon = 3;
  s.x0 = Vector::Zero(3);
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.x0 = Vector::Constant(2, std::numeric_limits<double>::infinity());
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(AugmentTest, PreservesReturnsBitForBit) {
  Rng rng(9);
  const EnvPtr pend = pendulum_env();
  const EnvPtr lqr = random_lqr_env(3, 2, 10, rng);
  for (const EnvPtr& env : {pend, lqr}) {
    const EnvPtr aug = augment_terminal_reward(env);
    EXPECT_EQ(aug->state_dim(), env->state_dim() + 1);
    for (int i = 0; i < 50; ++i) {
      const ActionSequence u = gaussian_actions(env->horizon(), env->action_dim(), 0.5, rng);
      EXPECT_EQ(evaluate_return(*aug, u), evaluate_return(*env, u));
    }
  }
}

TEST(AugmentTest, RewardStructure) {
  const EnvPtr aug = augment_terminal_reward(pendulum_env());
  const Vector x = Vector::Constant(5, 0.7);
  const Vector u = Vector::Constant(1, 3.0);
  EXPECT_EQ(aug->running_reward(x, u), 0.0);
  Vector dx(5), du(1), dT(5);
  aug->running_reward_gradient(x, u, dx, du);
  EXPECT_TRUE(dx.isZero(0.0));
  EXPECT_TRUE(du.isZero(0.0));
  aug->terminal_reward_gradient(x, dT);
  EXPECT_EQ(dT[4], 1.0);
  EXPECT_EQ(dT.head(4), Vector::Constant(4, -1.0));
  const Vector next = aug->step(x, u);
  EXPECT_DOUBLE_EQ(next[4], 0.7 - 0.009);
}

}  // namespace
}  // namespace olrl
