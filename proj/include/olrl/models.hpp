#pragma once

#include <array>
#include <cstdint>
#include <memory>

#include "olrl/pendulum.hpp"
#include "olrl/types.hpp"

namespace olrl {

/// Differentiable approximation f~ of the dynamics.
class DifferentiableModel {
 public:
  virtual ~DifferentiableModel() = default;

  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;

  virtual void predict(const ConstVectorRef& x, const ConstVectorRef& u,
                       VectorRef next) const = 0;
  Vector predict(const ConstVectorRef& x, const ConstVectorRef& u) const;

  /// Jacobians of predict in gradient layout (A: D x D, B: K x D).
  virtual JacobianEstimate jacobians(const ConstVectorRef& x,
                                     const ConstVectorRef& u) const = 0;
};

using ModelPtr = std::shared_ptr<const DifferentiableModel>;

/// Cart-pole dynamics with (possibly wrong) parameters. Jacobians come from
/// forward-mode automatic differentiation through the RK4 step.
class PendulumModel final : public DifferentiableModel {
 public:
  explicit PendulumModel(const PendulumParams& params);

  const PendulumParams& params() const { return params_; }
  int state_dim() const override { return 4; }
  int action_dim() const override { return 1; }
  using DifferentiableModel::predict;
  void predict(const ConstVectorRef& x, const ConstVectorRef& u,
               VectorRef next) const override;
  JacobianEstimate jacobians(const ConstVectorRef& x,
                             const ConstVectorRef& u) const override;

 private:
  PendulumParams params_;
};

/// x' = A x + B u + c with A, B in state-space convention.
class LinearModel final : public DifferentiableModel {
 public:
  LinearModel(Matrix A, Matrix B, Vector c);

  int state_dim() const override { return static_cast<int>(A_.rows()); }
  int action_dim() const override { return static_cast<int>(B_.cols()); }
  using DifferentiableModel::predict;
  void predict(const ConstVectorRef& x, const ConstVectorRef& u,
               VectorRef next) const override;
  JacobianEstimate jacobians(const ConstVectorRef& x,
                             const ConstVectorRef& u) const override;

 private:
  Matrix A_, B_;
  Vector c_;
};

struct PerturbedPendulum {
  std::shared_ptr<const PendulumModel> model;
  std::array<double, 5> multipliers;  // xi_i with ln xi_i ~ N(0, s^2)
};

/// Multiplies each of the five physical parameters by an independent
/// log-normal factor. s = 0 reproduces the exact dynamics.
PerturbedPendulum perturbed_pendulum_model(const PendulumParams& base,
                                           double s, std::uint64_t seed);

}  // namespace olrl
