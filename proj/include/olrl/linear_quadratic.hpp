#pragma once

#include <vector>

#include "olrl/environment.hpp"

namespace olrl {

/// Optimal open-loop solution of a finite-horizon LQR problem.
struct RiccatiSolution {
  std::vector<Matrix> cost_to_go;  // P_0 .. P_T, v_t(x) = -x' P_t x
  std::vector<Matrix> gains;       // K_0 .. K_{T-1}, u_t = -K_t x_t
  ActionSequence actions;          // optimal open-loop actions from x0
  double optimal_return = 0.0;     // J* = -x0' P_0 x0
};

/// x' = A x + B u + c with r = -x'Qx - u'Ru and r_T = -x'Qf x.
///
/// A and B are stored in the usual state-space convention (A is D x D acting
/// on x); the gradient-layout Jacobians are their transposes.
class LinearQuadraticEnv final : public Environment {
 public:
  LinearQuadraticEnv(Matrix A, Matrix B, Vector c, Matrix Q, Matrix R,
                     Matrix Qf, Vector x0, int horizon);

  const Matrix& A() const { return A_; }
  const Matrix& B() const { return B_; }
  const Vector& c() const { return c_; }
  const Matrix& Q() const { return Q_; }
  const Matrix& R() const { return R_; }
  const Matrix& Qf() const { return Qf_; }

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

  /// Backward Riccati recursion. Requires c == 0 and R + B'P B positive
  /// definite at every step.
  RiccatiSolution riccati() const;

  /// Hessian of J with respect to vec(u) (row-major T*K ordering). J is
  /// quadratic, so this is constant.
  Matrix return_hessian() const;

  /// Smallest L with ||grad J(u) - grad J(w)|| <= L ||u - w||, i.e. the
  /// spectral norm of the Hessian.
  double smoothness_constant() const;

 private:
  Matrix A_, B_;
  Vector c_;
  Matrix Q_, R_, Qf_;
};

using LqrPtr = std::shared_ptr<const LinearQuadraticEnv>;

/// Validates dimensions, symmetry, Q and Qf PSD, R PD.
LqrPtr lqr_env(const Matrix& A, const Matrix& B, const Matrix& Q,
               const Matrix& R, const Matrix& Qf, const Vector& x0,
               int horizon);

/// Exactly linear (affine) system with zero running reward and
/// r_T = -||x||^2.
LqrPtr linear_env(const Matrix& A, const Matrix& B, const Vector& c,
                  const Vector& x0, int horizon);

/// Random LQR instance with spectral radius of A at most `max_radius`.
LqrPtr random_lqr_env(int state_dim, int action_dim, int horizon, Rng& rng,
                      double max_radius = 0.95);

}  // namespace olrl
