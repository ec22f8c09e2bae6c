#pragma once

#include <cstdint>
#include <vector>

#include "olrl/algorithms.hpp"
#include "olrl/environment.hpp"

namespace olrl {

/// Error levels and step-size constants of the convergence theorem.
struct TheoryConstants {
  double gamma = 0.0;
  double zeta = 0.0;
  double L = 0.0;    // smoothness constant of J
  double eta = 0.0;  // step size

  double mu() const { return 1.0 - gamma - zeta - gamma * zeta; }
  double nu() const { return 1.0 + gamma + zeta + gamma * zeta; }
  /// mu - eta L nu^2 / 2; the theorem needs this to be positive.
  double alpha() const { return mu() - 0.5 * eta * L * nu() * nu(); }
};

/// Admissible Jacobian errors for one trajectory. rhs_A[t][s - 1] bounds
/// ||A_{t+s} - grad_x f_{t+s}|| for s = 1..T-1-t; rhs_B[t] bounds
/// ||B_t - grad_u f_t||.
struct Assumption2Bounds {
  std::vector<std::vector<double>> rhs_A;
  std::vector<double> rhs_B;
};

/// `true_jacs` holds the exact Jacobians of steps 0..T-1 in gradient layout.
Assumption2Bounds assumption2_bounds(
    const std::vector<JacobianEstimate>& true_jacs, double gamma, double zeta);

struct Assumption2Check {
  Assumption2Bounds bounds;
  std::vector<std::vector<double>> error_A;  // same shape as rhs_A
  std::vector<double> error_B;
  std::vector<std::vector<bool>> ok_A;
  std::vector<bool> ok_B;
  bool constants_ok = false;  // gamma + zeta + gamma zeta < 1
  bool verdict = false;

  int violations() const;
};

Assumption2Check assumption2_check(
    const std::vector<JacobianEstimate>& true_jacs,
    const std::vector<JacobianEstimate>& estimates, double gamma, double zeta);

struct Theorem1Row {
  int t = 0;
  double lhs = 0.0;  // (1/N) sum_k ||grad_{u_t} J(u^(k))||^2
  double rhs = 0.0;  // (J* - J(u^(0))) / (alpha eta N)
  bool satisfied = false;
};

struct Theorem1Report {
  std::vector<Theorem1Row> rows;
  std::int64_t iterations = 0;
  double alpha = 0.0;
  int violations() const;
};

/// Needs a curve recorded with the oracle flag. Throws ConfigError when
/// alpha <= 0.
Theorem1Report theorem1_report(const LearningCurve& curve,
                               const TheoryConstants& constants,
                               double J_star);

struct GradientQuality {
  std::vector<bool> inner_ok;  // g_t' dJ_t >= mu ||dJ_t||^2
  std::vector<bool> norm_ok;   // ||g_t|| <= nu ||dJ_t||
  double fraction_both() const;
};

GradientQuality gradient_quality_monitor(const GradientSequence& g,
                                         const GradientSequence& true_g,
                                         double mu, double nu);

struct GradientCheck {
  double max_relative_error = 0.0;
  int t = 0;
  int k = 0;
};

/// Backward-pass gradient with oracle Jacobians against central differences
/// of J with step h. Entry error: |g - fd| / max(|g|, |fd|, 1e-8).
GradientCheck gradient_check(const Environment& env,
                             const ActionSequence& actions, double h = 1e-5);

/// Largest observed ||grad J(u + d) - grad J(u)|| / ||d|| over `samples`
/// random directions of length `radius` around `actions`. A lower estimate
/// of the smoothness constant near `actions`.
double estimate_smoothness(const Environment& env,
                           const ActionSequence& actions, int samples,
                           double radius, Rng& rng);

}  // namespace olrl
