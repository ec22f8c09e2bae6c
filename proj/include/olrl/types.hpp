#pragma once

#include <optional>
#include <random>

#include <Eigen/Dense>

namespace olrl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using ConstVectorRef = Eigen::Ref<const Vector>;
using VectorRef = Eigen::Ref<Vector>;

/// Open-loop action sequence u_{0:T-1}. Row t holds u_t (T x K).
using ActionSequence = RowMatrix;

/// Per-step gradient estimates with the same layout as ActionSequence.
using GradientSequence = RowMatrix;

using Rng = std::mt19937_64;

/// Estimate of the dynamics Jacobians at one time step, in gradient layout:
/// A(i, j) = d f_j / d x_i and B(i, j) = d f_j / d u_i.
struct JacobianEstimate {
  int t = 0;
  Matrix A;  // D x D
  Matrix B;  // K x D
  std::optional<Vector> c;  // affine offset, only from affine fits
};

}  // namespace olrl
