#include "olrl/theory.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "olrl/errors.hpp"
#include "olrl/pontryagin.hpp"

namespace olrl {

namespace {

struct SingularRange {
  double min = 0.0;
  double max = 0.0;
};

SingularRange singular_range(const Matrix& m) {
  const Vector s = Eigen::JacobiSVD<Matrix>(m).singularValues();
  if (s.size() == 0) return {};
  return {s.minCoeff(), s.maxCoeff()};
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues()[0];
}

double ratio(const SingularRange& r) {
  return r.max > 0.0 ? r.min / r.max : 0.0;
}

}  // namespace

Assumption2Bounds assumption2_bounds(
    const std::vector<JacobianEstimate>& true_jacs, double gamma,
    double zeta) {
  const int T = static_cast<int>(true_jacs.size());
  std::vector<SingularRange> sx(T), su(T);
  for (int t = 0; t < T; ++t) {
    sx[t] = singular_range(true_jacs[t].A);
    su[t] = singular_range(true_jacs[t].B);
  }
  Assumption2Bounds out;
  out.rhs_A.resize(T);
  out.rhs_B.resize(T);
  for (int t = 0; t < T; ++t) {
    out.rhs_B[t] = zeta * su[t].min;
    double chain = ratio(su[t]);
    double scale = gamma;
    for (int s = 1; t + s < T; ++s) {
      scale /= 3.0;
      out.rhs_A[t].push_back(scale * chain * sx[t + s].min);
      chain *= ratio(sx[t + s]);
    }
  }
  return out;
}

int Assumption2Check::violations() const {
  int n = 0;
  for (const auto& row : ok_A) n += static_cast<int>(std::count(row.begin(), row.end(), false));
  n += static_cast<int>(std::count(ok_B.begin(), ok_B.end(), false));
  return n;
}

Assumption2Check assumption2_check(
    const std::vector<JacobianEstimate>& true_jacs,
    const std::vector<JacobianEstimate>& estimates, double gamma,
    double zeta) {
  if (true_jacs.size() != estimates.size()) {
    throw DimensionMismatch("assumption2_check: sequence lengths differ");
  }
  const int T = static_cast<int>(true_jacs.size());
  Assumption2Check out;
  out.bounds = assumption2_bounds(true_jacs, gamma, zeta);
  std::vector<double> err_x(T);
  out.error_B.resize(T);
  out.ok_B.resize(T);
  for (int t = 0; t < T; ++t) {
    const JacobianEstimate& truth = true_jacs[t];
    const JacobianEstimate& est = estimates[t];
    if (truth.A.rows() != est.A.rows() || truth.A.cols() != est.A.cols() ||
        truth.B.rows() != est.B.rows() || truth.B.cols() != est.B.cols()) {
      throw DimensionMismatch("assumption2_check: Jacobian shapes differ");
    }
    err_x[t] = spectral_norm(est.A - truth.A);
    out.error_B[t] = spectral_norm(est.B - truth.B);
    out.ok_B[t] = out.error_B[t] <= out.bounds.rhs_B[t];
  }
  out.error_A.resize(T);
  out.ok_A.resize(T);
  bool all = std::all_of(out.ok_B.begin(), out.ok_B.end(), [](bool b) { return b; });
  for (int t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < out.bounds.rhs_A[t].size(); ++i) {
      const double e = err_x[t + 1 + i];
      out.error_A[t].push_back(e);
      const bool ok = e <= out.bounds.rhs_A[t][i];
      out.ok_A[t].push_back(ok);
      all = all && ok;
    }
  }
  out.constants_ok = gamma + zeta + gamma * zeta < 1.0;
  out.verdict = all && out.constants_ok;
  return out;
}

int Theorem1Report::violations() const {
  return static_cast<int>(std::count_if(
      rows.begin(), rows.end(), [](const Theorem1Row& r) { return !r.satisfied; }));
}

Theorem1Report theorem1_report(const LearningCurve& curve,
                               const TheoryConstants& constants,
                               double J_star) {
  const double alpha = constants.alpha();
  if (!(alpha > 0.0)) {
    throw ConfigError("eta", "step size too large: alpha = mu - eta L nu^2 / 2 "
                             "must be positive");
  }
  if (curve.true_grad_count < 1 || curve.points.empty()) {
    throw ConfigError("oracle", "curve carries no oracle gradient record");
  }
  Theorem1Report report;
  report.iterations = curve.true_grad_count;
  report.alpha = alpha;
  const double N = static_cast<double>(curve.true_grad_count);
  const double rhs = (J_star - curve.points.front().J) / (alpha * constants.eta * N);
  for (Eigen::Index t = 0; t < curve.true_grad_sq_sum.size(); ++t) {
    Theorem1Row row;
    row.t = static_cast<int>(t);
    row.lhs = curve.true_grad_sq_sum[t] / N;
    row.rhs = rhs;
    row.satisfied = row.lhs <= row.rhs;
    report.rows.push_back(row);
  }
  return report;
}

double GradientQuality::fraction_both() const {
  if (inner_ok.empty()) return 1.0;
  int both = 0;
  for (std::size_t t = 0; t < inner_ok.size(); ++t) both += inner_ok[t] && norm_ok[t];
  return static_cast<double>(both) / static_cast<double>(inner_ok.size());
}

GradientQuality gradient_quality_monitor(const GradientSequence& g,
                                         const GradientSequence& true_g,
                                         double mu, double nu) {
  if (g.rows() != true_g.rows() || g.cols() != true_g.cols()) {
    throw DimensionMismatch("gradient_quality_monitor: shapes differ");
  }
  if (mu > nu) throw std::invalid_argument("gradient_quality_monitor: mu > nu");
  GradientQuality q;
  for (Eigen::Index t = 0; t < g.rows(); ++t) {
    const double sq = true_g.row(t).squaredNorm();
    q.inner_ok.push_back(g.row(t).dot(true_g.row(t)) >= mu * sq);
    q.norm_ok.push_back(g.row(t).norm() <= nu * std::sqrt(sq));
  }
  return q;
}

GradientCheck gradient_check(const Environment& env,
                             const ActionSequence& actions, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("gradient_check: h must be > 0");
  RolloutCounter scratch;
  const GradientSequence g = true_gradient(env, actions, scratch);
  GradientCheck out;
  ActionSequence probe = actions;
  for (Eigen::Index t = 0; t < actions.rows(); ++t) {
    for (Eigen::Index k = 0; k < actions.cols(); ++k) {
      const double u = actions(t, k);
      probe(t, k) = u + h;
      const double Jp = evaluate_return(env, probe, scratch);
      probe(t, k) = u - h;
      const double Jm = evaluate_return(env, probe, scratch);
      probe(t, k) = u;
      const double fd = (Jp - Jm) / (2.0 * h);
      const double diff = std::abs(g(t, k) - fd);
      const double rel =
          diff == 0.0 ? 0.0
                      : diff / std::max({std::abs(g(t, k)), std::abs(fd), 1e-8});
      if (rel > out.max_relative_error) {
        out = {rel, static_cast<int>(t), static_cast<int>(k)};
      }
    }
  }
  return out;
}

double estimate_smoothness(const Environment& env,
                           const ActionSequence& actions, int samples,
                           double radius, Rng& rng) {
  if (samples < 1 || !(radius > 0.0)) {
    throw std::invalid_argument("estimate_smoothness: need samples >= 1, radius > 0");
  }
  RolloutCounter scratch;
  const GradientSequence g0 = true_gradient(env, actions, scratch);
  std::normal_distribution<double> normal(0.0, 1.0);
  double L = 0.0;
  for (int i = 0; i < samples; ++i) {
    ActionSequence d(actions.rows(), actions.cols());
    for (Eigen::Index j = 0; j < d.size(); ++j) d.data()[j] = normal(rng);
    d *= radius / d.norm();
    const GradientSequence g1 = true_gradient(env, actions + d, scratch);
    L = std::max(L, (g1 - g0).norm() / radius);
  }
  return L;
}

}  // namespace olrl
