// Acceptance checks. Usage: acceptance [C1 C2 ... C12]; no arguments runs
// every criterion. Prints one PASS/FAIL line per criterion and exits
// nonzero if any requested criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "olrl/algorithms.hpp"
#include "olrl/harness.hpp"
#include "olrl/jacobians.hpp"
#include "olrl/linear_quadratic.hpp"
#include "olrl/models.hpp"
#include "olrl/pendulum.hpp"
#include "olrl/pontryagin.hpp"

using namespace olrl;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::uint64_t> seed_range(int n) {
  std::vector<std::uint64_t> s(n);
  for (int i = 0; i < n; ++i) s[i] = static_cast<std::uint64_t>(i);
  return s;
}

int failures = 0;

void verdict(const char* id, bool ok, const std::string& detail) {
  std::printf("%s %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string rate_str(const ExperimentResult& r) {
  return fmt("%.2f", r.solve_rate.value);
}

ExperimentResult run(const std::string& label, const RunConfig& cfg, int n_seeds) {
  const auto t0 = Clock::now();
  ExperimentResult r = run_experiment(cfg, seed_range(n_seeds));
  std::printf("  [%s] solve_rate=%.2f median_J_max=%.5f median_r2s=%s failed=%d (%.0f s)\n",
              label.c_str(), r.solve_rate.value, r.median_J_max,
              r.median_rollouts_to_solve ? fmt("%.0f", *r.median_rollouts_to_solve).c_str()
                                         : "none",
              r.n_failed, seconds_since(t0));
  std::fflush(stdout);
  return r;
}

RunConfig pendulum_config(Algorithm a) {
  RunConfig cfg;
  cfg.algorithm = a;
  // The verdicts depend only on whether and when J_max first exceeds the
  // threshold, so solved runs may stop there.
  cfg.stop_when_solved = true;
  return cfg;
}

// ---------------------------------------------------------------------------

void criterion_1() {
  const auto t0 = Clock::now();
  const auto rows = gradient_suite(10, 1e-5, 0);
  const double elapsed = seconds_since(t0);
  double worst = 0.0;
  int pendulum = 0, lqr = 0;
  for (const auto& r : rows) {
    worst = std::max(worst, r.max_relative_error);
    (r.env == "pendulum" ? pendulum : lqr)++;
  }
  verdict("C1", pendulum == 10 && lqr == 10 && worst <= 1e-4 && elapsed < 30.0,
          "max relative error " + fmt("%.3g", worst) + " (limit 1e-4), " +
              fmt("%.1f", elapsed) + " s (limit 30 s)");
}

void criteria_2_3() {
  const auto t0 = Clock::now();
  const auto rows = lqr_suite(10, 20000, 0);
  const double elapsed = seconds_since(t0);
  double worst_gap = 0.0, worst_ratio = 0.0;
  int violations = 0;
  bool dims_ok = rows.size() == 10;
  for (const auto& r : rows) {
    worst_gap = std::max(worst_gap, std::abs(r.J_star - r.J_final));
    worst_ratio = std::max(worst_ratio, r.worst_ratio);
    violations += r.theorem1_violations;
    dims_ok = dims_ok && r.D <= 4 && r.K <= 2 && r.T <= 20;
  }
  verdict("C2", dims_ok && worst_gap <= 1e-6 && elapsed < 60.0,
          "worst |J* - J| " + fmt("%.3g", worst_gap) + " (limit 1e-6) over " +
              std::to_string(rows.size()) + " instances, " + fmt("%.1f", elapsed) +
              " s (limit 60 s)");
  verdict("C3", dims_ok && violations == 0,
          std::to_string(violations) + " bound violations, worst lhs/rhs " +
              fmt("%.3g", worst_ratio));
}

void criterion_4() {
  const auto r = run("oracle", pendulum_config(Algorithm::kOracle), 20);
  int solved = 0;
  for (const auto& s : r.seeds) solved += s.solved;
  verdict("C4", solved >= 19 && r.n_failed == 0,
          std::to_string(solved) + "/20 seeds solved (need 19)");
}

std::optional<ExperimentResult> on_trajectory_1e3;

void criteria_5_7(bool want5, bool want7) {
  const double sigmas[] = {1e-2, 1e-3, 1e-4};
  if (want5) {
    bool ok = true;
    std::string detail = "on-trajectory M=10 solve rates";
    for (double sigma : sigmas) {
      RunConfig cfg = pendulum_config(Algorithm::kOnTrajectory);
      cfg.rollouts = 10;
      cfg.sigma = sigma;
      auto r = run("on_trajectory sigma=" + fmt("%g", sigma), cfg, 20);
      ok = ok && r.solve_rate.value >= 0.9 && r.n_failed == 0;
      detail += " " + rate_str(r);
      if (sigma == 1e-3) on_trajectory_1e3 = std::move(r);
    }
    detail += " (need >= 0.9); finite-difference M=10 median J_max";
    for (double sigma : sigmas) {
      RunConfig cfg = pendulum_config(Algorithm::kFiniteDifference);
      cfg.rollouts = 10;
      cfg.sigma = sigma;
      const auto r = run("finite_difference sigma=" + fmt("%g", sigma), cfg, 20);
      ok = ok && r.median_J_max < -0.03;
      detail += " " + fmt("%.4f", r.median_J_max);
    }
    verdict("C5", ok, detail + " (need < -0.03)");
  }
  if (want7) {
    if (!on_trajectory_1e3) {
      RunConfig cfg = pendulum_config(Algorithm::kOnTrajectory);
      cfg.rollouts = 10;
      cfg.sigma = 1e-3;
      on_trajectory_1e3 = run("on_trajectory sigma=0.001", cfg, 20);
    }
    RunConfig cfg = pendulum_config(Algorithm::kOffTrajectory);
    cfg.alpha = 0.8;
    cfg.q0 = 0.001;
    cfg.sigma = 0.001;
    const auto off = run("off_trajectory", cfg, 20);
    const double inf = std::numeric_limits<double>::infinity();
    const double m_off = off.median_rollouts_to_solve.value_or(inf);
    const double m_on = on_trajectory_1e3->median_rollouts_to_solve.value_or(inf);
    verdict("C7",
            rollouts_per_iteration(cfg) == 1 && off.solve_rate.value >= 0.9 &&
                off.n_failed == 0 && m_off < m_on,
            "off-trajectory solve rate " + rate_str(off) + " (need >= 0.9), median rollouts " +
                fmt("%.0f", m_off) + " vs on-trajectory " + fmt("%.0f", m_on));
  }
}

void criterion_6() {
  RunConfig fd = pendulum_config(Algorithm::kFiniteDifference);
  fd.rollouts = 20;
  fd.sigma = 1e-4;
  const auto a = run("finite_difference M=20 sigma=1e-4", fd, 20);
  RunConfig cem = pendulum_config(Algorithm::kCem);
  cem.rollouts = 20;
  cem.sigma = 1e-3;
  cem.elite = 1;
  const auto b = run("cem M=20 sigma=1e-3 L=1", cem, 20);
  verdict("C6", a.solve_rate.value >= 0.8 && b.solve_rate.value >= 0.8,
          "solve rates finite-difference " + rate_str(a) + ", CEM " + rate_str(b) +
              " (need >= 0.8)");
}

void criterion_8() {
  const double scales[] = {0.0, 0.05, 0.1, 0.2, 0.4};
  bool ordering = true, planner_only_at_zero = true;
  double mb_at_01 = 0.0;
  std::string table;
  for (double s : scales) {
    RunConfig cfg = pendulum_config(Algorithm::kModelBased);
    cfg.model = "perturbed";
    cfg.model_scale = s;
    const auto mb = run("model_based s=" + fmt("%g", s), cfg, 10);
    cfg.algorithm = Algorithm::kPlanner;
    const auto pl = run("planner s=" + fmt("%g", s), cfg, 10);
    ordering = ordering && mb.solve_rate.value >= pl.solve_rate.value;
    // Rates carry a +-0.2 tolerance; the s > 0 exclusion uses 0.9 as is.
    if (s == 0.0) planner_only_at_zero = planner_only_at_zero && pl.solve_rate.value >= 0.7;
    if (s > 0.0) planner_only_at_zero = planner_only_at_zero && pl.solve_rate.value < 0.9;
    if (s == 0.1) mb_at_01 = mb.solve_rate.value;
    table += " s=" + fmt("%g", s) + ":" + rate_str(mb) + "/" + rate_str(pl);
  }
  verdict("C8", ordering && planner_only_at_zero && mb_at_01 >= 0.3,
          "model-based/planner solve rates" + table);
}

void criterion_9() {
  RunConfig cfg = pendulum_config(Algorithm::kModelBased);
  cfg.model = "mlp";
  const auto mb = run("model_based mlp", cfg, 10);
  cfg.algorithm = Algorithm::kPlanner;
  const auto pl = run("planner mlp", cfg, 10);
  const double diff = mb.solve_rate.value - pl.solve_rate.value;
  verdict("C9", diff >= 0.4 - 1e-12,
          "model-based " + rate_str(mb) + " minus planner " + rate_str(pl) + " = " +
              fmt("%.2f", diff) + " (need >= 0.4)");
}

Matrix gaussian(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = n(rng);
  return m;
}

void criterion_10() {
  // (a) Per-step deltas (dx_t, du_t) of D+K perturbed rollouts span R^{D+K}
  // at every t once the initial states are perturbed as well.
  double err_a = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Rng rng(100 + trial);
    const int D = 2 + trial % 3, K = 1 + trial % 2, T = 8;
    const Matrix A = gaussian(D, D, rng) * 0.5, B = gaussian(D, K, rng);
    const Vector x0 = gaussian(D, 1, rng);
    const auto env = linear_env(A, B, Vector::Zero(D), x0, T);
    const ActionSequence u = gaussian(T, K, rng);
    const Trajectory ref = rollout(*env, u);
    std::vector<Trajectory> pert;
    for (int i = 0; i < D + K; ++i) {
      const auto shifted = linear_env(A, B, Vector::Zero(D), x0 + 0.1 * gaussian(D, 1, rng), T);
      pert.push_back(rollout(*shifted, ActionSequence(u + 0.1 * gaussian(T, K, rng))));
    }
    for (const auto& e : fit_on_trajectory(ref, pert)) {
      err_a = std::max({err_a, (e.A - A.transpose()).cwiseAbs().maxCoeff(),
                        (e.B - B.transpose()).cwiseAbs().maxCoeff()});
    }
  }

  // (b) alpha = 1: ridge regression toward the initial coefficients.
  double err_b = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Rng rng(200 + trial);
    const int D = 3, K = 2, P = D + K + 1, n = 50;
    const double q0 = 0.05;
    RlsState rls(1, D, K, 1.0, q0, trial % 2 ? RlsInit::kZero : RlsInit::kIdentity);
    const Matrix F0 = rls.coefficients(0);
    Matrix Z(n, P), X = gaussian(n, D, rng);
    Z << gaussian(n, D + K, rng), Matrix::Ones(n, 1);
    for (int i = 0; i < n; ++i) rls_update(rls, 0, Z.row(i).transpose(), X.row(i).transpose());
    const Matrix G = Z.transpose() * Z + q0 * Matrix::Identity(P, P);
    const Matrix ridge = G.ldlt().solve(Z.transpose() * X + q0 * F0.transpose()).transpose();
    err_b = std::max(err_b, (rls.coefficients(0) - ridge).cwiseAbs().maxCoeff());
  }

  // (c) Unrolled precision.
  double err_c = 0.0;
  for (double alpha : {0.5, 0.8, 0.95}) {
    Rng rng(300);
    const double q0 = 0.2;
    RlsState rls(1, 2, 1, alpha, q0);
    std::vector<Vector> zs;
    for (int k = 1; k <= 50; ++k) {
      Vector z(4);
      z << gaussian(3, 1, rng), 1.0;
      zs.push_back(z);
      rls.update(0, z, gaussian(2, 1, rng));
      Matrix expected = q0 * Matrix::Identity(4, 4);
      for (int i = 1; i <= k; ++i) expected += std::pow(alpha, k - i) * zs[i - 1] * zs[i - 1].transpose();
      err_c = std::max(err_c, (rls.precision(0) - expected).cwiseAbs().maxCoeff());
    }
  }

  // (d) Prior floor on random streams and on a degenerate repeated input.
  double floor_gap = 0.0;  // max over steps of q0 - lambda_min, clipped below at 0
  const double q0 = 0.001;
  for (double alpha : {0.5, 0.8, 0.95}) {
    Rng rng(400);
    RlsState random(1, 2, 1, alpha, q0), repeated(1, 2, 1, alpha, q0);
    Vector fixed(4);
    fixed << 1.5, -0.5, 2.0, 1.0;
    for (int k = 0; k < 500; ++k) {
      Vector z(4);
      z << gaussian(3, 1, rng), 1.0;
      random.update(0, z, Vector::Ones(2));
      repeated.update(0, fixed, Vector::Ones(2));
      for (const RlsState* s : {&random, &repeated}) {
        const Eigen::SelfAdjointEigenSolver<Matrix> es(s->precision(0), Eigen::EigenvaluesOnly);
        floor_gap = std::max(floor_gap, q0 - es.eigenvalues().minCoeff());
      }
    }
  }

  verdict("C10", err_a <= 1e-8 && err_b <= 1e-10 && err_c <= 1e-12 && floor_gap <= 1e-12,
          "(a) " + fmt("%.2g", err_a) + " (b) " + fmt("%.2g", err_b) + " (c) " +
              fmt("%.2g", err_c) + " (d) max q0 - lambda_min " + fmt("%.2g", floor_gap));
}

// d J_imagined / d u by forward sensitivities S_t = d x_t / d vec(u) through
// the model; independent of the costate recursion.
GradientSequence forward_sensitivity_gradient(const Environment& env,
                                              const DifferentiableModel& model,
                                              const ActionSequence& u) {
  const int T = env.horizon(), D = env.state_dim(), K = env.action_dim();
  Matrix S = Matrix::Zero(D, T * K);
  Vector x = env.spec().x0;
  Vector grad = Vector::Zero(T * K);
  for (int t = 0; t < T; ++t) {
    const Vector ut = u.row(t).transpose();
    Vector dx(D), du(K);
    env.running_reward_gradient(x, ut, dx, du);
    grad += S.transpose() * dx;
    grad.segment(t * K, K) += du;
    const JacobianEstimate j = model.jacobians(x, ut);
    Matrix next = j.A.transpose() * S;
    next.middleCols(t * K, K) += j.B.transpose();
    S = next;
    x = model.predict(x, ut);
  }
  Vector dT(D);
  env.terminal_reward_gradient(x, dT);
  grad += S.transpose() * dT;
  GradientSequence g(T, K);
  for (int t = 0; t < T; ++t) g.row(t) = grad.segment(t * K, K).transpose();
  return g;
}

void criterion_11() {
  const auto env = pendulum_env();
  Rng rng(500);
  double worst = 0.0;
  for (double s : {0.0, 0.1, 0.4}) {
    const auto model = perturbed_pendulum_model(env->params(), s, 7).model;
    for (int i = 0; i < 5; ++i) {
      const ActionSequence u = gaussian(env->horizon(), 1, rng) * 0.3;
      const GradientSequence planner = planner_gradient(*env, *model, u);
      const GradientSequence direct = forward_sensitivity_gradient(*env, *model, u);
      worst = std::max(worst, (planner - direct).cwiseAbs().maxCoeff() /
                                  std::max(1.0, direct.cwiseAbs().maxCoeff()));
    }
  }
  RunConfig cfg;
  cfg.iterations = 1000;
  cfg.algorithm = Algorithm::kModelBased;
  const LearningCurve mb = run_algorithm(cfg, *env, 3);
  cfg.algorithm = Algorithm::kPlanner;
  const LearningCurve pl = run_algorithm(cfg, *env, 3);
  bool bitwise = mb.final_actions == pl.final_actions && mb.points.size() == pl.points.size();
  for (std::size_t i = 0; bitwise && i < mb.points.size(); ++i) {
    bitwise = mb.points[i].J == pl.points[i].J;
  }
  verdict("C11", worst <= 1e-10 && bitwise,
          "max gradient difference " + fmt("%.2g", worst) + " (limit 1e-10), true-model iterates " +
              (bitwise ? "bitwise identical" : "differ"));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_12() {
  const fs::path base = fs::temp_directory_path() / "olrl_acceptance_determinism";
  fs::remove_all(base);
  int compared = 0, differing = 0;
  const Algorithm algos[] = {Algorithm::kOffTrajectory, Algorithm::kOnTrajectory,
                             Algorithm::kCem, Algorithm::kFiniteDifference};
  for (Algorithm a : algos) {
    RunConfig cfg;
    cfg.algorithm = a;
    cfg.iterations = 300;
    cfg.eval_every = 10;
    const std::string name(to_string(a));
    emit_results(run_experiment(cfg, {0, 1, 2}), base / (name + "_1"));
    emit_results(run_experiment(cfg, {0, 1, 2}, 2), base / (name + "_2"));
    for (const char* f : {"curves.csv", "summary.csv", "curve_ci.csv", "config.json"}) {
      ++compared;
      const std::string x = slurp(base / (name + "_1") / f);
      if (x.empty() || x != slurp(base / (name + "_2") / f)) ++differing;
    }
  }
  fs::remove_all(base);
  verdict("C12", differing == 0,
          std::to_string(compared - differing) + "/" + std::to_string(compared) +
              " output files byte-identical across reruns");
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(argv[i]);
  static const std::set<std::string> known = {"C1", "C2", "C3", "C4",  "C5",  "C6",
                                              "C7", "C8", "C9", "C10", "C11", "C12"};
  for (const auto& w : wanted) {
    if (!known.count(w)) {
      std::fprintf(stderr, "unknown criterion '%s'\n", w.c_str());
      return 2;
    }
  }
  if (wanted.empty()) wanted = known;
  auto want = [&](const char* id) { return wanted.count(id) > 0; };

  const auto t0 = Clock::now();
  if (want("C1")) criterion_1();
  if (want("C2") || want("C3")) criteria_2_3();
  if (want("C10")) criterion_10();
  if (want("C11")) criterion_11();
  if (want("C12")) criterion_12();
  if (want("C4")) criterion_4();
  if (want("C5") || want("C7")) criteria_5_7(want("C5"), want("C7"));
  if (want("C6")) criterion_6();
  if (want("C8")) criterion_8();
  if (want("C9")) criterion_9();
  std::printf("%d failing criteria, %.0f s total\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
