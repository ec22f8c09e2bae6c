#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "olrl/algorithms.hpp"

namespace olrl {

inline constexpr const char* kVersion = "olrl 0.1.0";

/// Flat JSON object mirroring RunConfig. Keys use the short symbols
/// (N, M, eta, sigma, alpha, q0, L, s, T) where RunConfig spells them out.
nlohmann::ordered_json config_to_json(const RunConfig& cfg);

/// Applies the keys of `j` on top of the defaults. Unknown keys, wrong types
/// and invalid values raise ConfigError naming the field.
RunConfig config_from_json(const nlohmann::json& j);

/// Parses UTF-8 JSON text; syntax errors are reported as
/// ConfigError("<json>", "... at line L, column C").
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Environment described by cfg.env (pendulum, lqr, linear).
EnvPtr make_environment(const RunConfig& cfg);

/// Percentile bootstrap of the mean. Throws std::invalid_argument on empty
/// input.
std::pair<double, double> bootstrap_ci(const std::vector<double>& samples,
                                       double level, int resamples, Rng& rng);

struct Interval {
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct SeedResult {
  std::uint64_t seed = 0;
  LearningCurve curve;
  double J_max = 0.0;
  bool solved = false;
  std::optional<std::int64_t> rollouts_to_solve;
  std::optional<std::string> error;
};

struct CurveCiPoint {
  std::int64_t iteration = 0;
  double mean_J = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct ExperimentResult {
  RunConfig config;
  std::vector<SeedResult> seeds;
  Interval solve_rate;
  Interval mean_J_max;
  double median_J_max = 0.0;
  /// Median over all seeds; unsolved seeds count as never solving.
  std::optional<double> median_rollouts_to_solve;
  int n_failed = 0;
  std::vector<CurveCiPoint> curve_ci;
  std::string config_hash;
  std::string version = kVersion;
};

/// One run per seed; `seeds[i]` selects the run's RNG streams under the
/// master seed cfg.seed. Failures are recorded per seed.
ExperimentResult run_experiment(const RunConfig& cfg,
                                const std::vector<std::uint64_t>& seeds,
                                int threads = 1);

/// Iterations kept in curves.csv: all for N <= 2000, else every ceil(N/2000)
/// plus the last recorded one.
std::int64_t recording_stride(std::int64_t iterations);

/// Writes curves.csv, summary.csv, curve_ci.csv and config.json into
/// `out_dir` (created if missing). Throws IoError naming the path.
void emit_results(const ExperimentResult& result,
                  const std::filesystem::path& out_dir);

/// 17 significant digits; shortest round-trip form is not required.
std::string format_double(double v);

/// FNV-1a of the canonical config JSON, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// "5" -> 0..4, "1,3,7" -> {1,3,7}.
std::vector<std::uint64_t> parse_seeds(const std::string& spec);

// ---------------------------------------------------------------------------
// Verification suites shared by the CLI `check` command and the tests.

struct GradientSuiteRow {
  std::string env;
  int sample = 0;
  double max_relative_error = 0.0;
  int t = 0;
  int k = 0;
};

/// `samples` random action sequences (std `action_std`) on the pendulum and
/// on a random LQR instance.
std::vector<GradientSuiteRow> gradient_suite(int samples, double h,
                                             std::uint64_t seed,
                                             double action_std = 0.5);

struct LqrSuiteRow {
  int instance = 0;
  int D = 0, K = 0, T = 0;
  double J_star = 0.0;
  double J_final = 0.0;
  double J_initial = 0.0;
  double L = 0.0;
  double eta = 0.0;
  std::int64_t iterations = 0;
  int theorem1_violations = 0;
  double worst_ratio = 0.0;  // max_t lhs / rhs
};

/// Model-based runs with the true model and plain ascent at eta = 1/L on
/// random LQR instances (D <= 4, K <= 2, T <= 20), with the convergence
/// bound evaluated along each run.
std::vector<LqrSuiteRow> lqr_suite(int instances, int iterations,
                                   std::uint64_t seed);

}  // namespace olrl
