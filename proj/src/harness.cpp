#include "olrl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "olrl/errors.hpp"
#include "olrl/linear_quadratic.hpp"
#include "olrl/noise.hpp"
#include "olrl/pendulum.hpp"
#include "olrl/theory.hpp"

namespace olrl {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Every accepted key with its reader and writer.
struct Field {
  const char* key;
  std::function<void(RunConfig&, const json&)> read;
  std::function<ordered_json(const RunConfig&)> write;
};

template <class T>
T get_as(const json& v, const char* key) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(key, std::string(key) + " must be a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) {
        throw ConfigError(key, std::string(key) + " must be an integer");
      }
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
          throw ConfigError(key, std::string(key) + " must be non-negative");
        }
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(key, std::string(key) + " must be a number");
    } else {
      if (!v.is_string()) throw ConfigError(key, std::string(key) + " must be a string");
    }
    return v.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(key, std::string(key) + ": " + e.what());
  }
}

template <class T>
Field member(const char* key, T RunConfig::*m) {
  return {key, [m, key](RunConfig& c, const json& v) { c.*m = get_as<T>(v, key); },
          [m](const RunConfig& c) { return ordered_json(c.*m); }};
}

template <class T>
Field pendulum_member(const char* key, T PendulumParams::*m) {
  return {key,
          [m, key](RunConfig& c, const json& v) { c.pendulum.*m = get_as<T>(v, key); },
          [m](const RunConfig& c) { return ordered_json(c.pendulum.*m); }};
}

template <class T>
Field mlp_member(const char* key, T MlpConfig::*m) {
  return {key, [m, key](RunConfig& c, const json& v) { c.mlp.*m = get_as<T>(v, key); },
          [m](const RunConfig& c) { return ordered_json(c.mlp.*m); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = {
      member("env", &RunConfig::env),
      member("T", &RunConfig::horizon),
      pendulum_member("cart_mass", &PendulumParams::cart_mass),
      pendulum_member("tip_mass", &PendulumParams::tip_mass),
      pendulum_member("length", &PendulumParams::length),
      pendulum_member("linear_friction", &PendulumParams::linear_friction),
      pendulum_member("rotational_friction", &PendulumParams::rotational_friction),
      pendulum_member("dt", &PendulumParams::dt),
      pendulum_member("force_unit", &PendulumParams::force_unit),
      member("lqr_state_dim", &RunConfig::lqr_state_dim),
      member("lqr_action_dim", &RunConfig::lqr_action_dim),
      member("lqr_seed", &RunConfig::lqr_seed),
      {"algorithm",
       [](RunConfig& c, const json& v) {
         c.algorithm = parse_algorithm(get_as<std::string>(v, "algorithm"));
       },
       [](const RunConfig& c) { return ordered_json(std::string(to_string(c.algorithm))); }},
      member("N", &RunConfig::iterations),
      member("eta", &RunConfig::eta),
      {"optimizer",
       [](RunConfig& c, const json& v) {
         try {
           c.optimizer = parse_optimizer_kind(get_as<std::string>(v, "optimizer"));
         } catch (const std::invalid_argument& e) {
           throw ConfigError("optimizer", e.what());
         }
       },
       [](const RunConfig& c) { return ordered_json(std::string(to_string(c.optimizer))); }},
      member("init_std", &RunConfig::init_std),
      member("sigma", &RunConfig::sigma),
      member("M", &RunConfig::rollouts),
      member("alpha", &RunConfig::alpha),
      member("q0", &RunConfig::q0),
      {"rls_init",
       [](RunConfig& c, const json& v) {
         c.rls_init = parse_rls_init(get_as<std::string>(v, "rls_init"));
       },
       [](const RunConfig& c) { return ordered_json(std::string(to_string(c.rls_init))); }},
      member("L", &RunConfig::elite),
      member("model", &RunConfig::model),
      member("s", &RunConfig::model_scale),
      {"mlp_hidden",
       [](RunConfig& c, const json& v) {
         if (!v.is_array()) throw ConfigError("mlp_hidden", "mlp_hidden must be an array");
         std::vector<int> h;
         for (const json& e : v) h.push_back(get_as<int>(e, "mlp_hidden"));
         c.mlp.hidden = h;
       },
       [](const RunConfig& c) { return ordered_json(c.mlp.hidden); }},
      mlp_member("mlp_epochs", &MlpConfig::epochs),
      mlp_member("mlp_batch_size", &MlpConfig::batch_size),
      mlp_member("mlp_step_size", &MlpConfig::step_size),
      mlp_member("mlp_weight_decay", &MlpConfig::weight_decay),
      mlp_member("mlp_rollouts", &MlpConfig::rollouts),
      mlp_member("mlp_noise_scale", &MlpConfig::noise_scale),
      member("seed", &RunConfig::seed),
      member("eval_every", &RunConfig::eval_every),
      member("threshold", &RunConfig::threshold),
      member("oracle", &RunConfig::oracle),
      member("monitor_mu", &RunConfig::monitor_mu),
      member("monitor_nu", &RunConfig::monitor_nu),
      member("stop_when_solved", &RunConfig::stop_when_solved),
  };
  return all;
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  // nlohmann reports the position one past the offending character.
  return {line, std::max(1, col - 1)};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  return out;
}

void close_output(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace

ordered_json config_to_json(const RunConfig& cfg) {
  ordered_json j = ordered_json::object();
  for (const Field& f : fields()) j[f.key] = f.write(cfg);
  return j;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("<json>", "config must be a JSON object");
  RunConfig cfg;
  for (const auto& [key, value] : j.items()) {
    const auto it = std::find_if(fields().begin(), fields().end(),
                                 [&](const Field& f) { return key == f.key; });
    if (it == fields().end()) throw ConfigError(key, "unknown key '" + key + "'");
    it->read(cfg, value);
  }
  cfg.validate();
  return cfg;
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    throw ConfigError("<json>", "JSON syntax error at line " + std::to_string(line) +
                                    ", column " + std::to_string(col));
  }
  return config_from_json(j);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open config");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

EnvPtr make_environment(const RunConfig& cfg) {
  if (cfg.env == "pendulum") return pendulum_env(cfg.pendulum, cfg.horizon);
  Rng rng = make_rng(cfg.lqr_seed, 0, 0);
  if (cfg.env == "lqr") {
    return random_lqr_env(cfg.lqr_state_dim, cfg.lqr_action_dim, cfg.horizon, rng);
  }
  if (cfg.env == "linear") {
    const auto lq = random_lqr_env(cfg.lqr_state_dim, cfg.lqr_action_dim, cfg.horizon, rng);
    return linear_env(lq->A(), lq->B(), Vector::Zero(cfg.lqr_state_dim),
                      lq->spec().x0, cfg.horizon);
  }
  throw ConfigError("env", "unknown env '" + cfg.env + "'");
}

std::pair<double, double> bootstrap_ci(const std::vector<double>& samples,
                                       double level, int resamples, Rng& rng) {
  if (samples.empty()) throw std::invalid_argument("bootstrap_ci: no samples");
  if (!(level > 0.0 && level < 1.0) || resamples < 1) {
    throw std::invalid_argument("bootstrap_ci: need level in (0,1), resamples >= 1");
  }
  const std::size_t n = samples.size();
  if (std::all_of(samples.begin(), samples.end(),
                  [&](double x) { return x == samples[0]; })) {
    return {samples[0], samples[0]};
  }
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> means(resamples);
  for (double& m : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += samples[pick(rng)];
    m = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(resamples - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const std::size_t j = std::min(i + 1, means.size() - 1);
    return means[i] + (pos - static_cast<double>(i)) * (means[j] - means[i]);
  };
  const double tail = 0.5 * (1.0 - level);
  return {quantile(tail), quantile(1.0 - tail)};
}

ExperimentResult run_experiment(const RunConfig& cfg,
                                const std::vector<std::uint64_t>& seeds,
                                int threads) {
  if (seeds.empty()) throw ConfigError("seeds", "at least one seed is required");
  cfg.validate();
  ExperimentResult result;
  result.config = cfg;
  result.config_hash = config_hash(cfg);
  result.seeds.resize(seeds.size());

  const EnvPtr env = make_environment(cfg);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      SeedResult& r = result.seeds[i];
      r.seed = seeds[i];
      try {
        r.curve = run_algorithm(cfg, *env, seeds[i]);
        r.error = r.curve.error;
      } catch (const std::exception& e) {
        r.error = e.what();
      }
      r.J_max = r.curve.points.empty() ? -std::numeric_limits<double>::infinity()
                                       : r.curve.J_max;
      r.solved = r.curve.solved(cfg.threshold);
      r.rollouts_to_solve = r.curve.rollouts_to_solve(cfg.threshold);
    }
  };
  const int n_threads = std::clamp(threads, 1, static_cast<int>(seeds.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Aggregation; the bootstrap stream depends only on the master seed.
  Rng rng = make_rng(cfg.seed, 0, 4);
  std::vector<double> solved, jmax, to_solve;
  for (const SeedResult& r : result.seeds) {
    solved.push_back(r.solved ? 1.0 : 0.0);
    jmax.push_back(r.J_max);
    to_solve.push_back(r.rollouts_to_solve
                           ? static_cast<double>(*r.rollouts_to_solve)
                           : std::numeric_limits<double>::infinity());
    result.n_failed += r.error.has_value();
  }
  const double n = static_cast<double>(seeds.size());
  result.solve_rate.value = std::accumulate(solved.begin(), solved.end(), 0.0) / n;
  std::tie(result.solve_rate.lo, result.solve_rate.hi) = bootstrap_ci(solved, 0.95, 10000, rng);
  if (std::all_of(jmax.begin(), jmax.end(), [](double v) { return std::isfinite(v); })) {
    result.mean_J_max.value = std::accumulate(jmax.begin(), jmax.end(), 0.0) / n;
    std::tie(result.mean_J_max.lo, result.mean_J_max.hi) = bootstrap_ci(jmax, 0.95, 10000, rng);
  } else {
    result.mean_J_max = {-std::numeric_limits<double>::infinity(),
                         -std::numeric_limits<double>::infinity(),
                         -std::numeric_limits<double>::infinity()};
  }
  result.median_J_max = median(jmax);
  const double m = median(to_solve);
  if (std::isfinite(m)) result.median_rollouts_to_solve = m;

  // Mean-J band over the iterations recorded by every seed.
  std::map<std::int64_t, std::vector<double>> by_iteration;
  for (const SeedResult& r : result.seeds) {
    for (const CurvePoint& p : r.curve.points) by_iteration[p.iteration].push_back(p.J);
  }
  const std::int64_t stride = recording_stride(cfg.iterations);
  for (const auto& [k, values] : by_iteration) {
    if (values.size() != seeds.size()) continue;
    if (k % stride != 0 && k != cfg.iterations) continue;
    CurveCiPoint p;
    p.iteration = k;
    p.mean_J = std::accumulate(values.begin(), values.end(), 0.0) / n;
    const auto [lo, hi] = bootstrap_ci(values, 0.95, 1000, rng);
    p.lo = std::min(lo, p.mean_J);
    p.hi = std::max(hi, p.mean_J);
    result.curve_ci.push_back(p);
  }
  return result;
}

std::int64_t recording_stride(std::int64_t iterations) {
  if (iterations <= 2000) return 1;
  return (iterations + 1999) / 2000;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = config_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

void emit_results(const ExperimentResult& result,
                  const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir.string(), ec.message());

  const std::int64_t stride = recording_stride(result.config.iterations);
  {
    const auto path = out_dir / "curves.csv";
    std::ofstream out = open_output(path);
    out << "seed,iteration,rollouts,J,J_max\n";
    for (const SeedResult& r : result.seeds) {
      const auto& pts = r.curve.points;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const CurvePoint& p = pts[i];
        if (p.iteration % stride != 0 && i + 1 != pts.size()) continue;
        out << r.seed << ',' << p.iteration << ',' << p.rollouts << ','
            << format_double(p.J) << ',' << format_double(p.J_max) << '\n';
      }
    }
    close_output(out, path);
  }
  {
    const auto path = out_dir / "summary.csv";
    std::ofstream out = open_output(path);
    auto row = [&](const char* name, double v, double lo, double hi) {
      out << name << ',' << format_double(v) << ',' << format_double(lo) << ','
          << format_double(hi) << '\n';
    };
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out << "metric,value,ci_lo,ci_hi\n";
    row("solve_rate", result.solve_rate.value, result.solve_rate.lo, result.solve_rate.hi);
    row("mean_J_max", result.mean_J_max.value, result.mean_J_max.lo, result.mean_J_max.hi);
    row("median_J_max", result.median_J_max, nan, nan);
    row("median_rollouts_to_solve",
        result.median_rollouts_to_solve.value_or(std::numeric_limits<double>::infinity()),
        nan, nan);
    row("n_seeds", static_cast<double>(result.seeds.size()), nan, nan);
    row("n_failed", static_cast<double>(result.n_failed), nan, nan);
    close_output(out, path);
  }
  {
    const auto path = out_dir / "curve_ci.csv";
    std::ofstream out = open_output(path);
    out << "iteration,mean_J,ci_lo,ci_hi\n";
    for (const CurveCiPoint& p : result.curve_ci) {
      out << p.iteration << ',' << format_double(p.mean_J) << ','
          << format_double(p.lo) << ',' << format_double(p.hi) << '\n';
    }
    close_output(out, path);
  }
  {
    const auto path = out_dir / "config.json";
    std::ofstream out = open_output(path);
    ordered_json meta;
    meta["config"] = config_to_json(result.config);
    std::vector<std::uint64_t> seeds;
    ordered_json errors = ordered_json::object();
    for (const SeedResult& r : result.seeds) {
      seeds.push_back(r.seed);
      if (r.error) errors[std::to_string(r.seed)] = *r.error;
    }
    meta["seeds"] = seeds;
    meta["errors"] = errors;
    meta["config_hash"] = result.config_hash;
    meta["version"] = result.version;
    out << meta.dump(2) << '\n';
    close_output(out, path);
  }
}

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  auto parse_one = [&](const std::string& s) -> std::uint64_t {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (s.empty() || pos != s.size() || s[0] == '-') {
      throw ConfigError("seeds", "invalid seed list '" + spec + "'");
    }
    return v;
  };
  std::vector<std::uint64_t> seeds;
  if (spec.find(',') == std::string::npos) {
    const std::uint64_t n = parse_one(spec);
    if (n == 0) throw ConfigError("seeds", "seed count must be positive");
    for (std::uint64_t i = 0; i < n; ++i) seeds.push_back(i);
    return seeds;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) seeds.push_back(parse_one(item));
  return seeds;
}

// ---------------------------------------------------------------------------

std::vector<GradientSuiteRow> gradient_suite(int samples, double h,
                                             std::uint64_t seed,
                                             double action_std) {
  std::vector<GradientSuiteRow> rows;
  Rng rng = make_rng(seed, 0, 5);
  const EnvPtr pendulum = pendulum_env();
  Rng lqr_rng = make_rng(seed, 1, 5);
  const EnvPtr lqr = random_lqr_env(3, 2, 20, lqr_rng);
  for (const auto& [name, env] : {std::pair{"pendulum", pendulum}, std::pair{"lqr", lqr}}) {
    for (int i = 0; i < samples; ++i) {
      const ActionSequence u =
          gaussian_actions(env->horizon(), env->action_dim(), action_std, rng);
      const GradientCheck c = gradient_check(*env, u, h);
      rows.push_back({name, i, c.max_relative_error, c.t, c.k});
    }
  }
  return rows;
}

std::vector<LqrSuiteRow> lqr_suite(int instances, int iterations,
                                   std::uint64_t seed) {
  std::vector<LqrSuiteRow> rows;
  for (int i = 0; i < instances; ++i) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(i), 6);
    const int D = 1 + static_cast<int>(rng() % 4);
    const int K = 1 + static_cast<int>(rng() % 2);
    const int T = 5 + static_cast<int>(rng() % 16);
    const auto env = random_lqr_env(D, K, T, rng);

    LqrSuiteRow row;
    row.instance = i;
    row.D = D;
    row.K = K;
    row.T = T;
    row.J_star = env->riccati().optimal_return;
    row.L = env->smoothness_constant();
    row.eta = 1.0 / row.L;

    RunConfig cfg;
    cfg.env = "lqr";
    cfg.horizon = T;
    cfg.algorithm = Algorithm::kModelBased;
    cfg.optimizer = OptimizerKind::kPlain;
    cfg.eta = row.eta;
    cfg.iterations = iterations;
    cfg.seed = seed;
    cfg.init_std = 0.1;
    cfg.oracle = true;
    cfg.threshold = -std::numeric_limits<double>::max();
    const LinearModel model(env->A(), env->B(), env->c());
    const LearningCurve curve = run_model_based(cfg, *env, model, i);
    if (curve.error) throw Error("lqr_suite: " + *curve.error);
    row.J_initial = curve.points.front().J;
    row.J_final = curve.points.back().J;
    row.iterations = curve.iterations_run;

    TheoryConstants constants;
    constants.L = row.L;
    constants.eta = row.eta;
    const Theorem1Report report = theorem1_report(curve, constants, row.J_star);
    row.theorem1_violations = report.violations();
    for (const Theorem1Row& r : report.rows) {
      if (r.rhs > 0.0) row.worst_ratio = std::max(row.worst_ratio, r.lhs / r.rhs);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace olrl
