// Command-line experiment runner.
//
//   olrl run   --config cfg.json --seeds 20 --out results/ [--threads 4]
//   olrl sweep --config cfg.json --key sigma --values 0.01,0.001 --out sweep/
//   olrl check --out checks/

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "olrl/errors.hpp"
#include "olrl/harness.hpp"

namespace {

using olrl::format_double;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitConfigError = 2;

struct Common {
  std::string config_path;
  std::string seeds = "1";
  std::string out;
  int threads = 1;
  std::vector<std::string> overrides;  // key=value, value parsed as JSON
};

void add_common(CLI::App& app, Common& c) {
  app.add_option("--config", c.config_path, "JSON config file (defaults if omitted)");
  app.add_option("--seeds", c.seeds, "seed count N (seeds 0..N-1) or a comma list");
  app.add_option("--out", c.out, "output directory")->required();
  app.add_option("--threads", c.threads, "concurrent seeds")->check(CLI::PositiveNumber);
  app.add_option("--set", c.overrides, "override a config key, e.g. --set sigma=0.01");
}

json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return json(text);  // bare strings such as algorithm names
  }
}

json base_config(const Common& c) {
  json j = json::object();
  if (!c.config_path.empty()) {
    std::ifstream in(c.config_path, std::ios::binary);
    if (!in) throw olrl::IoError(c.config_path, "cannot open config");
    std::stringstream buf;
    buf << in.rdbuf();
    // Validates syntax, keys and values before overrides are applied.
    olrl::parse_config(buf.str());
    j = json::parse(buf.str());
  }
  for (const std::string& o : c.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      throw olrl::ConfigError("--set", "expected key=value, got '" + o + "'");
    }
    j[o.substr(0, eq)] = parse_value(o.substr(eq + 1));
  }
  return j;
}

void print_summary(const olrl::ExperimentResult& r) {
  std::printf("algorithm=%s seeds=%zu solve_rate=%s [%s, %s] median_J_max=%s failed=%d\n",
              std::string(olrl::to_string(r.config.algorithm)).c_str(), r.seeds.size(),
              format_double(r.solve_rate.value).c_str(), format_double(r.solve_rate.lo).c_str(),
              format_double(r.solve_rate.hi).c_str(), format_double(r.median_J_max).c_str(),
              r.n_failed);
}

int cmd_run(const Common& c) {
  const olrl::RunConfig cfg = olrl::config_from_json(base_config(c));
  const auto result = olrl::run_experiment(cfg, olrl::parse_seeds(c.seeds), c.threads);
  olrl::emit_results(result, c.out);
  print_summary(result);
  return result.n_failed > 0 ? kExitRunFailure : kExitOk;
}

int cmd_sweep(const Common& c, const std::string& key, const std::string& values) {
  json base = base_config(c);
  std::vector<std::string> items;
  std::stringstream ss(values);
  for (std::string item; std::getline(ss, item, ',');) items.push_back(item);
  if (items.empty()) throw olrl::ConfigError("--values", "no sweep values given");

  // Validate every grid point before running any of them.
  std::vector<olrl::RunConfig> configs;
  for (const std::string& v : items) {
    json j = base;
    j[key] = parse_value(v);
    configs.push_back(olrl::config_from_json(j));
  }
  const auto seeds = olrl::parse_seeds(c.seeds);
  std::filesystem::create_directories(c.out);
  const auto table_path = std::filesystem::path(c.out) / "sweep.csv";
  std::ofstream table(table_path, std::ios::binary);
  if (!table) throw olrl::IoError(table_path.string(), "cannot open for writing");
  table << key
        << ",solve_rate,solve_ci_lo,solve_ci_hi,mean_J_max,median_J_max,"
           "median_rollouts_to_solve,n_failed\n";
  int status = kExitOk;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto result = olrl::run_experiment(configs[i], seeds, c.threads);
    olrl::emit_results(result, std::filesystem::path(c.out) / (key + "=" + items[i]));
    print_summary(result);
    table << items[i] << ',' << format_double(result.solve_rate.value) << ','
          << format_double(result.solve_rate.lo) << ',' << format_double(result.solve_rate.hi)
          << ',' << format_double(result.mean_J_max.value) << ','
          << format_double(result.median_J_max) << ','
          << format_double(result.median_rollouts_to_solve.value_or(
                 std::numeric_limits<double>::infinity()))
          << ',' << result.n_failed << '\n';
    if (result.n_failed > 0) status = kExitRunFailure;
  }
  table.close();
  if (!table) throw olrl::IoError(table_path.string(), "write failed");
  return status;
}

int cmd_check(const std::string& out, int samples, int instances) {
  std::filesystem::create_directories(out);
  bool ok = true;

  const auto grad = olrl::gradient_suite(samples, 1e-5, 0);
  std::ofstream g(std::filesystem::path(out) / "gradient_check.csv", std::ios::binary);
  g << "env,sample,max_relative_error,t,k\n";
  double worst = 0.0;
  for (const auto& r : grad) {
    g << r.env << ',' << r.sample << ',' << format_double(r.max_relative_error) << ','
      << r.t << ',' << r.k << '\n';
    worst = std::max(worst, r.max_relative_error);
  }
  ok = ok && worst <= 1e-4;
  std::printf("gradient check: worst relative error %s (limit 1e-4)\n",
              format_double(worst).c_str());

  const auto lqr = olrl::lqr_suite(instances, 20000, 0);
  std::ofstream l(std::filesystem::path(out) / "lqr_suite.csv", std::ios::binary);
  l << "instance,D,K,T,J_star,J_initial,J_final,gap,L,eta,iterations,theorem1_violations,"
       "worst_ratio\n";
  int violations = 0;
  double worst_gap = 0.0;
  for (const auto& r : lqr) {
    const double gap = std::abs(r.J_star - r.J_final);
    l << r.instance << ',' << r.D << ',' << r.K << ',' << r.T << ',' << format_double(r.J_star)
      << ',' << format_double(r.J_initial) << ',' << format_double(r.J_final) << ','
      << format_double(gap) << ',' << format_double(r.L) << ',' << format_double(r.eta) << ','
      << r.iterations << ',' << r.theorem1_violations << ',' << format_double(r.worst_ratio)
      << '\n';
    violations += r.theorem1_violations;
    worst_gap = std::max(worst_gap, gap);
  }
  ok = ok && violations == 0 && worst_gap <= 1e-6;
  std::printf("lqr suite: worst optimality gap %s (limit 1e-6), bound violations %d\n",
              format_double(worst_gap).c_str(), violations);
  return ok ? kExitOk : kExitRunFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Open-loop trajectory optimization experiments"};
  app.require_subcommand(1);

  Common run_opts;
  CLI::App* run = app.add_subcommand("run", "run one configuration over several seeds");
  add_common(*run, run_opts);

  Common sweep_opts;
  std::string key, values;
  CLI::App* sweep = app.add_subcommand("sweep", "run a grid over one config key");
  add_common(*sweep, sweep_opts);
  sweep->add_option("--key", key, "config key to vary")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();

  std::string check_out;
  int check_samples = 10, check_instances = 10;
  CLI::App* check = app.add_subcommand("check", "gradient and convergence-bound suites");
  check->add_option("--out", check_out, "output directory")->required();
  check->add_option("--samples", check_samples, "random action sequences per env");
  check->add_option("--instances", check_instances, "random LQR instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*sweep) return cmd_sweep(sweep_opts, key, values);
    return cmd_check(check_out, check_samples, check_instances);
  } catch (const olrl::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRunFailure;
  }
}
