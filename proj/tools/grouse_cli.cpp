// grouse: run, sweep, bounds and verify front end for the GROUSE library.
#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <exception>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "grouse/errors.hpp"
#include "grouse/experiment.hpp"
#include "grouse/verify.hpp"

namespace fs = std::filesystem;
using namespace grouse;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kPropertyFailure = 2, kIo = 3 };

/// Experiment flags shared by `run` and `sweep`; unset flags leave the config alone.
struct ConfigFlags {
  std::string config_path;
  std::optional<std::int64_t> n, d, trials, max_iters, record_every;
  std::optional<double> sigma_sq, eps_star, c;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<bool> sparse;
  std::optional<int> threads;
  std::string out;

  void add_to(CLI::App& app, bool config_required) {
    auto* cfg = app.add_option("--config", config_path, "JSON config file (ExperimentConfig field names)");
    if (config_required) cfg->required()->check(CLI::ExistingFile);
    app.add_option("--n", n, "ambient dimension");
    app.add_option("--d", d, "subspace dimension");
    app.add_option("--sigma2", sigma_sq, "noise variance sigma^2");
    app.add_option("--trials", trials, "trials per configuration");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--max-iters", max_iters, "iteration horizon (0 = 3 (K1 + K2))");
    app.add_option("--eps-star", eps_star, "target accuracy eps*");
    app.add_option("--mode", mode, "step-size rule")->check(CLI::IsMember({"greedy", "practical", "oracle"}));
    app.add_flag("--sparse,!--dense", sparse, "sparse (default) or dense random Ubar");
    app.add_option("--c", c, "practical step-size constant");
    app.add_option("--record-every", record_every, "recording cadence (0 = automatic)");
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out", out, "output directory");
  }

  void apply(ExperimentConfig& cfg) const {
    if (n) cfg.n = *n;
    if (d) cfg.d = *d;
    if (sigma_sq) cfg.sigma_sq = *sigma_sq;
    if (trials) cfg.trials = *trials;
    if (seed) cfg.seed = *seed;
    if (max_iters) cfg.max_iters = *max_iters;
    if (eps_star) cfg.eps_star = *eps_star;
    if (mode) cfg.mode = parse_step_mode(*mode);
    if (sparse) cfg.sparse_ubar = *sparse;
    if (c) cfg.c = *c;
    if (record_every) cfg.record_every = *record_every;
    if (threads) cfg.threads = *threads;
    if (!out.empty()) cfg.out_path = out;
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
}

std::string trajectory_name(std::int64_t trial) {
  char name[64];
  std::snprintf(name, sizeof(name), "trajectory_%03lld.csv", static_cast<long long>(trial));
  return name;
}

int cmd_run(const ConfigFlags& flags) {
  ExperimentConfig cfg;
  if (!flags.config_path.empty()) cfg = config_from_json(read_file(flags.config_path));
  flags.apply(cfg);
  cfg.validate();

  std::vector<TrialResult> results(static_cast<std::size_t>(cfg.trials));
  if (cfg.out_path.empty()) {
    results = run_trials(cfg);
  } else {
    prepare_dir(cfg.out_path);
    // Each worker writes whole trajectory files, so memory stays bounded by one
    // trajectory per thread.
    std::atomic<std::int64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
      std::vector<std::jthread> workers;
      const int count = std::max(1, std::min<int>(cfg.threads, static_cast<int>(cfg.trials)));
      for (int w = 0; w < count; ++w) {
        workers.emplace_back([&] {
          for (std::int64_t i = next++; i < cfg.trials; i = next++) {
            try {
              const Trajectory traj = run_trajectory(cfg, i);
              std::ofstream out = open_output(fs::path(cfg.out_path) / trajectory_name(i));
              write_trajectory_csv(out, cfg, traj);
              results[static_cast<std::size_t>(i)] = traj.result;
            } catch (const IoError&) {
              std::lock_guard lock(failure_mutex);
              if (!failure) failure = std::current_exception();
            } catch (const std::exception& e) {
              TrialResult& r = results[static_cast<std::size_t>(i)];
              r.trial_id = i;
              r.derived_seed = trial_seed(cfg, i);
              r.error = e.what();
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  const std::vector<ExperimentConfig> configs{cfg};
  const std::vector<std::vector<TrialResult>> grouped{results};
  const std::vector<SweepRow> rows{summarize(cfg, results)};
  if (cfg.out_path.empty()) {
    write_trials_csv(std::cout, configs, grouped);
    return kOk;
  }
  std::ofstream trials_out = open_output(fs::path(cfg.out_path) / "trials.csv");
  write_trials_csv(trials_out, configs, grouped);
  std::ofstream summary_out = open_output(fs::path(cfg.out_path) / "summary.json");
  summary_out << sweep_summary_json(rows) << '\n';
  if (!summary_out) throw IoError("failed writing summary.json");
  std::cout << "wrote " << cfg.trials << " trajectories to " << cfg.out_path << '\n';
  return kOk;
}

int cmd_sweep(const ConfigFlags& flags) {
  std::vector<ExperimentConfig> grid = load_sweep_file(flags.config_path);
  int threads = 1;
  for (auto& cfg : grid) {
    flags.apply(cfg);
    cfg.validate();
    threads = std::max(threads, cfg.threads);
  }
  if (flags.threads) threads = *flags.threads;
  const SweepResult result = run_sweep(grid, threads);

  if (flags.out.empty()) {
    write_sweep_summary_csv(std::cout, result.rows);
    return kOk;
  }
  prepare_dir(flags.out);
  std::ofstream trials_out = open_output(fs::path(flags.out) / "trials.csv");
  write_trials_csv(trials_out, grid, result.trials);
  std::ofstream summary_csv = open_output(fs::path(flags.out) / "summary.csv");
  write_sweep_summary_csv(summary_csv, result.rows);
  std::ofstream summary_json = open_output(fs::path(flags.out) / "summary.json");
  summary_json << sweep_summary_json(result.rows) << '\n';
  if (!summary_json) throw IoError("failed writing summary.json");
  std::cout << "wrote " << result.rows.size() << " configurations to " << flags.out << '\n';
  return kOk;
}

struct BoundsFlags {
  std::vector<std::int64_t> n{200};
  std::vector<std::int64_t> d{5};
  double rho = 0.1;
  double rho_prime = 0.1;
  double eps_star = 1e-4;
  double C = 1.0;
  std::string out;
};

int cmd_bounds(const BoundsFlags& flags) {
  std::vector<BoundParams> params;
  for (auto n : flags.n) {
    for (auto d : flags.d) {
      BoundParams p;
      p.n = n;
      p.d = d;
      p.rho = flags.rho;
      p.rho_prime = flags.rho_prime;
      p.eps_star = flags.eps_star;
      p.C = flags.C;
      params.push_back(p);
    }
  }
  const std::vector<BoundsRow> rows = bounds_table(params);
  if (flags.out.empty()) {
    write_bounds_csv(std::cout, rows);
  } else {
    std::ofstream out = open_output(flags.out);
    write_bounds_csv(out, rows);
  }
  return kOk;
}

int cmd_verify(const std::string& suite, const std::string& intensity, std::uint64_t seed, double theta_scale,
               int threads) {
  VerifyOptions options;
  options.suite = parse_verify_suite(suite);
  options.intensity = parse_intensity(intensity);
  options.seed = seed;
  options.theta_scale = theta_scale;
  options.threads = threads;
  const std::vector<PropertyResult> results = verify(options);
  std::size_t failed = 0;
  for (const auto& r : results) {
    print_property(std::cout, r);
    if (!r.passed) ++failed;
  }
  std::cout << results.size() - failed << "/" << results.size() << " properties passed\n";
  if (failed == 0) return kOk;
  for (const auto& r : results) {
    if (!r.passed) std::cerr << "failed property: " << r.suite << '/' << r.name << '\n';
  }
  return kPropertyFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming subspace estimation with GROUSE: simulations, bounds and property checks"};
  app.require_subcommand(1);

  ConfigFlags run_flags;
  auto* run = app.add_subcommand("run", "run trials of a single configuration");
  run_flags.add_to(*run, false);

  ConfigFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "run a configuration grid from a JSON file");
  sweep_flags.add_to(*sweep, true);

  BoundsFlags bounds_flags;
  auto* bounds = app.add_subcommand("bounds", "tabulate mu0, K1, K2 and K");
  bounds->add_option("--n", bounds_flags.n, "ambient dimensions")->expected(1, -1);
  bounds->add_option("--d", bounds_flags.d, "subspace dimensions")->expected(1, -1);
  bounds->add_option("--rho", bounds_flags.rho, "failure probability of the local phase");
  bounds->add_option("--rho-prime", bounds_flags.rho_prime, "failure probability of the global phase");
  bounds->add_option("--eps-star", bounds_flags.eps_star, "target accuracy eps*");
  bounds->add_option("--C", bounds_flags.C, "initialization constant");
  bounds->add_option("--out", bounds_flags.out, "CSV path (stdout if omitted)");

  std::string suite = "all";
  std::string intensity = "quick";
  std::uint64_t verify_seed = 1;
  double theta_scale = 1.0;
  int verify_threads = 1;
  auto* ver = app.add_subcommand("verify", "run the property suites");
  ver->add_option("--suite", suite, "metrics|step|data|bounds|all")
      ->check(CLI::IsMember({"metrics", "step", "data", "bounds", "all"}));
  ver->add_option("--intensity", intensity, "quick|full")->check(CLI::IsMember({"quick", "full"}));
  ver->add_option("--seed", verify_seed, "master seed");
  ver->add_option("--theta-scale", theta_scale, "multiply every step angle (test hook)");
  ver->add_option("--threads", verify_threads, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(run_flags);
    if (*sweep) return cmd_sweep(sweep_flags);
    if (*bounds) return cmd_bounds(bounds_flags);
    if (*ver) return cmd_verify(suite, intensity, verify_seed, theta_scale, verify_threads);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
