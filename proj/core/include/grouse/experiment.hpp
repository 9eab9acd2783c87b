#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "grouse/analysis_bounds.hpp"
#include "grouse/grouse_core.hpp"
#include "grouse/subspace_metrics.hpp"

namespace grouse {

/// One experiment: planted problem, step rule, horizon and output settings.
/// JSON field names match the member names.
struct ExperimentConfig {
  std::int64_t n = 200;
  std::int64_t d = 5;
  double sigma_sq = 0.0;
  std::int64_t trials = 1;
  std::uint64_t seed = 1;
  /// 0 selects the default horizon, 3 (K1 bound + K2 bound) rounded up.
  std::int64_t max_iters = 0;
  double eps_star = 1e-4;
  StepMode mode = StepMode::GreedyNoiseless;
  bool sparse_ubar = true;
  double c = 1.0;
  /// 0 selects 1 when n d <= 1e5, else 10.
  std::int64_t record_every = 0;
  int threads = 1;
  std::string out_path;

  double rho = 0.1;
  double rho_prime = 0.1;
  std::optional<double> tau1;
  std::optional<double> tau2;
  /// 0 disables periodic re-orthonormalization.
  std::int64_t reorth_period = 100;
  /// Stop once a recorded eps reaches the phase target.
  bool stop_at_target = true;
  /// Start at U_0 = Ubar instead of a random basis.
  bool init_at_truth = false;

  void validate() const;
  bool noisy() const { return sigma_sq > 0.0; }
  std::int64_t resolved_max_iters() const;
  std::int64_t resolved_record_every() const;
  BoundParams bound_params() const;
  StepConfig step_config() const;
};

struct TrialResult {
  std::int64_t trial_id = 0;
  std::uint64_t derived_seed = 0;
  PhaseReport phase;
  double final_zeta = 0.0;
  double final_eps = 0.0;
  std::int64_t iters_run = 0;
  std::int64_t skipped_steps = 0;
  /// Empty unless the trial threw.
  std::string error;
};

struct Trajectory {
  TrialResult result;
  std::vector<MetricSample> samples;
};

/// Called with (t, U_t) at every recorded step.
using BasisObserver = std::function<void(std::int64_t, const OrthonormalBasis&)>;

/// Per-trial seed: derive_seed(master seed, trial_id).
std::uint64_t trial_seed(const ExperimentConfig& cfg, std::int64_t trial_id);

/// Builds the planted model and U_0 from the trial seed and runs GROUSE on
/// fresh samples for at most resolved_max_iters() steps, recording a
/// MetricSample at t = 0, every record_every steps and at the final step.
Trajectory run_trajectory(const ExperimentConfig& cfg, std::int64_t trial_id,
                          const BasisObserver& observer = {});

/// All trials of one configuration on cfg.threads workers, ordered by trial id.
std::vector<TrialResult> run_trials(const ExperimentConfig& cfg);

/// Aggregate over the trials of one configuration. Ratios are K1 / (d^3 log n)
/// and K2 / (d log(1/eps*)) over trials where the phase was reached.
struct SweepRow {
  ExperimentConfig config;
  std::int64_t trials = 0;
  std::int64_t failed = 0;
  std::int64_t k1_reached = 0;
  std::int64_t k2_reached = 0;
  double k1_ratio_mean = 0.0;
  double k1_ratio_var = 0.0;
  double k2_ratio_mean = 0.0;
  double k2_ratio_var = 0.0;
  double k1_bound = 0.0;
  double k2_bound = 0.0;
  /// Trials with k1 + k2 <= k1_bound + k2_bound.
  std::int64_t within_total_bound = 0;
  /// Trials with k2 <= k2_bound.
  std::int64_t within_k2_bound = 0;
};

SweepRow summarize(const ExperimentConfig& cfg, std::span<const TrialResult> trials);

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<std::vector<TrialResult>> trials;
};

/// Runs every (config, trial) pair on `threads` workers. Failures are kept
/// per trial and do not stop the sweep.
SweepResult run_sweep(std::span<const ExperimentConfig> grid, int threads);

struct BoundsRow {
  BoundParams params;
  std::optional<double> mu0;
  std::optional<double> k1;
  std::optional<double> k1_from_rate;
  std::optional<double> k2;
  std::optional<double> total;
  std::string error;
};

std::vector<BoundsRow> bounds_table(std::span<const BoundParams> params);

// ---- serialization (experiment_io.cpp) ----

std::string to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);

/// A sweep file is either a JSON array of configs or an object
/// {"base": {...}, "grid": {"n": [...], "d": [...], "sigma_sq": [...]}}
/// expanded as a cartesian product over the grid keys.
std::vector<ExperimentConfig> sweep_from_json(const std::string& text);
std::vector<ExperimentConfig> load_sweep_file(const std::string& path);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

/// Metadata lines start with '#'. Everything after them is the CSV body,
/// which is a pure function of the config (no timestamps, no thread count).
void write_metadata_header(std::ostream& out, const std::string& config_json);

inline constexpr const char* kTrajectoryCsvHeader = "t,zeta,epsilon,theta,alpha,p_norm_sq,r_norm_sq,skipped";

void write_trajectory_csv(std::ostream& out, const ExperimentConfig& cfg, const Trajectory& trajectory);
void write_trials_csv(std::ostream& out, std::span<const ExperimentConfig> configs,
                      std::span<const std::vector<TrialResult>> trials);
void write_sweep_summary_csv(std::ostream& out, std::span<const SweepRow> rows);
std::string sweep_summary_json(std::span<const SweepRow> rows);
void write_bounds_csv(std::ostream& out, std::span<const BoundsRow> rows);

/// Lines of `text` that do not start with '#'.
std::string csv_body(const std::string& text);

}  // namespace grouse
