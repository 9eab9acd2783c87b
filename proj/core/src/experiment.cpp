#include "grouse/experiment.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "grouse/data_model.hpp"
#include "grouse/errors.hpp"
#include "grouse/random.hpp"
#include "parallel.hpp"

namespace grouse {

void ExperimentConfig::validate() const {
  if (d <= 0 || d >= n) throw InvalidArgument("config requires 0 < d < n");
  if (!(sigma_sq >= 0.0) || !std::isfinite(sigma_sq)) throw InvalidArgument("sigma_sq must be finite and >= 0");
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  if (max_iters < 0) throw InvalidArgument("max_iters must be >= 0 (0 selects the default)");
  if (record_every < 0) throw InvalidArgument("record_every must be >= 0 (0 selects the default)");
  if (threads < 1) throw InvalidArgument("threads must be >= 1");
  if (reorth_period < 0) throw InvalidArgument("reorth_period must be >= 0 (0 disables it)");
  bound_params().validate();
  step_config().validate();
}

std::int64_t ExperimentConfig::resolved_max_iters() const {
  if (max_iters > 0) return max_iters;
  const BoundParams params = bound_params();
  return static_cast<std::int64_t>(std::ceil(3.0 * (k1_bound(params) + k2_bound(params))));
}

std::int64_t ExperimentConfig::resolved_record_every() const {
  if (record_every > 0) return record_every;
  return n * d <= 100000 ? 1 : 10;
}

BoundParams ExperimentConfig::bound_params() const {
  BoundParams p;
  p.n = n;
  p.d = d;
  p.sigma_sq = sigma_sq;
  p.rho = rho;
  p.rho_prime = rho_prime;
  p.eps_star = eps_star;
  p.tau1 = tau1;
  p.tau2 = tau2;
  return p;
}

StepConfig ExperimentConfig::step_config() const {
  StepConfig s;
  s.sigma_sq = sigma_sq;
  s.c = c;
  s.mode = mode;
  s.reorth_period = reorth_period > 0 ? std::optional<std::int64_t>(reorth_period) : std::nullopt;
  return s;
}

std::uint64_t trial_seed(const ExperimentConfig& cfg, std::int64_t trial_id) {
  return derive_seed(cfg.seed, static_cast<std::uint64_t>(trial_id));
}

Trajectory run_trajectory(const ExperimentConfig& cfg, std::int64_t trial_id, const BasisObserver& observer) {
  cfg.validate();
  Trajectory out;
  out.result.trial_id = trial_id;
  out.result.derived_seed = trial_seed(cfg, trial_id);

  Rng rng = make_rng(out.result.derived_seed);
  const PlantedModel model = make_planted(cfg.n, cfg.d, cfg.sigma_sq, cfg.sparse_ubar, rng);
  OrthonormalBasis initial = cfg.init_at_truth ? model.ubar : random_orthonormal(cfg.n, cfg.d, rng);
  GrouseEstimator estimator(std::move(initial), cfg.step_config());

  const BoundParams params = cfg.bound_params();
  const double target_eps = phase_targets(params, cfg.noisy()).target_eps;
  const std::int64_t horizon = cfg.resolved_max_iters();
  const std::int64_t every = cfg.resolved_record_every();
  const bool needs_oracle = cfg.mode == StepMode::OracleNoisy;

  auto record = [&](std::int64_t t, const StepRecord& step) {
    const SubspaceDistance dist = measure(estimator.basis(), model.ubar);
    MetricSample s;
    s.t = t;
    s.zeta = dist.zeta;
    s.epsilon = dist.epsilon;
    s.angles = dist.angles;
    s.residual_norm_sq = step.r_norm_sq;
    s.projection_norm_sq = step.p_norm_sq;
    s.theta = step.theta;
    s.alpha = step.alpha;
    s.skipped = step.skipped;
    out.samples.push_back(std::move(s));
    if (observer) observer(t, estimator.basis());
    return cfg.stop_at_target && dist.epsilon <= target_eps;
  };

  bool done = record(0, StepRecord{});
  std::int64_t t = 0;
  while (!done && t < horizon) {
    ++t;
    const Sample sample = draw_sample(model, rng);
    std::optional<OracleInfo> oracle;
    if (needs_oracle) oracle = oracle_info(estimator.basis(), sample);
    const StepRecord step = estimator.observe(sample.x, oracle);
    if (t % every == 0 || t == horizon) done = record(t, step);
  }

  out.result.phase = detect_phases(out.samples, params, cfg.noisy());
  out.result.final_zeta = out.samples.back().zeta;
  out.result.final_eps = out.samples.back().epsilon;
  out.result.iters_run = t;
  out.result.skipped_steps = estimator.steps_skipped();
  return out;
}

namespace {

TrialResult run_trial_guarded(const ExperimentConfig& cfg, std::int64_t trial_id) {
  try {
    return run_trajectory(cfg, trial_id).result;
  } catch (const std::exception& e) {
    TrialResult failed;
    failed.trial_id = trial_id;
    failed.derived_seed = trial_seed(cfg, trial_id);
    failed.error = e.what();
    return failed;
  }
}

double safe_bound(double (*fn)(const BoundParams&), const BoundParams& params) {
  try {
    return fn(params);
  } catch (const InvalidArgument&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

std::vector<TrialResult> run_trials(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<TrialResult> results(static_cast<std::size_t>(cfg.trials));
  detail::parallel_for(results.size(), cfg.threads, [&](std::size_t i) {
    results[i] = run_trial_guarded(cfg, static_cast<std::int64_t>(i));
  });
  return results;
}

SweepRow summarize(const ExperimentConfig& cfg, std::span<const TrialResult> trials) {
  SweepRow row;
  row.config = cfg;
  row.trials = static_cast<std::int64_t>(trials.size());
  const BoundParams params = cfg.bound_params();
  row.k1_bound = safe_bound(&k1_bound, params);
  row.k2_bound = safe_bound(&k2_bound, params);

  const double d = static_cast<double>(cfg.d);
  const double k1_scale = d * d * d * std::log(static_cast<double>(cfg.n));
  const double k2_scale = d * std::log(1.0 / cfg.eps_star);
  double k1_sum = 0.0, k1_sq = 0.0, k2_sum = 0.0, k2_sq = 0.0;

  for (const auto& trial : trials) {
    if (!trial.error.empty()) {
      ++row.failed;
      continue;
    }
    if (trial.phase.k1) {
      ++row.k1_reached;
      const double ratio = static_cast<double>(*trial.phase.k1) / k1_scale;
      k1_sum += ratio;
      k1_sq += ratio * ratio;
    }
    if (trial.phase.k1 && trial.phase.k2) {
      ++row.k2_reached;
      const double k2 = static_cast<double>(*trial.phase.k2);
      const double ratio = k2 / k2_scale;
      k2_sum += ratio;
      k2_sq += ratio * ratio;
      if (k2 <= row.k2_bound) ++row.within_k2_bound;
      if (static_cast<double>(*trial.phase.k1) + k2 <= row.k1_bound + row.k2_bound) ++row.within_total_bound;
    }
  }

  auto finish = [](double sum, double sq, std::int64_t count, double& mean, double& var) {
    if (count == 0) {
      mean = var = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    const double c = static_cast<double>(count);
    mean = sum / c;
    var = count > 1 ? std::max(0.0, (sq - c * mean * mean) / (c - 1.0)) : 0.0;
  };
  finish(k1_sum, k1_sq, row.k1_reached, row.k1_ratio_mean, row.k1_ratio_var);
  finish(k2_sum, k2_sq, row.k2_reached, row.k2_ratio_mean, row.k2_ratio_var);
  return row;
}

SweepResult run_sweep(std::span<const ExperimentConfig> grid, int threads) {
  if (grid.empty()) throw InvalidArgument("sweep grid is empty");
  for (const auto& cfg : grid) cfg.validate();

  SweepResult out;
  std::vector<std::pair<std::size_t, std::int64_t>> jobs;
  out.trials.resize(grid.size());
  for (std::size_t c = 0; c < grid.size(); ++c) {
    out.trials[c].resize(static_cast<std::size_t>(grid[c].trials));
    for (std::int64_t t = 0; t < grid[c].trials; ++t) jobs.emplace_back(c, t);
  }
  detail::parallel_for(jobs.size(), threads, [&](std::size_t j) {
    const auto [c, t] = jobs[j];
    out.trials[c][static_cast<std::size_t>(t)] = run_trial_guarded(grid[c], t);
  });
  for (std::size_t c = 0; c < grid.size(); ++c) {
    out.rows.push_back(summarize(grid[c], out.trials[c]));
  }
  return out;
}

std::vector<BoundsRow> bounds_table(std::span<const BoundParams> params) {
  std::vector<BoundsRow> rows;
  rows.reserve(params.size());
  for (const auto& p : params) {
    BoundsRow row;
    row.params = p;
    try {
      p.validate();
      row.mu0 = mu0(p);
      row.k1 = k1_bound(p);
      row.k1_from_rate = k1_bound_from_rate(p);
      row.k2 = k2_bound(p);
      row.total = *row.k1 + *row.k2;
    } catch (const InvalidArgument& e) {
      row = BoundsRow{};
      row.params = p;
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace grouse
