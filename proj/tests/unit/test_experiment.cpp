#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "grouse/errors.hpp"
#include "grouse/experiment.hpp"
#include "grouse/random.hpp"

using namespace grouse;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.n = 40;
  cfg.d = 3;
  cfg.trials = 4;
  cfg.seed = 11;
  cfg.max_iters = 3000;
  cfg.eps_star = 1e-6;
  return cfg;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST(DeriveSeed, DistinctStreamsAndStable) {
  EXPECT_EQ(derive_seed(1, 0), derive_seed(1, 0));
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}

TEST(ExperimentConfig, DefaultsResolve) {
  ExperimentConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  // 3 (K1 + K2) for n = 200, d = 5, rho = rho' = 0.1, eps* = 1e-4.
  EXPECT_EQ(cfg.resolved_max_iters(), static_cast<std::int64_t>(std::ceil(3.0 * 5973.227480132577)));
  EXPECT_EQ(cfg.resolved_record_every(), 1);
  cfg.n = 20001;
  EXPECT_EQ(cfg.resolved_record_every(), 10);
  cfg.record_every = 7;
  EXPECT_EQ(cfg.resolved_record_every(), 7);
}

TEST(ExperimentConfig, RejectsInvalidFields) {
  ExperimentConfig cfg;
  cfg.d = cfg.n;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.trials = 0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.c = -1.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.rho = 0.95;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(ConfigJson, RoundTrip) {
  ExperimentConfig cfg = small_config();
  cfg.mode = StepMode::PracticalNoisy;
  cfg.sigma_sq = 1e-4;
  cfg.tau1 = 2.5;
  cfg.sparse_ubar = false;
  const ExperimentConfig back = config_from_json(to_json(cfg));
  EXPECT_EQ(to_json(back), to_json(cfg));
  EXPECT_EQ(back.mode, StepMode::PracticalNoisy);
  EXPECT_EQ(back.tau1, 2.5);
  EXPECT_FALSE(back.tau2);
}

TEST(ConfigJson, PartialObjectKeepsDefaults) {
  const ExperimentConfig cfg = config_from_json(R"({"n": 500, "mode": "oracle", "sigma_sq": 0.01})");
  EXPECT_EQ(cfg.n, 500);
  EXPECT_EQ(cfg.d, 5);
  EXPECT_EQ(cfg.mode, StepMode::OracleNoisy);
}

TEST(ConfigJson, RejectsUnknownAndMistypedFields) {
  EXPECT_THROW(config_from_json(R"({"sigma2": 0.1})"), InvalidArgument);
  EXPECT_THROW(config_from_json(R"({"n": "big"})"), InvalidArgument);
  EXPECT_THROW(config_from_json(R"({"mode": "fast"})"), InvalidArgument);
  EXPECT_THROW(config_from_json("[1, 2"), InvalidArgument);
  EXPECT_THROW(config_from_json("[]"), InvalidArgument);
}

TEST(SweepJson, GridIsCartesianInKeyOrder) {
  const auto grid = sweep_from_json(R"({"base": {"trials": 3}, "grid": {"n": [500, 1000], "d": [5, 10]}})");
  ASSERT_EQ(grid.size(), 4u);
  EXPECT_EQ(grid[0].n, 500);
  EXPECT_EQ(grid[0].d, 5);
  EXPECT_EQ(grid[1].n, 500);
  EXPECT_EQ(grid[1].d, 10);
  EXPECT_EQ(grid[3].n, 1000);
  for (const auto& cfg : grid) EXPECT_EQ(cfg.trials, 3);
}

TEST(SweepJson, ArrayAndSingleObject) {
  EXPECT_EQ(sweep_from_json(R"([{"n": 50}, {"n": 60}])").size(), 2u);
  EXPECT_EQ(sweep_from_json(R"({"n": 50})").size(), 1u);
  EXPECT_THROW(sweep_from_json(R"({"grid": {"n": 5}})"), InvalidArgument);
}

TEST(RunTrajectory, DeterministicAndWellFormed) {
  const ExperimentConfig cfg = small_config();
  const Trajectory a = run_trajectory(cfg, 2);
  const Trajectory b = run_trajectory(cfg, 2);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].zeta, b.samples[i].zeta);
    EXPECT_EQ(a.samples[i].epsilon, b.samples[i].epsilon);
  }
  EXPECT_EQ(a.result.derived_seed, trial_seed(cfg, 2));
  EXPECT_EQ(a.samples.front().t, 0);
  for (std::size_t i = 1; i < a.samples.size(); ++i) EXPECT_GT(a.samples[i].t, a.samples[i - 1].t);
  for (const auto& s : a.samples) {
    EXPECT_GE(s.zeta, 0.0);
    EXPECT_LE(s.zeta, 1.0);
    EXPECT_GE(s.epsilon, 0.0);
    EXPECT_LE(s.epsilon, 3.0);
    EXPECT_GE(s.theta, 0.0);
    EXPECT_LT(s.theta, M_PI / 2);
  }
}

TEST(RunTrajectory, NoiselessReachesTargetAndStops) {
  const Trajectory traj = run_trajectory(small_config(), 0);
  ASSERT_TRUE(traj.result.phase.k1 && traj.result.phase.k2);
  EXPECT_LE(traj.result.final_eps, 1e-6);
  EXPECT_LT(traj.result.iters_run, 3000);
  EXPECT_EQ(traj.samples.back().t, traj.result.iters_run);
}

TEST(RunTrajectory, RunsToHorizonWithoutStopping) {
  ExperimentConfig cfg = small_config();
  cfg.stop_at_target = false;
  cfg.max_iters = 500;
  cfg.record_every = 7;
  std::int64_t observed = 0;
  const Trajectory traj = run_trajectory(cfg, 0, [&](std::int64_t, const OrthonormalBasis&) { ++observed; });
  EXPECT_EQ(traj.result.iters_run, 500);
  // t = 0, every 7th step up to 497, and the horizon.
  EXPECT_EQ(traj.samples.size(), 1u + 500 / 7 + 1);
  EXPECT_EQ(observed, static_cast<std::int64_t>(traj.samples.size()));
}

TEST(RunTrajectory, InitAtTruthStartsConverged) {
  ExperimentConfig cfg = small_config();
  cfg.init_at_truth = true;
  const Trajectory traj = run_trajectory(cfg, 0);
  EXPECT_NEAR(traj.samples.front().zeta, 1.0, 1e-12);
  EXPECT_EQ(traj.result.phase.k1, 0);
}

TEST(RunTrials, ThreadCountDoesNotChangeResults) {
  ExperimentConfig cfg = small_config();
  cfg.threads = 1;
  const auto one = run_trials(cfg);
  cfg.threads = 3;
  const auto three = run_trials(cfg);
  ASSERT_EQ(one.size(), three.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].trial_id, static_cast<std::int64_t>(i));
    EXPECT_EQ(one[i].final_eps, three[i].final_eps);
    EXPECT_EQ(one[i].phase.k1, three[i].phase.k1);
    EXPECT_EQ(one[i].phase.k2, three[i].phase.k2);
  }
}

TEST(Summarize, RatiosOverReachedTrials) {
  ExperimentConfig cfg = small_config();
  std::vector<TrialResult> trials(3);
  trials[0].phase.k1 = 30;
  trials[0].phase.k2 = 20;
  trials[1].phase.k1 = 10;
  trials[1].phase.k2 = 40;
  trials[2].error = "boom";
  const SweepRow row = summarize(cfg, trials);
  EXPECT_EQ(row.trials, 3);
  EXPECT_EQ(row.failed, 1);
  EXPECT_EQ(row.k1_reached, 2);
  const double k1_scale = 27.0 * std::log(40.0);
  const double k2_scale = 3.0 * std::log(1e6);
  EXPECT_NEAR(row.k1_ratio_mean, 20.0 / k1_scale, 1e-12);
  EXPECT_NEAR(row.k2_ratio_mean, 30.0 / k2_scale, 1e-12);
  EXPECT_NEAR(row.k2_ratio_var, 2.0 * 100.0 / (k2_scale * k2_scale), 1e-12);
  EXPECT_EQ(row.within_k2_bound, 2);
}

TEST(RunSweep, FailuresStayPerTrial) {
  ExperimentConfig good = small_config();
  good.trials = 2;
  ExperimentConfig stalls = good;
  stalls.max_iters = 1;
  const std::vector<ExperimentConfig> grid{good, stalls};
  const SweepResult r = run_sweep(grid, 2);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0].k2_reached, 2);
  EXPECT_EQ(r.rows[1].k2_reached, 0);
  EXPECT_EQ(r.rows[1].failed, 0);
}

TEST(Csv, TrajectoryHeaderAndMetadata) {
  const ExperimentConfig cfg = small_config();
  std::ostringstream out;
  write_trajectory_csv(out, cfg, run_trajectory(cfg, 1));
  const auto lines = lines_of(out.str());
  ASSERT_GE(lines.size(), 4u);
  EXPECT_EQ(lines[0].rfind("# grouse {", 0), 0u);
  EXPECT_NE(lines[0].find("\"seed\":11"), std::string::npos);
  const auto body = lines_of(csv_body(out.str()));
  EXPECT_EQ(body[0], kTrajectoryCsvHeader);
  EXPECT_EQ(body[1].rfind("0,", 0), 0u);
  for (std::size_t i = 1; i < body.size(); ++i) {
    EXPECT_EQ(std::count(body[i].begin(), body[i].end(), ','), 7);
  }
}

TEST(Csv, BodiesIgnoreThreadCount) {
  ExperimentConfig cfg = small_config();
  const std::vector<ExperimentConfig> grid{cfg};
  const SweepResult a = run_sweep(grid, 1);
  const SweepResult b = run_sweep(grid, 4);
  std::ostringstream sa, sb;
  write_sweep_summary_csv(sa, a.rows);
  write_sweep_summary_csv(sb, b.rows);
  EXPECT_EQ(csv_body(sa.str()), csv_body(sb.str()));
  std::ostringstream ta, tb;
  write_trials_csv(ta, grid, a.trials);
  write_trials_csv(tb, grid, b.trials);
  EXPECT_EQ(csv_body(ta.str()), csv_body(tb.str()));
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(std::stod(format_double(1e-4)), 1e-4);
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(format_double(std::nan("")), "nan");
}

TEST(BoundsTable, RowLevelErrors) {
  BoundParams ok;
  ok.n = 200;
  ok.d = 5;
  BoundParams bad = ok;
  bad.d = 300;
  const std::vector<BoundParams> params{ok, bad, ok};
  const auto rows = bounds_table(params);
  ASSERT_EQ(rows.size(), 3u);
  ASSERT_TRUE(rows[0].total);
  EXPECT_NEAR(*rows[0].total, 5973.227480132577, 1e-8);
  EXPECT_FALSE(rows[1].error.empty());
  EXPECT_FALSE(rows[1].k1);
  EXPECT_EQ(*rows[2].k1, *rows[0].k1);
  std::ostringstream out;
  write_bounds_csv(out, rows);
  const auto lines = lines_of(csv_body(out.str()));
  EXPECT_EQ(lines[0], "n,d,rho,rho_prime,eps_star,C,mu0,k1,k1_from_rate,k2,k,error");
  EXPECT_EQ(lines.size(), 4u);
}
