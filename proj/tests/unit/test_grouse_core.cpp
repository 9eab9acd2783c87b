#include <cmath>

#include <gtest/gtest.h>

#include "grouse/data_model.hpp"
#include "grouse/errors.hpp"
#include "grouse/grouse_core.hpp"
#include "grouse/random.hpp"
#include "oracles.hpp"

using namespace grouse;

namespace {

OrthonormalBasis basis(const Eigen::MatrixXd& m) { return OrthonormalBasis(m); }

StepConfig mode_config(StepMode mode, double sigma_sq = 0.0) {
  StepConfig cfg;
  cfg.mode = mode;
  cfg.sigma_sq = sigma_sq;
  return cfg;
}

}  // namespace

TEST(StepMode, ParsesAndPrints) {
  for (auto mode : {StepMode::GreedyNoiseless, StepMode::PracticalNoisy, StepMode::OracleNoisy}) {
    EXPECT_EQ(parse_step_mode(to_string(mode)), mode);
  }
  EXPECT_EQ(parse_step_mode("greedy"), StepMode::GreedyNoiseless);
  EXPECT_THROW(parse_step_mode("Greedy"), InvalidArgument);
}

TEST(StepConfig, ValidatesFields) {
  StepConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.sigma_sq = -1.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.c = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.reorth_period = 0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(Project, SplitsIntoOrthogonalParts) {
  const Eigen::MatrixXd u = oracle::random_basis(30, 4, 1);
  const Eigen::VectorXd x = oracle::gaussian(30, 1, 2);
  const Projection pr = project(basis(u), x);
  EXPECT_NEAR(pr.p.dot(pr.r), 0.0, 1e-12);
  EXPECT_LT((pr.p + pr.r - x).norm(), 1e-13);
  EXPECT_LT((u.transpose() * pr.r).norm(), 1e-13);
  EXPECT_NEAR(pr.w.norm(), pr.p.norm(), 1e-13);
}

TEST(Project, RejectsBadObservations) {
  const OrthonormalBasis u = basis(oracle::random_basis(10, 2, 1));
  EXPECT_THROW(project(u, Eigen::VectorXd::Ones(9)), InvalidArgument);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(10);
  x(4) = INFINITY;
  EXPECT_THROW(project(u, x), InvalidArgument);
}

TEST(Alpha, ModesFollowTheirFormulas) {
  EXPECT_EQ(compute_alpha(mode_config(StepMode::GreedyNoiseless), 2.0, 0.5, 0.1, std::nullopt), 0.0);

  // c sigma^2/(1+sigma^2) (1-d/n) |x|^2 / |r|^2
  StepConfig practical = mode_config(StepMode::PracticalNoisy, 0.25);
  practical.c = 2.0;
  const double expected = 2.0 * 0.25 / 1.25 * (1.0 - 0.1) * 2.0 / 4.0;
  EXPECT_NEAR(compute_alpha(practical, 2.0, 4.0, 0.1, std::nullopt), expected, 1e-15);
  // Clamped to 1.
  EXPECT_EQ(compute_alpha(practical, 200.0, 1e-3, 0.1, std::nullopt), 1.0);

  const StepConfig oracle_cfg = mode_config(StepMode::OracleNoisy, 0.1);
  EXPECT_NEAR(compute_alpha(oracle_cfg, 3.0, 0.8, 0.1, OracleInfo{0.6}), 0.25, 1e-15);
  // |v_perp| > |r| can happen with noise; alpha stays in [0, 1].
  EXPECT_EQ(compute_alpha(oracle_cfg, 3.0, 0.5, 0.1, OracleInfo{0.6}), 0.0);
  EXPECT_THROW(compute_alpha(oracle_cfg, 3.0, 0.8, 0.1, std::nullopt), InvalidArgument);
}

TEST(Theta, RangeAndDegenerateProjection) {
  EXPECT_NEAR(compute_theta(0.0, 1.0, 1.0), M_PI / 4, 1e-15);
  EXPECT_EQ(compute_theta(1.0, 1.0, 1.0), 0.0);
  EXPECT_LT(compute_theta(0.0, 1e12, 1.0), M_PI / 2);
  EXPECT_THROW(compute_theta(0.0, 1.0, 0.0), DegenerateProjection);
}

TEST(NoiselessZetaRatio, PeaksAtTheGreedyAngle) {
  for (double ratio : {0.01, 0.3, 1.0, 5.0}) {
    const double best = std::atan(ratio);
    const double peak = noiseless_zeta_ratio(best, ratio, 1.0);
    EXPECT_NEAR(peak, 1.0 + ratio * ratio, 1e-12);
    for (double t = 0.0; t < M_PI / 2; t += 0.01) EXPECT_LE(noiseless_zeta_ratio(t, ratio, 1.0), peak + 1e-12);
  }
}

TEST(GrouseStep, MatchesReferenceUpdate) {
  Rng rng = make_rng(5);
  for (auto mode : {StepMode::GreedyNoiseless, StepMode::PracticalNoisy, StepMode::OracleNoisy}) {
    const PlantedModel model = make_planted(40, 4, 0.05, false, rng);
    const OrthonormalBasis u = random_orthonormal(40, 4, rng);
    const Sample s = draw_sample(model, rng);
    const OracleInfo info = oracle_info(u, s);
    const StepOutcome out = grouse_step(u, s.x, mode_config(mode, 0.05), info);
    ASSERT_FALSE(out.skipped);
    const Eigen::MatrixXd ref = oracle::geodesic_step(u.matrix(), s.x, out.alpha);
    EXPECT_LT((out.updated.matrix() - ref).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT(out.updated.orthonormality_error(), 1e-13);
  }
}

TEST(GrouseStep, UpdatedSpanContainsRotatedObservation) {
  // The new column direction is cos(theta) p/|p| + sin(theta) r/|r|; with alpha = 0
  // the observation itself lies in the updated span.
  const OrthonormalBasis u = basis(oracle::random_basis(20, 3, 11));
  const Eigen::VectorXd x = oracle::gaussian(20, 1, 12);
  const StepOutcome out = grouse_step(u, x, StepConfig{});
  const Eigen::MatrixXd q = out.updated.matrix();
  EXPECT_LT((x - q * (q.transpose() * x)).norm() / x.norm(), 1e-12);
}

TEST(GrouseStep, LeavesInputUntouched) {
  const Eigen::MatrixXd m = oracle::random_basis(20, 3, 11);
  const OrthonormalBasis u = basis(m);
  grouse_step(u, oracle::gaussian(20, 1, 12), StepConfig{});
  EXPECT_EQ(u.matrix(), m);
}

TEST(GrouseStep, SkipsDegenerateObservations) {
  const Eigen::MatrixXd m = oracle::random_basis(20, 3, 11);
  const OrthonormalBasis u = basis(m);
  // x in R(U): r = 0.
  StepOutcome in_span = grouse_step(u, m * Eigen::Vector3d(1.0, -2.0, 0.5), StepConfig{});
  EXPECT_TRUE(in_span.skipped);
  EXPECT_EQ(in_span.updated.matrix(), m);
  // x orthogonal to R(U): w = 0.
  Eigen::VectorXd x = oracle::gaussian(20, 1, 3);
  x -= m * (m.transpose() * x);
  EXPECT_TRUE(grouse_step(u, x, StepConfig{}).skipped);
  EXPECT_TRUE(grouse_step(u, Eigen::VectorXd::Zero(20), StepConfig{}).skipped);
}

TEST(GrouseStep, NoiselessIdentitiesAgainstOracleMetrics) {
  Rng rng = make_rng(17);
  const PlantedModel model = make_planted(30, 3, 0.0, false, rng);
  OrthonormalBasis u = random_orthonormal(30, 3, rng);
  const Eigen::MatrixXd ubar = model.ubar.matrix();
  for (int t = 0; t < 200; ++t) {
    const Sample s = draw_sample(model, rng);
    const StepOutcome out = grouse_step(u, s.x, StepConfig{});
    if (out.skipped) continue;
    const double before_z = oracle::zeta(u.matrix(), ubar);
    const double after_z = oracle::zeta(out.updated.matrix(), ubar);
    const double ratio = 1.0 + out.r.squaredNorm() / out.p.squaredNorm();
    EXPECT_NEAR(after_z / before_z, ratio, 1e-8 * ratio);
    const double drop = 1.0 - (ubar.transpose() * out.p).squaredNorm() / out.p.squaredNorm();
    EXPECT_NEAR(oracle::epsilon(u.matrix(), ubar) - oracle::epsilon(out.updated.matrix(), ubar), drop, 1e-9);
    u = out.updated;
  }
}

TEST(GrouseStep, AlphaOneIsAFixedPoint) {
  const OrthonormalBasis u = basis(oracle::random_basis(20, 3, 21));
  const StepOutcome out =
      grouse_step(u, oracle::gaussian(20, 1, 22), mode_config(StepMode::OracleNoisy, 0.1), OracleInfo{0.0});
  EXPECT_EQ(out.alpha, 1.0);
  EXPECT_EQ(out.theta, 0.0);
  EXPECT_LT((out.updated.matrix() - u.matrix()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(GrouseStep, DampedGainInequalityFailsAtLargeNoise) {
  // At sigma^2 = 0.1 the paired mean of zeta_{t+1}/zeta_t - 1 - (1-alpha)^2 |r|^2/|p|^2
  // is clearly negative, so the inequality cannot be asserted at this noise level.
  Rng rng = make_rng(2024);
  const Index n = 200, d = 10;
  const PlantedModel model = make_planted(n, d, 0.1, false, rng);
  const OrthonormalBasis u =
      basis_at_angles(model.ubar, Eigen::VectorXd::Constant(d, std::pow(0.5, 0.5 / d)), rng);
  const double z0 = determinant_similarity(u, model.ubar);
  double sum = 0.0, sum_sq = 0.0;
  const int draws = 20000;
  for (int k = 0; k < draws; ++k) {
    const Sample s = draw_sample(model, rng);
    const StepOutcome out = grouse_step(u, s.x, mode_config(StepMode::OracleNoisy, 0.1), oracle_info(u, s));
    const double gain = (1.0 - out.alpha) * (1.0 - out.alpha) * out.r.squaredNorm() / out.p.squaredNorm();
    const double diff = determinant_similarity(out.updated, model.ubar) / z0 - 1.0 - gain;
    sum += diff;
    sum_sq += diff * diff;
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sum_sq / draws - mean * mean) / draws);
  EXPECT_LT(mean, -3.0 * se);
}

TEST(GrouseEstimator, ReorthonormalizesOnSchedule) {
  Rng rng = make_rng(8);
  const PlantedModel model = make_planted(50, 5, 0.0, false, rng);
  StepConfig cfg;
  cfg.reorth_period = 10;
  GrouseEstimator est(random_orthonormal(50, 5, rng), cfg);
  int reorths = 0;
  for (int t = 0; t < 100; ++t) {
    const StepRecord rec = est.observe(draw_sample(model, rng).x);
    if (rec.reorthonormalized) ++reorths;
  }
  EXPECT_EQ(est.steps_observed(), 100);
  EXPECT_EQ(reorths, (100 - est.steps_skipped()) / 10);
  EXPECT_LT(est.basis().orthonormality_error(), 1e-12);
}

TEST(GrouseEstimator, ConvergesNoiseless) {
  Rng rng = make_rng(9);
  const PlantedModel model = make_planted(50, 3, 0.0, false, rng);
  GrouseEstimator est(random_orthonormal(50, 3, rng), StepConfig{});
  for (int t = 0; t < 3000; ++t) est.observe(draw_sample(model, rng).x);
  EXPECT_LT(frobenius_discrepancy(est.basis(), model.ubar), 1e-10);
}
