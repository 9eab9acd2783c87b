#include "grouse/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "grouse/analysis_bounds.hpp"
#include "grouse/data_model.hpp"
#include "grouse/errors.hpp"
#include "grouse/grouse_core.hpp"
#include "grouse/monte_carlo.hpp"
#include "grouse/random.hpp"
#include "grouse/subspace_metrics.hpp"

namespace grouse {
namespace {

constexpr double kStdErrors = 3.0;

struct Context {
  VerifyOptions options;
  std::vector<PropertyResult>* results;
  std::string suite;
  std::uint64_t stream = 0;

  bool full() const { return options.intensity == Intensity::Full; }
  std::int64_t pick(std::int64_t quick, std::int64_t full_value) const { return full() ? full_value : quick; }

  /// Each property gets an independent stream so adding one never shifts another.
  Rng rng() { return make_rng(derive_seed(options.seed, ++stream)); }
  MonteCarloPlan plan(std::int64_t draws) {
    MonteCarloPlan p;
    p.draws = draws;
    p.seed = derive_seed(options.seed, ++stream);
    p.threads = options.threads;
    return p;
  }

  /// deviation <= tolerance passes.
  void report(std::string name, double deviation, double tolerance, std::string detail = {}) {
    PropertyResult r;
    r.suite = suite;
    r.name = std::move(name);
    r.deviation = deviation;
    r.tolerance = tolerance;
    r.passed = deviation <= tolerance;
    r.detail = std::move(detail);
    results->push_back(std::move(r));
  }

  /// Two-sided z-score of `estimate` against an exact value.
  void report_mean(std::string name, const Estimate& estimate, double expected) {
    report(std::move(name), z_score(estimate.mean - expected, estimate.std_error), kStdErrors,
           "mean=" + fmt(estimate.mean) + " expected=" + fmt(expected) + " se=" + fmt(estimate.std_error));
  }

  static double z_score(double diff, double se) {
    if (se > 0.0) return std::abs(diff) / se;
    return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }

  static std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
  }
};

/// One-sided shortfall in standard errors: how far `value` sits below `floor`.
double shortfall(double value, double floor, double se) {
  if (value >= floor) return 0.0;
  return se > 0.0 ? (floor - value) / se : std::numeric_limits<double>::infinity();
}

Eigen::MatrixXd gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) g(i, j) = normal(rng);
  }
  return g;
}

Eigen::MatrixXd random_rotation(Index d, Rng& rng) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(d, d, rng));
  return qr.householderQ();
}

/// A random pair of bases whose distance varies from nearly equal to generic.
std::pair<OrthonormalBasis, OrthonormalBasis> random_pair(Index n, Index d, Rng& rng) {
  OrthonormalBasis ubar = random_orthonormal(n, d, rng);
  const double scale = std::pow(10.0, std::uniform_real_distribution<double>(-3.0, 1.0)(rng));
  OrthonormalBasis u = orthonormalize(ubar.matrix() + scale * gaussian(n, d, rng));
  return {std::move(u), std::move(ubar)};
}

// ---------------------------------------------------------------- metrics

void metrics_suite(Context& ctx) {
  {
    Rng rng = ctx.rng();
    double worst = 0.0;
    const std::int64_t pairs = ctx.pick(200, 2000);
    for (std::int64_t k = 0; k < pairs; ++k) {
      const Index n = std::uniform_int_distribution<Index>(2, 50)(rng);
      const Index d = std::uniform_int_distribution<Index>(1, std::min<Index>(6, n - 1))(rng);
      const auto [u, ubar] = random_pair(n, d, rng);
      worst = std::max(worst, std::abs(determinant_similarity(u, ubar) - determinant_similarity_explicit(u, ubar)));
    }
    ctx.report("zeta_product_matches_determinant", worst, 1e-9, std::to_string(pairs) + " pairs, n<=50");
  }
  {
    Rng rng = ctx.rng();
    double worst = 0.0;
    std::int64_t local = 0;
    const std::int64_t pairs = ctx.pick(500, 5000);
    for (std::int64_t k = 0; k < pairs; ++k) {
      const Index n = std::uniform_int_distribution<Index>(4, 60)(rng);
      const Index d = std::uniform_int_distribution<Index>(1, std::min<Index>(8, n - 1))(rng);
      const auto [u, ubar] = random_pair(n, d, rng);
      const SubspaceDistance m = measure(u, ubar);
      worst = std::max(worst, (1.0 - m.zeta) - m.epsilon);
      if (m.zeta >= 0.5) {
        ++local;
        worst = std::max(worst, m.epsilon - 2.0 * (1.0 - m.zeta));
      }
    }
    ctx.report("zeta_eps_inequalities", worst, 1e-9, std::to_string(local) + " pairs with zeta>=1/2");
  }
  {
    Rng rng = ctx.rng();
    double worst = 0.0;
    for (std::int64_t k = 0; k < ctx.pick(100, 1000); ++k) {
      const Index n = std::uniform_int_distribution<Index>(3, 40)(rng);
      const Index d = std::uniform_int_distribution<Index>(1, std::min<Index>(6, n - 1))(rng);
      const auto [u, ubar] = random_pair(n, d, rng);
      const OrthonormalBasis uq(u.matrix() * random_rotation(d, rng), OrthonormalBasis::AssumeOrthonormal{});
      const OrthonormalBasis ubarq(ubar.matrix() * random_rotation(d, rng), OrthonormalBasis::AssumeOrthonormal{});
      const SubspaceDistance a = measure(u, ubar);
      const SubspaceDistance b = measure(uq, ubarq);
      worst = std::max({worst, std::abs(a.zeta - b.zeta), std::abs(a.epsilon - b.epsilon)});
    }
    ctx.report("metrics_rotation_invariant", worst, 1e-10);
  }
  {
    Rng rng = ctx.rng();
    double worst = 0.0;
    for (std::int64_t k = 0; k < ctx.pick(100, 1000); ++k) {
      const Index n = std::uniform_int_distribution<Index>(3, 50)(rng);
      const Index d = std::uniform_int_distribution<Index>(1, std::min<Index>(6, n - 1))(rng);
      const auto [u, ubar] = random_pair(n, d, rng);
      const Eigen::ArrayXd c = principal_angles(u, ubar).cosines.array();
      worst = std::max(worst, std::abs(frobenius_discrepancy(u, ubar) - (1.0 - c.square()).sum()));
    }
    ctx.report("frobenius_matches_sine_sum", worst, 1e-10);
  }
  {
    Rng rng = ctx.rng();
    const Index d = 5;
    const Eigen::MatrixXd g = gaussian(d, d, rng);
    const Eigen::MatrixXd q = 0.5 * (g + g.transpose());
    ctx.report_mean("quadratic_ratio_trace_expectation", estimate_quadratic_ratio(q, ctx.plan(ctx.pick(20000, 100000))),
                    q.trace() / static_cast<double>(d));
  }
  {
    Rng rng = ctx.rng();
    double worst_orth = 0.0;
    double worst_span = 0.0;
    for (int k = 0; k < 20; ++k) {
      const OrthonormalBasis u = random_orthonormal(50, 5, rng);
      Eigen::MatrixXd drifted = u.matrix() + 1e-8 * gaussian(50, 5, rng);
      const OrthonormalBasis in(drifted, OrthonormalBasis::AssumeOrthonormal{});
      const OrthonormalBasis out = reorthonormalize(in);
      worst_orth = std::max(worst_orth, out.orthonormality_error());
      // Span check against the exact span of the drifted columns.
      worst_span = std::max(worst_span, std::abs(1.0 - determinant_similarity(out, orthonormalize(drifted))));
    }
    ctx.report("reorthonormalize_orthonormal", worst_orth, 1e-14);
    ctx.report("reorthonormalize_preserves_span", worst_span, 1e-10);
  }
}

// ---------------------------------------------------------------- step

void step_suite(Context& ctx) {
  StepConfig greedy;
  greedy.theta_scale = ctx.options.theta_scale;

  {
    Rng rng = ctx.rng();
    double worst_perp = 0.0;
    double worst_sum = 0.0;
    double worst_orth = 0.0;
    for (int k = 0; k < ctx.pick(200, 2000); ++k) {
      const Index n = std::uniform_int_distribution<Index>(3, 80)(rng);
      const Index d = std::uniform_int_distribution<Index>(1, std::min<Index>(8, n - 1))(rng);
      const PlantedModel model = make_planted(n, d, k % 2 ? 0.1 : 0.0, false, rng);
      const OrthonormalBasis u = random_orthonormal(n, d, rng);
      const Sample s = draw_sample(model, rng);
      StepConfig cfg = greedy;
      cfg.mode = k % 2 ? StepMode::PracticalNoisy : StepMode::GreedyNoiseless;
      cfg.sigma_sq = model.sigma_sq;
      const StepOutcome out = grouse_step(u, s.x, cfg);
      worst_perp = std::max(worst_perp, std::abs(out.p.dot(out.r)) / (out.p.norm() * out.r.norm()));
      worst_sum = std::max(worst_sum, (out.p + out.r - s.x).norm() / s.x.norm());
      if (!out.skipped) worst_orth = std::max(worst_orth, out.updated.orthonormality_error());
    }
    ctx.report("projection_residual_orthogonal", worst_perp, 1e-9, "|p.r| / (|p||r|)");
    ctx.report("projection_residual_sum", worst_sum, 1e-12, "|p + r - x| / |x|");
    ctx.report("update_preserves_orthonormality", worst_orth, 1e-9);
  }
  {
    Rng rng = ctx.rng();
    double worst_ratio = 0.0;
    double worst_eps = 0.0;
    std::int64_t applied = 0;
    const std::int64_t trajectories = ctx.pick(10, 100);
    const std::int64_t steps = ctx.pick(200, 500);
    for (std::int64_t k = 0; k < trajectories; ++k) {
      const PlantedModel model = make_planted(100, 5, 0.0, true, rng);
      OrthonormalBasis u = random_orthonormal(100, 5, rng);
      SubspaceDistance now = measure(u, model.ubar);
      for (std::int64_t t = 0; t < steps; ++t) {
        const Sample s = draw_sample(model, rng);
        StepOutcome out = grouse_step(u, s.x, greedy);
        if (out.skipped) continue;
        const SubspaceDistance next = measure(out.updated, model.ubar);
        const double predicted_ratio = 1.0 + out.r.squaredNorm() / out.p.squaredNorm();
        const Eigen::VectorXd truth_part = model.ubar.matrix() * (model.ubar.matrix().transpose() * out.p);
        const double predicted_drop = 1.0 - truth_part.squaredNorm() / out.p.squaredNorm();
        worst_ratio = std::max(worst_ratio, std::abs(next.zeta / now.zeta - predicted_ratio) / predicted_ratio);
        worst_eps = std::max(worst_eps, std::abs((now.epsilon - next.epsilon) - predicted_drop));
        ++applied;
        u = std::move(out.updated);
        now = next;
      }
    }
    const std::string detail = std::to_string(applied) + " noiseless steps";
    ctx.report("noiseless_zeta_ratio_identity", worst_ratio, 1e-8, detail);
    ctx.report("noiseless_eps_decrease_identity", worst_eps, 1e-8, detail);
  }
  {
    // The produced step must beat the same step with theta perturbed by +-10%,
    // each evaluated through the closed-form one-step ratio.
    Rng rng = ctx.rng();
    std::int64_t violations = 0;
    const std::int64_t instances = ctx.pick(100, 1000);
    for (std::int64_t k = 0; k < instances; ++k) {
      const Index n = std::uniform_int_distribution<Index>(4, 50)(rng);
      const Index d = std::uniform_int_distribution<Index>(1, std::min<Index>(5, n / 2))(rng);
      const PlantedModel model = make_planted(n, d, 0.0, false, rng);
      const OrthonormalBasis u = basis_at_angles(
          model.ubar, Eigen::VectorXd::Constant(d, std::uniform_real_distribution<double>(0.2, 0.9)(rng)), rng);
      const Sample s = draw_sample(model, rng);
      const StepOutcome out = grouse_step(u, s.x, greedy);
      if (out.skipped) continue;
      const double actual = determinant_similarity(out.updated, model.ubar) / determinant_similarity(u, model.ubar);
      const double v_par = out.p.norm();
      const double v_perp = out.r.norm();
      const double best = std::atan(v_perp / v_par);
      const double lower = noiseless_zeta_ratio(0.9 * best, v_perp, v_par);
      const double upper = noiseless_zeta_ratio(1.1 * best, v_perp, v_par);
      if (!(actual > lower && actual > upper)) ++violations;
    }
    ctx.report("greedy_step_optimality", static_cast<double>(violations), 0.0,
               std::to_string(instances) + " instances, theta_scale=" + Context::fmt(greedy.theta_scale));
  }
  {
    Rng rng = ctx.rng();
    double worst = 0.0;
    for (int k = 0; k < ctx.pick(50, 500); ++k) {
      const Index n = std::uniform_int_distribution<Index>(4, 60)(rng);
      const Index d = std::uniform_int_distribution<Index>(1, std::min<Index>(6, n - 1))(rng);
      const PlantedModel model = make_planted(n, d, 0.01, false, rng);
      const OrthonormalBasis u = random_orthonormal(n, d, rng);
      const OrthonormalBasis uq(u.matrix() * random_rotation(d, rng), OrthonormalBasis::AssumeOrthonormal{});
      const Sample s = draw_sample(model, rng);
      const StepOutcome a = grouse_step(u, s.x, greedy);
      const StepOutcome b = grouse_step(uq, s.x, greedy);
      worst = std::max(worst, std::abs(1.0 - determinant_similarity(a.updated, b.updated)));
    }
    ctx.report("step_subspace_equivariant", worst, 1e-9);
  }
  {
    Rng rng = ctx.rng();
    double worst = 0.0;
    StepConfig oracle_cfg;
    oracle_cfg.mode = StepMode::OracleNoisy;
    oracle_cfg.sigma_sq = 0.1;
    for (int k = 0; k < ctx.pick(50, 500); ++k) {
      const PlantedModel model = make_planted(30, 4, 0.1, false, rng);
      const OrthonormalBasis u = random_orthonormal(30, 4, rng);
      const Sample s = draw_sample(model, rng);
      const StepOutcome out = grouse_step(u, s.x, oracle_cfg, OracleInfo{0.0});
      worst = std::max({worst, std::abs(1.0 - out.alpha), std::abs(1.0 - determinant_similarity(out.updated, u))});
    }
    ctx.report("alpha_one_fixed_point", worst, 1e-12);
  }
  {
    // E[c sigma^2/(1+sigma^2)(1-d/n)|x|^2] = E[|r|^2 - |v_perp|^2] = (1-d/n) sigma^2 at fixed U, v.
    Rng rng = ctx.rng();
    const Index n = ctx.full() ? 2000 : 400;
    const Index d = 20;
    const double sigma_sq = 1.0;
    const PlantedModel model = make_planted(n, d, sigma_sq, false, rng);
    const OrthonormalBasis u = random_orthonormal(n, d, rng);
    const Sample base = draw_sample(model, rng);
    const double v_perp_sq = oracle_info(u, base).v_perp_norm_sq;
    const double shrink = sigma_sq / (1.0 + sigma_sq) * (1.0 - static_cast<double>(d) / static_cast<double>(n));
    RunningMoments paired, practical_alpha, oracle_alpha;
    std::normal_distribution<double> noise(0.0, std::sqrt(sigma_sq / static_cast<double>(n)));
    for (std::int64_t k = 0; k < 10000; ++k) {
      Eigen::VectorXd x = base.v;
      for (Index i = 0; i < n; ++i) x(i) += noise(rng);
      const Projection proj = project(u, x);
      const double r_sq = proj.r.squaredNorm();
      paired.add(shrink * x.squaredNorm() - (r_sq - v_perp_sq));
      practical_alpha.add(std::clamp(shrink * x.squaredNorm() / r_sq, 0.0, 1.0));
      oracle_alpha.add(std::clamp(1.0 - v_perp_sq / r_sq, 0.0, 1.0));
    }
    ctx.report_mean("alpha_forms_agree_numerator", paired.estimate(), 0.0);
    const double rel = std::abs(practical_alpha.mean() - oracle_alpha.mean()) / oracle_alpha.mean();
    ctx.report("alpha_forms_agree_mean", rel, 0.01,
               "practical=" + Context::fmt(practical_alpha.mean()) + " oracle=" + Context::fmt(oracle_alpha.mean()));
  }
}

// ---------------------------------------------------------------- data

void data_suite(Context& ctx) {
  {
    Rng rng = ctx.rng();
    const PlantedModel model = make_planted(100, 5, 0.5, false, rng);
    const OrthonormalBasis u = random_orthonormal(100, 5, rng);
    const NoiseEnergyStatistics stats = estimate_noise_energy(model, u, ctx.plan(ctx.pick(20000, 100000)));
    ctx.report_mean("noise_to_signal_energy", stats.noise_to_signal, 0.5);
    ctx.report_mean("noise_energy_outside_subspace", stats.perp_energy, (1.0 - 5.0 / 100.0) * 0.5);
    ctx.report_mean("noise_energy_inside_subspace", stats.par_energy, 5.0 / 100.0 * 0.5);
  }
  {
    Rng rng = ctx.rng();
    PlantedModel model = make_planted(60, 4, 0.0, false, rng);
    model.normalize_signal = false;
    const ProjectionStatistics stats =
        estimate_projection_energy(model, random_orthonormal(60, 4, rng), ctx.plan(ctx.pick(20000, 100000)));
    ctx.report_mean("unnormalized_signal_energy", stats.signal_energy, 4.0);
  }
  {
    Rng rng = ctx.rng();
    const PlantedModel model = make_planted(100, 5, 0.2, true, rng);
    double worst_span = 0.0, worst_norm = 0.0, worst_sum = 0.0;
    const auto& ubar = model.ubar.matrix();
    const std::int64_t draws = ctx.pick(10000, 1000000);
    for (std::int64_t k = 0; k < draws; ++k) {
      const Sample s = draw_sample(model, rng);
      const Eigen::VectorXd outside = s.v - ubar * (ubar.transpose() * s.v);
      worst_span = std::max(worst_span, outside.norm() / s.v.norm());
      worst_norm = std::max(worst_norm, std::abs(s.v.norm() - 1.0));
      worst_sum = std::max(worst_sum, (s.x - (s.v + s.xi)).cwiseAbs().maxCoeff());
    }
    ctx.report("sample_signal_in_truth", worst_span, 1e-10, std::to_string(draws) + " samples");
    ctx.report("sample_signal_unit_norm", worst_norm, 1e-12);
    ctx.report("sample_is_signal_plus_noise", worst_sum, 0.0);
  }
  {
    Rng rng = ctx.rng();
    const Index n = 20, d = 2;
    const OrthonormalBasis ubar = random_orthonormal(n, d, rng);
    const Estimate e = estimate_initial_zeta(ubar, ctx.plan(100000));
    const double exact = exact_initial_zeta(n, d);
    ctx.report("random_init_zeta_exact_moment", Context::z_score(e.mean - exact, e.std_error), kStdErrors,
               "mean=" + Context::fmt(e.mean) + " 1/binom(n,d)=" + Context::fmt(exact) +
                   " implied C=" + Context::fmt(e.mean / approx_initial_zeta(n, d)));
  }
  {
    Rng rng = ctx.rng();
    const Index n = 80, d = 6;
    const PlantedModel model = make_planted(n, d, 0.0, false, rng);
    Eigen::VectorXd cosines(d);
    for (Index i = 0; i < d; ++i) cosines(i) = std::uniform_real_distribution<double>(0.3, 1.0)(rng);
    const OrthonormalBasis u = basis_at_angles(model.ubar, cosines, rng);
    const SubspaceDistance m = measure(u, model.ubar);
    const ProjectionStatistics stats = estimate_projection_energy(model, u, ctx.plan(ctx.pick(20000, 100000)));
    ctx.report_mean("perp_fraction_equals_eps_over_d", stats.perp_fraction, m.epsilon / static_cast<double>(d));
    ctx.report("perp_fraction_at_least_det_gap",
               shortfall(stats.perp_fraction.mean, (1.0 - m.zeta) / static_cast<double>(d),
                         stats.perp_fraction.std_error),
               kStdErrors);
    ctx.report("off_truth_projection_lower_bound",
               shortfall(stats.par_off_truth.mean, m.angles.last_cos_sq() * m.epsilon / static_cast<double>(d),
                         stats.par_off_truth.std_error),
               kStdErrors);
  }
  {
    Rng rng = ctx.rng();
    const Index n = 1000, d = 20;
    const double density = sparse_density(n, d);
    RunningMoments fraction;
    for (int k = 0; k < 100; ++k) {
      const Eigen::MatrixXd a = draw_sparse_gaussian(n, d, density, rng);
      for (Index j = 0; j < d; ++j) {
        fraction.add(static_cast<double>((a.col(j).array() != 0.0).count()) / static_cast<double>(n));
      }
    }
    ctx.report_mean("sparse_generation_density", fraction.estimate(), density);
  }
}

// ---------------------------------------------------------------- bounds

void bounds_suite(Context& ctx) {
  const Index n = ctx.full() ? 500 : 200;
  const Index d = 10;
  const std::int64_t draws = ctx.pick(2000, 10000);
  StepConfig oracle_cfg;
  oracle_cfg.mode = StepMode::OracleNoisy;
  oracle_cfg.theta_scale = ctx.options.theta_scale;

  auto params_for = [&](double sigma_sq) {
    BoundParams p;
    p.n = n;
    p.d = d;
    p.sigma_sq = sigma_sq;
    return p;
  };

  {
    Rng rng = ctx.rng();
    double worst = 0.0;
    for (double sigma_sq : {1e-3, 1e-1}) {
      const PlantedModel model = make_planted(n, d, sigma_sq, false, rng);
      oracle_cfg.sigma_sq = sigma_sq;
      for (double zeta : {0.01, 0.1, 0.5}) {
        const Eigen::VectorXd cos = Eigen::VectorXd::Constant(d, std::pow(zeta, 0.5 / static_cast<double>(d)));
        const OrthonormalBasis u = basis_at_angles(model.ubar, cos, rng);
        const OneStepStatistics stats = simulate_one_step(model, u, oracle_cfg, ctx.plan(draws));
        // E[zeta_{t+1}/zeta_t] >= 1 + E[(1-alpha)^2 |r|^2/|p|^2] only holds in the
        // small-noise regime; at sigma^2 = 0.1 it is measurably violated.
        if (sigma_sq <= 1e-3) {
          const double se = std::hypot(stats.zeta_ratio.std_error, stats.damped_gain.std_error);
          worst = std::max(worst, shortfall(stats.zeta_ratio.mean, 1.0 + stats.damped_gain.mean, se));
        }
        // E[zeta_{t+1}] >= expected_zeta_rate_bound(zeta_t).
        const double bound = expected_zeta_rate_bound(stats.zeta, params_for(sigma_sq));
        ctx.report("zeta_rate_bound sigma2=" + Context::fmt(sigma_sq) + " zeta=" + Context::fmt(zeta),
                   shortfall(stats.zeta_next.mean, bound, stats.zeta_next.std_error), kStdErrors,
                   "mean=" + Context::fmt(stats.zeta_next.mean) + " bound=" + Context::fmt(bound));
      }
    }
    ctx.report("damped_gain_lower_bound", worst, kStdErrors, "sigma2=0.001, worst shortfall in combined standard errors");
  }
  {
    Rng rng = ctx.rng();
    const double sigma_sq = 1e-3;
    const PlantedModel model = make_planted(n, d, sigma_sq, false, rng);
    oracle_cfg.sigma_sq = sigma_sq;
    const Eigen::VectorXd cos = Eigen::VectorXd::Constant(d, std::pow(0.6, 0.5 / static_cast<double>(d)));
    const OrthonormalBasis u = basis_at_angles(model.ubar, cos, rng);
    const OneStepStatistics stats = simulate_one_step(model, u, oracle_cfg, ctx.plan(draws));
    const double bound = expected_eps_rate_bound(stats.epsilon, stats.cos_sq_last, params_for(sigma_sq));
    // Upper bound: excess of the mean over the bound, in standard errors.
    ctx.report("eps_rate_bound sigma2=0.001 zeta=0.6",
               shortfall(bound, stats.eps_next.mean, stats.eps_next.std_error), kStdErrors,
               "mean=" + Context::fmt(stats.eps_next.mean) + " bound=" + Context::fmt(bound));
    const bool outside_ball = stats.epsilon >= static_cast<double>(d * d) * sigma_sq;
    ctx.report("eps_expected_decrease_outside_noise_ball",
               outside_ball ? shortfall(stats.eps_decrease.mean, 0.0, stats.eps_decrease.std_error)
                            : std::numeric_limits<double>::infinity(),
               kStdErrors, "eps_t=" + Context::fmt(stats.epsilon));
  }
  {
    double worst_regression = 0.0;
    double worst_monotone = 0.0;
    double worst_noiseless = 0.0;
    for (double zeta = 0.01; zeta <= 1.0; zeta += 0.01) {
      double previous = std::numeric_limits<double>::infinity();
      for (double sigma_sq : {0.0, 1e-6, 1e-4, 1e-2, 1e-1, 1.0, 10.0}) {
        const double b = expected_zeta_rate_bound(zeta, params_for(sigma_sq));
        worst_regression = std::max(worst_regression, zeta - b);
        worst_monotone = std::max(worst_monotone, b - previous);
        previous = b;
      }
      const double eps = static_cast<double>(d) * (1.0 - zeta);
      const double c2 = 0.5 + 0.5 * zeta;
      worst_noiseless = std::max(worst_noiseless, std::abs(expected_eps_rate_bound(eps, c2, params_for(0.0)) -
                                                           (1.0 - c2 / static_cast<double>(d)) * eps));
    }
    ctx.report("zeta_bound_never_regresses", worst_regression, 0.0);
    ctx.report("zeta_bound_monotone_in_noise", worst_monotone, 0.0);
    ctx.report("eps_bound_noiseless_reduction", worst_noiseless, 1e-15);
  }
}

}  // namespace

VerifySuite parse_verify_suite(std::string_view name) {
  if (name == "metrics") return VerifySuite::Metrics;
  if (name == "step") return VerifySuite::Step;
  if (name == "data") return VerifySuite::Data;
  if (name == "bounds") return VerifySuite::Bounds;
  if (name == "all") return VerifySuite::All;
  throw InvalidArgument("unknown suite '" + std::string(name) + "' (expected metrics|step|data|bounds|all)");
}

Intensity parse_intensity(std::string_view name) {
  if (name == "quick") return Intensity::Quick;
  if (name == "full") return Intensity::Full;
  throw InvalidArgument("unknown intensity '" + std::string(name) + "' (expected quick|full)");
}

std::vector<PropertyResult> verify(const VerifyOptions& options) {
  std::vector<PropertyResult> results;
  Context ctx{options, &results, {}, 0};
  const auto run = [&](VerifySuite which, const char* name, void (*suite)(Context&)) {
    if (options.suite != VerifySuite::All && options.suite != which) return;
    ctx.suite = name;
    ctx.stream = static_cast<std::uint64_t>(which) << 32;
    suite(ctx);
  };
  run(VerifySuite::Metrics, "metrics", &metrics_suite);
  run(VerifySuite::Step, "step", &step_suite);
  run(VerifySuite::Data, "data", &data_suite);
  run(VerifySuite::Bounds, "bounds", &bounds_suite);
  return results;
}

void print_property(std::ostream& out, const PropertyResult& r) {
  out << (r.passed ? "PASS " : "FAIL ") << r.suite << '/' << r.name << "  deviation=" << std::setprecision(4)
      << r.deviation << " tolerance=" << r.tolerance;
  if (!r.detail.empty()) out << "  " << r.detail;
  out << '\n';
}

}  // namespace grouse
