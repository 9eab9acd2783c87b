#include "grouse/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "grouse/errors.hpp"
#include "grouse/random.hpp"
#include "parallel.hpp"

namespace grouse {

void RunningMoments::add(double x) {
  ++count_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (x - mean_);
}

void RunningMoments::merge(const RunningMoments& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double total = na + nb;
  const double delta = other.mean_ - mean_;
  mean_ += delta * nb / total;
  m2_ += other.m2_ + delta * delta * na * nb / total;
  count_ += other.count_;
}

double RunningMoments::variance() const {
  return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
}

Estimate RunningMoments::estimate() const {
  Estimate e;
  e.mean = mean_;
  e.count = count_;
  e.std_error = count_ > 0 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
  return e;
}

namespace {

/// Runs `body(rng, draws, acc)` over the fixed chunk partition of `plan` and
/// merges the per-chunk accumulators in chunk order.
template <class Acc, class Body>
Acc run_chunks(const MonteCarloPlan& plan, Body&& body) {
  if (plan.draws <= 0) throw InvalidArgument("Monte Carlo plan needs at least one draw");
  const int chunks = std::max(1, plan.chunks);
  std::vector<Acc> partial(static_cast<std::size_t>(chunks));
  detail::parallel_for(partial.size(), plan.threads, [&](std::size_t c) {
    const auto chunk = static_cast<std::int64_t>(c);
    const std::int64_t share = plan.draws / chunks + (chunk < plan.draws % chunks ? 1 : 0);
    Rng rng = make_rng(derive_seed(plan.seed, c));
    body(rng, share, partial[c]);
  });
  Acc total;
  for (const auto& acc : partial) total.merge(acc);
  return total;
}

struct OneStepAcc {
  RunningMoments zeta_next, eps_next, zeta_ratio, damped_gain, eps_decrease;
  std::int64_t skipped = 0;
  void merge(const OneStepAcc& o) {
    zeta_next.merge(o.zeta_next);
    eps_next.merge(o.eps_next);
    zeta_ratio.merge(o.zeta_ratio);
    damped_gain.merge(o.damped_gain);
    eps_decrease.merge(o.eps_decrease);
    skipped += o.skipped;
  }
};

struct SingleAcc {
  RunningMoments value;
  void merge(const SingleAcc& o) { value.merge(o.value); }
};

struct NoiseAcc {
  RunningMoments ratio, perp, par;
  void merge(const NoiseAcc& o) {
    ratio.merge(o.ratio);
    perp.merge(o.perp);
    par.merge(o.par);
  }
};

struct ProjectionAcc {
  RunningMoments perp, off_truth, energy;
  void merge(const ProjectionAcc& o) {
    perp.merge(o.perp);
    off_truth.merge(o.off_truth);
    energy.merge(o.energy);
  }
};

void check_compatible(const PlantedModel& model, const OrthonormalBasis& u) {
  if (model.ambient_dim() != u.ambient_dim() || model.dim() != u.dim()) {
    throw InvalidArgument("basis and planted model dimensions differ");
  }
}

}  // namespace

OneStepStatistics simulate_one_step(const PlantedModel& model, const OrthonormalBasis& u, const StepConfig& cfg,
                                    const MonteCarloPlan& plan) {
  check_compatible(model, u);
  cfg.validate();
  const SubspaceDistance start = measure(u, model.ubar);
  const bool needs_oracle = cfg.mode == StepMode::OracleNoisy;

  const OneStepAcc acc = run_chunks<OneStepAcc>(plan, [&](Rng& rng, std::int64_t draws, OneStepAcc& out) {
    for (std::int64_t i = 0; i < draws; ++i) {
      const Sample sample = draw_sample(model, rng);
      std::optional<OracleInfo> oracle;
      if (needs_oracle) oracle = oracle_info(u, sample);
      const StepOutcome step = grouse_step(u, sample.x, cfg, oracle);
      const SubspaceDistance next = step.skipped ? start : measure(step.updated, model.ubar);
      out.zeta_next.add(next.zeta);
      out.eps_next.add(next.epsilon);
      out.zeta_ratio.add(next.zeta / start.zeta);
      out.eps_decrease.add(start.epsilon - next.epsilon);
      const double gain = step.skipped ? 0.0
                                       : (1.0 - step.alpha) * (1.0 - step.alpha) * step.r.squaredNorm() /
                                             step.p.squaredNorm();
      out.damped_gain.add(gain);
      out.skipped += step.skipped ? 1 : 0;
    }
  });

  OneStepStatistics stats;
  stats.zeta = start.zeta;
  stats.epsilon = start.epsilon;
  stats.cos_sq_last = start.angles.last_cos_sq();
  stats.zeta_next = acc.zeta_next.estimate();
  stats.eps_next = acc.eps_next.estimate();
  stats.zeta_ratio = acc.zeta_ratio.estimate();
  stats.damped_gain = acc.damped_gain.estimate();
  stats.eps_decrease = acc.eps_decrease.estimate();
  stats.skipped = acc.skipped;
  return stats;
}

Estimate estimate_initial_zeta(const OrthonormalBasis& ubar, const MonteCarloPlan& plan) {
  const Index n = ubar.ambient_dim();
  const Index d = ubar.dim();
  return run_chunks<SingleAcc>(plan,
                               [&](Rng& rng, std::int64_t draws, SingleAcc& out) {
                                 for (std::int64_t i = 0; i < draws; ++i) {
                                   out.value.add(determinant_similarity(random_orthonormal(n, d, rng), ubar));
                                 }
                               })
      .value.estimate();
}

Estimate estimate_quadratic_ratio(const Eigen::MatrixXd& q, const MonteCarloPlan& plan) {
  if (q.rows() != q.cols() || q.rows() == 0) throw InvalidArgument("Q must be square and non-empty");
  const Index d = q.rows();
  return run_chunks<SingleAcc>(plan,
                               [&](Rng& rng, std::int64_t draws, SingleAcc& out) {
                                 std::normal_distribution<double> normal;
                                 Eigen::VectorXd x(d);
                                 for (std::int64_t i = 0; i < draws; ++i) {
                                   for (Index k = 0; k < d; ++k) x(k) = normal(rng);
                                   out.value.add(x.dot(q * x) / x.squaredNorm());
                                 }
                               })
      .value.estimate();
}

NoiseEnergyStatistics estimate_noise_energy(const PlantedModel& model, const OrthonormalBasis& u,
                                            const MonteCarloPlan& plan) {
  check_compatible(model, u);
  const NoiseAcc acc = run_chunks<NoiseAcc>(plan, [&](Rng& rng, std::int64_t draws, NoiseAcc& out) {
    for (std::int64_t i = 0; i < draws; ++i) {
      const Sample s = draw_sample(model, rng);
      const double v_sq = s.v.squaredNorm();
      const Eigen::VectorXd coeffs = u.matrix().transpose() * s.xi;
      const double par = coeffs.squaredNorm();
      const double total = s.xi.squaredNorm();
      out.ratio.add(total / v_sq);
      out.par.add(par / v_sq);
      out.perp.add((total - par) / v_sq);
    }
  });
  return NoiseEnergyStatistics{acc.ratio.estimate(), acc.perp.estimate(), acc.par.estimate()};
}

ProjectionStatistics estimate_projection_energy(const PlantedModel& model, const OrthonormalBasis& u,
                                                const MonteCarloPlan& plan) {
  check_compatible(model, u);
  const auto& ubar = model.ubar.matrix();
  const ProjectionAcc acc = run_chunks<ProjectionAcc>(plan, [&](Rng& rng, std::int64_t draws, ProjectionAcc& out) {
    for (std::int64_t i = 0; i < draws; ++i) {
      const Sample s = draw_sample(model, rng);
      const double v_sq = s.v.squaredNorm();
      const Eigen::VectorXd v_par = u.matrix() * (u.matrix().transpose() * s.v);
      const Eigen::VectorXd off = v_par - ubar * (ubar.transpose() * v_par);
      out.perp.add((s.v - v_par).squaredNorm() / v_sq);
      out.off_truth.add(off.squaredNorm() / v_sq);
      out.energy.add(v_sq);
    }
  });
  return ProjectionStatistics{acc.perp.estimate(), acc.off_truth.estimate(), acc.energy.estimate()};
}

}  // namespace grouse
