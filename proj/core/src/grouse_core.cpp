#include "grouse/grouse_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "grouse/errors.hpp"

namespace grouse {

std::string_view to_string(StepMode mode) {
  switch (mode) {
    case StepMode::GreedyNoiseless:
      return "greedy";
    case StepMode::PracticalNoisy:
      return "practical";
    case StepMode::OracleNoisy:
      return "oracle";
  }
  return "unknown";
}

StepMode parse_step_mode(std::string_view name) {
  if (name == "greedy") return StepMode::GreedyNoiseless;
  if (name == "practical") return StepMode::PracticalNoisy;
  if (name == "oracle") return StepMode::OracleNoisy;
  throw InvalidArgument("unknown step mode '" + std::string(name) + "' (expected greedy|practical|oracle)");
}

void StepConfig::validate() const {
  if (!(sigma_sq >= 0.0) || !std::isfinite(sigma_sq)) {
    throw InvalidArgument("sigma_sq must be finite and >= 0");
  }
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw InvalidArgument("c must be finite and > 0");
  }
  if (!(skip_norm_tol > 0.0)) {
    throw InvalidArgument("skip_norm_tol must be > 0");
  }
  if (reorth_period && *reorth_period <= 0) {
    throw InvalidArgument("reorth_period must be positive (or disabled)");
  }
  if (!(theta_scale > 0.0) || !std::isfinite(theta_scale)) {
    throw InvalidArgument("theta_scale must be finite and > 0");
  }
}

Projection project(const OrthonormalBasis& u, const Eigen::VectorXd& x) {
  if (x.size() != u.ambient_dim()) {
    throw InvalidArgument("observation has length " + std::to_string(x.size()) + ", basis expects " +
                          std::to_string(u.ambient_dim()));
  }
  if (!x.allFinite()) {
    throw InvalidArgument("observation has non-finite entries");
  }
  Projection out;
  out.w.noalias() = u.matrix().transpose() * x;
  out.p.noalias() = u.matrix() * out.w;
  out.r = x - out.p;
  return out;
}

double compute_alpha(const StepConfig& cfg, double x_norm_sq, double r_norm_sq, double subspace_fraction,
                     const std::optional<OracleInfo>& oracle) {
  if (!(r_norm_sq > cfg.skip_norm_tol * cfg.skip_norm_tol)) {
    throw InvalidArgument("compute_alpha requires a non-vanishing residual");
  }
  double alpha = 0.0;
  switch (cfg.mode) {
    case StepMode::GreedyNoiseless:
      return 0.0;
    case StepMode::PracticalNoisy:
      alpha = cfg.c * cfg.sigma_sq / (1.0 + cfg.sigma_sq) * (1.0 - subspace_fraction) * x_norm_sq / r_norm_sq;
      break;
    case StepMode::OracleNoisy:
      if (!oracle) {
        throw InvalidArgument("OracleNoisy step size needs OracleInfo");
      }
      alpha = 1.0 - oracle->v_perp_norm_sq / r_norm_sq;
      break;
  }
  return std::clamp(alpha, 0.0, 1.0);
}

double compute_theta(double alpha, double r_norm, double p_norm, double skip_norm_tol) {
  if (!(p_norm > skip_norm_tol)) {
    throw DegenerateProjection("projection norm " + std::to_string(p_norm) + " is at or below tolerance");
  }
  return std::atan((1.0 - alpha) * r_norm / p_norm);
}

double noiseless_zeta_ratio(double theta, double v_perp_norm, double v_par_norm) {
  const double f = std::cos(theta) + (v_perp_norm / v_par_norm) * std::sin(theta);
  return f * f;
}

StepOutcome grouse_step(const OrthonormalBasis& u, const Eigen::VectorXd& x, const StepConfig& cfg,
                        const std::optional<OracleInfo>& oracle) {
  Projection proj = project(u, x);
  const double w_norm = proj.w.norm();
  const double p_norm = proj.p.norm();
  const double r_norm = proj.r.norm();
  const double tol = cfg.skip_norm_tol;

  if (w_norm <= tol || p_norm <= tol || r_norm <= tol) {
    return StepOutcome{std::move(proj.w), std::move(proj.p), std::move(proj.r), 0.0, 0.0, u, true};
  }

  const double n = static_cast<double>(u.ambient_dim());
  const double d = static_cast<double>(u.dim());
  const double alpha = compute_alpha(cfg, x.squaredNorm(), r_norm * r_norm, d / n, oracle);
  const double theta = cfg.theta_scale * compute_theta(alpha, r_norm, p_norm, tol);

  // (y/|y| - p/|p|) = (cos(theta) - 1) p/|p| + sin(theta) r/|r|
  const Eigen::VectorXd direction =
      ((std::cos(theta) - 1.0) / p_norm) * proj.p + (std::sin(theta) / r_norm) * proj.r;
  Eigen::MatrixXd updated = u.matrix();
  updated.noalias() += direction * (proj.w / w_norm).transpose();
  if (!updated.allFinite()) {
    throw NumericalError("non-finite entries after the rank-one update");
  }

  return StepOutcome{std::move(proj.w),
                     std::move(proj.p),
                     std::move(proj.r),
                     alpha,
                     theta,
                     OrthonormalBasis(std::move(updated), OrthonormalBasis::AssumeOrthonormal{}),
                     false};
}

GrouseEstimator::GrouseEstimator(OrthonormalBasis initial, StepConfig cfg)
    : basis_(std::move(initial)), cfg_(cfg) {
  cfg_.validate();
}

StepRecord GrouseEstimator::observe(const Eigen::VectorXd& x, const std::optional<OracleInfo>& oracle) {
  StepOutcome outcome = grouse_step(basis_, x, cfg_, oracle);
  ++observed_;
  StepRecord record;
  record.alpha = outcome.alpha;
  record.theta = outcome.theta;
  record.p_norm_sq = outcome.p.squaredNorm();
  record.r_norm_sq = outcome.r.squaredNorm();
  record.skipped = outcome.skipped;
  if (outcome.skipped) {
    ++skipped_;
    return record;
  }
  ++applied_;
  if (cfg_.reorth_period && applied_ % *cfg_.reorth_period == 0) {
    basis_ = reorthonormalize(outcome.updated);
    record.reorthonormalized = true;
  } else {
    basis_ = std::move(outcome.updated);
  }
  return record;
}

}  // namespace grouse
