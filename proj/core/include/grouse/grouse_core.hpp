#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include <Eigen/Dense>

#include "grouse/subspace_metrics.hpp"

namespace grouse {

/// How the damping factor alpha of the step size is chosen.
enum class StepMode {
  GreedyNoiseless,  ///< alpha = 0: the greedy geodesic step.
  PracticalNoisy,   ///< alpha from observables and the known noise bound sigma^2.
  OracleNoisy,      ///< alpha = 1 - |v_perp|^2 / |r|^2, needs ground truth.
};

std::string_view to_string(StepMode mode);
/// Accepts "greedy", "practical", "oracle". Throws InvalidArgument otherwise.
StepMode parse_step_mode(std::string_view name);

struct StepConfig {
  double sigma_sq = 0.0;
  double c = 1.0;
  StepMode mode = StepMode::GreedyNoiseless;
  double skip_norm_tol = 1e-12;
  /// Re-orthonormalize every this many applied steps; nullopt disables it.
  std::optional<std::int64_t> reorth_period = 100;
  /// Multiplies theta after it is computed. 1 in normal use; other values
  /// exist only as a negative control for the property suites.
  double theta_scale = 1.0;

  void validate() const;
};

/// Ground-truth side information for OracleNoisy.
struct OracleInfo {
  double v_perp_norm_sq = 0.0;
};

/// Least-squares fit of x in R(U): w = U^T x, p = U w, r = x - p.
struct Projection {
  Eigen::VectorXd w;
  Eigen::VectorXd p;
  Eigen::VectorXd r;
};

Projection project(const OrthonormalBasis& u, const Eigen::VectorXd& x);

/// Damping factor in [0, 1]. `subspace_fraction` is d / n.
/// Requires r_norm_sq > skip_norm_tol^2.
double compute_alpha(const StepConfig& cfg, double x_norm_sq, double r_norm_sq,
                     double subspace_fraction, const std::optional<OracleInfo>& oracle);

/// theta = atan((1 - alpha) |r| / |p|) in [0, pi/2).
/// Throws DegenerateProjection when p_norm <= skip_norm_tol.
double compute_theta(double alpha, double r_norm, double p_norm, double skip_norm_tol = 1e-12);

/// (cos theta + (|v_perp| / |v_par|) sin theta)^2: the noiseless one-step
/// ratio zeta_{t+1} / zeta_t as a function of the step angle.
double noiseless_zeta_ratio(double theta, double v_perp_norm, double v_par_norm);

struct StepOutcome {
  Eigen::VectorXd w;
  Eigen::VectorXd p;
  Eigen::VectorXd r;
  double alpha = 0.0;
  double theta = 0.0;
  OrthonormalBasis updated;
  bool skipped = false;
};

/// One GROUSE iteration. Pure: `u` is left untouched and the rank-one
/// geodesic update
///   U' = U + (y/|y| - p/|p|) w^T / |w|,  y/|y| = cos(theta) p/|p| + sin(theta) r/|r|
/// is returned in `updated`. Steps with |w|, |p| or |r| at or below
/// skip_norm_tol are skipped and return U unchanged. No re-orthonormalization
/// happens here; see GrouseEstimator.
StepOutcome grouse_step(const OrthonormalBasis& u, const Eigen::VectorXd& x, const StepConfig& cfg,
                        const std::optional<OracleInfo>& oracle = std::nullopt);

/// Scalar summary of a step, kept by GrouseEstimator instead of the full outcome.
struct StepRecord {
  double alpha = 0.0;
  double theta = 0.0;
  double p_norm_sq = 0.0;
  double r_norm_sq = 0.0;
  bool skipped = false;
  bool reorthonormalized = false;
};

/// Streaming driver: owns the current iterate and applies the periodic
/// re-orthonormalization policy of StepConfig.
class GrouseEstimator {
 public:
  GrouseEstimator(OrthonormalBasis initial, StepConfig cfg);

  StepRecord observe(const Eigen::VectorXd& x, const std::optional<OracleInfo>& oracle = std::nullopt);

  const OrthonormalBasis& basis() const { return basis_; }
  const StepConfig& config() const { return cfg_; }
  std::int64_t steps_observed() const { return observed_; }
  std::int64_t steps_skipped() const { return skipped_; }

 private:
  OrthonormalBasis basis_;
  StepConfig cfg_;
  std::int64_t observed_ = 0;
  std::int64_t applied_ = 0;
  std::int64_t skipped_ = 0;
};

}  // namespace grouse
