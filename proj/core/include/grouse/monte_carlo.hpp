#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "grouse/data_model.hpp"
#include "grouse/grouse_core.hpp"
#include "grouse/subspace_metrics.hpp"

namespace grouse {

/// Mean and normal-approximation standard error of a Monte Carlo estimate.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t count = 0;
};

/// Streaming mean/variance (Welford) with a deterministic pairwise merge.
class RunningMoments {
 public:
  void add(double x);
  void merge(const RunningMoments& other);

  std::int64_t count() const { return count_; }
  double mean() const { return mean_; }
  /// Unbiased sample variance; 0 for fewer than two values.
  double variance() const;
  Estimate estimate() const;

 private:
  std::int64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Draws are split into `chunks` fixed blocks, each seeded with
/// derive_seed(seed, chunk). `threads` only decides how blocks are scheduled,
/// so every estimate is identical for any thread count.
struct MonteCarloPlan {
  std::int64_t draws = 10000;
  std::uint64_t seed = 1;
  int chunks = 16;
  int threads = 1;
};

/// Statistics of one GROUSE step from a fixed U_t over fresh samples.
struct OneStepStatistics {
  double zeta = 0.0;         ///< zeta(U_t)
  double epsilon = 0.0;      ///< eps(U_t)
  double cos_sq_last = 0.0;  ///< cos^2 of the largest principal angle of U_t
  Estimate zeta_next;        ///< E[zeta_{t+1}]
  Estimate eps_next;         ///< E[eps_{t+1}]
  Estimate zeta_ratio;       ///< E[zeta_{t+1} / zeta_t]
  Estimate damped_gain;      ///< E[(1 - alpha)^2 |r|^2 / |p|^2]
  Estimate eps_decrease;     ///< E[eps_t - eps_{t+1}]
  std::int64_t skipped = 0;
};

OneStepStatistics simulate_one_step(const PlantedModel& model, const OrthonormalBasis& u,
                                    const StepConfig& cfg, const MonteCarloPlan& plan);

/// E[zeta(U_0, Ubar)] for U_0 = random_orthonormal(n, d).
Estimate estimate_initial_zeta(const OrthonormalBasis& ubar, const MonteCarloPlan& plan);

/// E[x^T Q x / x^T x] for x with iid standard normal entries.
Estimate estimate_quadratic_ratio(const Eigen::MatrixXd& q, const MonteCarloPlan& plan);

struct NoiseEnergyStatistics {
  Estimate noise_to_signal;  ///< E[|xi|^2 / |v|^2]
  Estimate perp_energy;      ///< E[|(I - U U^T) xi|^2 / |v|^2]
  Estimate par_energy;       ///< E[|U U^T xi|^2 / |v|^2]
};

NoiseEnergyStatistics estimate_noise_energy(const PlantedModel& model, const OrthonormalBasis& u,
                                            const MonteCarloPlan& plan);

struct ProjectionStatistics {
  Estimate perp_fraction;         ///< E[|v_perp|^2 / |v|^2]
  Estimate par_off_truth;         ///< E[|(I - Ubar Ubar^T) v_par|^2 / |v|^2]
  Estimate signal_energy;         ///< E[|v|^2]
};

ProjectionStatistics estimate_projection_energy(const PlantedModel& model, const OrthonormalBasis& u,
                                                const MonteCarloPlan& plan);

}  // namespace grouse
