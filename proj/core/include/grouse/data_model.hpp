#pragma once

#include <iosfwd>
#include <optional>
#include <span>

#include <Eigen/Dense>

#include "grouse/grouse_core.hpp"
#include "grouse/random.hpp"
#include "grouse/subspace_metrics.hpp"

namespace grouse {

/// Planted ground truth: x_t = Ubar s_t + xi_t with xi_t ~ N(0, sigma^2/n I).
struct PlantedModel {
  OrthonormalBasis ubar;
  double sigma_sq = 0.0;
  bool normalize_signal = true;
  /// Density used to generate a sparse Ubar before orthonormalization.
  std::optional<double> sparsity;

  Index ambient_dim() const { return ubar.ambient_dim(); }
  Index dim() const { return ubar.dim(); }
};

/// Nonzero probability for sparse ground truth: max(log(n)/n, 2d/n), capped at 1.
double sparse_density(Index n, Index d);

/// n x d matrix whose entries are nonzero with probability `density`
/// (values standard normal); all-zero columns are redrawn.
Eigen::MatrixXd draw_sparse_gaussian(Index n, Index d, double density, Rng& rng);

/// Dense mode: Ubar uniform on G(n, d). Sparse mode: Bernoulli(sparse_density)
/// mask over standard normal entries, all-zero columns redrawn, then thin QR.
PlantedModel make_planted(Index n, Index d, double sigma_sq, bool sparse, Rng& rng);

struct Sample {
  Eigen::VectorXd x;
  Eigen::VectorXd v;
  Eigen::VectorXd s;
  Eigen::VectorXd xi;
};

/// s ~ N(0, I_d); v = Ubar s, rescaled (with s) to unit norm when
/// normalize_signal; xi_i ~ N(0, sigma^2 / n); x = v + xi.
/// No noise variates are consumed when sigma_sq == 0.
Sample draw_sample(const PlantedModel& model, Rng& rng);

/// |(I - U U^T) v|^2 for the OracleNoisy step size.
OracleInfo oracle_info(const OrthonormalBasis& u, const Sample& sample);

/// A basis whose principal cosines against `ubar` are exactly `cosines`
/// (any order, values in [0, 1]), randomly rotated within its span.
/// Requires 2d <= n.
OrthonormalBasis basis_at_angles(const OrthonormalBasis& ubar, const Eigen::VectorXd& cosines, Rng& rng);

/// CSV export: "n,d,sigma_sq" header, the values, then n rows of d entries.
void write_model_csv(std::ostream& out, const PlantedModel& model);
/// Reads a file produced by write_model_csv (normalize_signal assumed true).
PlantedModel read_model_csv(std::istream& in);
/// Same two header lines, then one row of n entries (the observation x) per sample.
void write_samples_csv(std::ostream& out, const PlantedModel& model, std::span<const Sample> samples);

}  // namespace grouse
