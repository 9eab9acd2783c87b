#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "grouse/random.hpp"

namespace grouse {

using Index = Eigen::Index;

/// Tolerance on max |U^T U - I| accepted by the checked OrthonormalBasis constructor.
inline constexpr double kOrthonormalityTolerance = 1e-10;

/// Max absolute entry of A^T A - I.
double orthonormality_error(const Eigen::MatrixXd& a);

/// An n x d matrix with orthonormal columns, 0 < d < n: a point on the
/// Grassmannian G(n, d). Immutable once constructed.
class OrthonormalBasis {
 public:
  struct AssumeOrthonormal {};

  /// Validates 0 < d < n and orthonormality to kOrthonormalityTolerance.
  explicit OrthonormalBasis(Eigen::MatrixXd entries);

  /// Skips the O(n d^2) orthonormality check. For producers that guarantee
  /// the invariant by construction (QR, the rank-one geodesic update).
  OrthonormalBasis(Eigen::MatrixXd entries, AssumeOrthonormal);

  Index ambient_dim() const { return entries_.rows(); }
  Index dim() const { return entries_.cols(); }
  const Eigen::MatrixXd& matrix() const { return entries_; }

  double orthonormality_error() const { return grouse::orthonormality_error(entries_); }

 private:
  Eigen::MatrixXd entries_;
};

/// Cosines of the principal angles, sorted non-increasing, each in [0, 1].
struct PrincipalAngles {
  Eigen::VectorXd cosines;

  Index size() const { return cosines.size(); }
  /// phi_i = acos(cos phi_i), non-decreasing.
  Eigen::VectorXd angles() const;
  /// cos^2 of the largest principal angle.
  double last_cos_sq() const { return cosines(cosines.size() - 1) * cosines(cosines.size() - 1); }
};

/// Ubar^T U (d x d). Throws InvalidArgument on dimension mismatch.
Eigen::MatrixXd cross_gram(const OrthonormalBasis& u, const OrthonormalBasis& ubar);

PrincipalAngles principal_angles(const OrthonormalBasis& u, const OrthonormalBasis& ubar);
PrincipalAngles principal_angles_from_cross_gram(const Eigen::MatrixXd& m);

/// zeta = det(Ubar^T U U^T Ubar) = prod cos^2 phi_i, evaluated as the product
/// of squared singular values.
double determinant_similarity(const OrthonormalBasis& u, const OrthonormalBasis& ubar);

/// Same quantity through an explicit LU determinant of Ubar^T U U^T Ubar.
/// Underflows for moderate d; kept as a cross-check path.
double determinant_similarity_explicit(const OrthonormalBasis& u, const OrthonormalBasis& ubar);

/// epsilon = d - ||Ubar^T U||_F^2 = sum sin^2 phi_i.
double frobenius_discrepancy(const OrthonormalBasis& u, const OrthonormalBasis& ubar);

/// Both metrics from one SVD.
struct SubspaceDistance {
  PrincipalAngles angles;
  double zeta = 0.0;
  double epsilon = 0.0;
};

SubspaceDistance measure(const OrthonormalBasis& u, const OrthonormalBasis& ubar);
SubspaceDistance measure_cross_gram(const Eigen::MatrixXd& m);

/// One recorded point of a trajectory. The step fields describe the update
/// that produced U_t and are zero at t = 0.
struct MetricSample {
  std::int64_t t = 0;
  double zeta = 0.0;
  double epsilon = 0.0;
  PrincipalAngles angles;
  double residual_norm_sq = 0.0;
  double projection_norm_sq = 0.0;
  double theta = 0.0;
  double alpha = 0.0;
  bool skipped = false;
};

/// Thin Householder QR of `a`, column signs fixed so diag(R) > 0.
/// Throws RankDeficient when a column is numerically dependent on the previous ones.
OrthonormalBasis orthonormalize(const Eigen::MatrixXd& a);

/// Orthonormalization of an n x d standard normal matrix; uniform on G(n, d).
OrthonormalBasis random_orthonormal(Index n, Index d, Rng& rng);

/// Drift control: thin QR of an (approximately) orthonormal basis.
OrthonormalBasis reorthonormalize(const OrthonormalBasis& u);

}  // namespace grouse
