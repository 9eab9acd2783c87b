#include "grouse/subspace_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "grouse/errors.hpp"

namespace grouse {
namespace {

void check_shape(Index n, Index d) {
  if (d <= 0 || d >= n) {
    throw InvalidArgument("basis must satisfy 0 < d < n, got n=" + std::to_string(n) +
                          ", d=" + std::to_string(d));
  }
}

void check_same_shape(const OrthonormalBasis& u, const OrthonormalBasis& ubar) {
  if (u.ambient_dim() != ubar.ambient_dim() || u.dim() != ubar.dim()) {
    throw InvalidArgument("basis dimension mismatch: " + std::to_string(u.ambient_dim()) + "x" +
                          std::to_string(u.dim()) + " vs " + std::to_string(ubar.ambient_dim()) + "x" +
                          std::to_string(ubar.dim()));
  }
}

}  // namespace

double orthonormality_error(const Eigen::MatrixXd& a) {
  const Index d = a.cols();
  Eigen::MatrixXd gram = a.transpose() * a;
  gram.diagonal().array() -= 1.0;
  return d == 0 ? 0.0 : gram.cwiseAbs().maxCoeff();
}

OrthonormalBasis::OrthonormalBasis(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  check_shape(entries_.rows(), entries_.cols());
  if (!entries_.allFinite()) {
    throw InvalidArgument("basis has non-finite entries");
  }
  const double err = grouse::orthonormality_error(entries_);
  if (!(err <= kOrthonormalityTolerance)) {
    throw InvalidArgument("columns are not orthonormal (max |U^T U - I| = " + std::to_string(err) + ")");
  }
}

OrthonormalBasis::OrthonormalBasis(Eigen::MatrixXd entries, AssumeOrthonormal) : entries_(std::move(entries)) {
  check_shape(entries_.rows(), entries_.cols());
}

Eigen::VectorXd PrincipalAngles::angles() const {
  return cosines.array().acos().matrix();
}

Eigen::MatrixXd cross_gram(const OrthonormalBasis& u, const OrthonormalBasis& ubar) {
  check_same_shape(u, ubar);
  return ubar.matrix().transpose() * u.matrix();
}

PrincipalAngles principal_angles_from_cross_gram(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw InvalidArgument("cross Gram matrix must be square and non-empty");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  // Singular values come out sorted non-increasing; rounding can push them past 1.
  PrincipalAngles out;
  out.cosines = svd.singularValues().cwiseMax(0.0).cwiseMin(1.0);
  return out;
}

PrincipalAngles principal_angles(const OrthonormalBasis& u, const OrthonormalBasis& ubar) {
  return principal_angles_from_cross_gram(cross_gram(u, ubar));
}

SubspaceDistance measure_cross_gram(const Eigen::MatrixXd& m) {
  SubspaceDistance out;
  out.angles = principal_angles_from_cross_gram(m);
  const Eigen::ArrayXd cos_sq = out.angles.cosines.array().square();
  out.zeta = cos_sq.prod();
  out.epsilon = std::max(0.0, static_cast<double>(cos_sq.size()) - cos_sq.sum());
  return out;
}

SubspaceDistance measure(const OrthonormalBasis& u, const OrthonormalBasis& ubar) {
  return measure_cross_gram(cross_gram(u, ubar));
}

double determinant_similarity(const OrthonormalBasis& u, const OrthonormalBasis& ubar) {
  return principal_angles(u, ubar).cosines.array().square().prod();
}

double determinant_similarity_explicit(const OrthonormalBasis& u, const OrthonormalBasis& ubar) {
  const Eigen::MatrixXd m = cross_gram(u, ubar);
  const Eigen::MatrixXd b = m * m.transpose();
  return b.partialPivLu().determinant();
}

double frobenius_discrepancy(const OrthonormalBasis& u, const OrthonormalBasis& ubar) {
  const double d = static_cast<double>(u.dim());
  return std::clamp(d - cross_gram(u, ubar).squaredNorm(), 0.0, d);
}

OrthonormalBasis orthonormalize(const Eigen::MatrixXd& a) {
  const Index n = a.rows();
  const Index d = a.cols();
  check_shape(n, d);
  if (!a.allFinite()) {
    throw InvalidArgument("cannot orthonormalize a matrix with non-finite entries");
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  const auto& packed = qr.matrixQR();
  for (Index j = 0; j < d; ++j) {
    const double col_norm = a.col(j).norm();
    if (!(std::abs(packed(j, j)) > 1e-10 * col_norm)) {
      throw RankDeficient("matrix is numerically rank deficient at column " + std::to_string(j));
    }
  }
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, d);
  for (Index j = 0; j < d; ++j) {
    if (packed(j, j) < 0.0) {
      q.col(j) = -q.col(j);
    }
  }
  return OrthonormalBasis(std::move(q), OrthonormalBasis::AssumeOrthonormal{});
}

OrthonormalBasis random_orthonormal(Index n, Index d, Rng& rng) {
  check_shape(n, d);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(n, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < n; ++i) {
      g(i, j) = normal(rng);
    }
  }
  return orthonormalize(g);
}

OrthonormalBasis reorthonormalize(const OrthonormalBasis& u) {
  return orthonormalize(u.matrix());
}

}  // namespace grouse
