#include "grouse/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "grouse/errors.hpp"

namespace grouse {
namespace {

constexpr int kMaxSparseAttempts = 100;

void fill_normal(Eigen::Ref<Eigen::VectorXd> out, Rng& rng, double stddev) {
  std::normal_distribution<double> normal(0.0, stddev);
  for (Index i = 0; i < out.size(); ++i) {
    out(i) = normal(rng);
  }
}

}  // namespace

Eigen::MatrixXd draw_sparse_gaussian(Index n, Index d, double density, Rng& rng) {
  if (!(density > 0.0 && density <= 1.0)) throw InvalidArgument("density must lie in (0, 1]");
  std::bernoulli_distribution keep(density);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, d);
  for (Index j = 0; j < d; ++j) {
    bool any = false;
    while (!any) {
      for (Index i = 0; i < n; ++i) {
        a(i, j) = keep(rng) ? normal(rng) : 0.0;
        any = any || a(i, j) != 0.0;
      }
    }
  }
  return a;
}

namespace {

std::string format_entry(double value) {
  std::ostringstream os;
  os.precision(17);
  os << value;
  return os.str();
}

std::vector<double> parse_row(const std::string& line) {
  std::vector<double> values;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      values.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw IoError("malformed CSV entry '" + cell + "'");
    }
  }
  return values;
}

void write_header(std::ostream& out, const PlantedModel& model) {
  out << "n,d,sigma_sq\n"
      << model.ambient_dim() << ',' << model.dim() << ',' << format_entry(model.sigma_sq) << '\n';
}

}  // namespace

double sparse_density(Index n, Index d) {
  const double nn = static_cast<double>(n);
  return std::min(1.0, std::max(std::log(nn) / nn, 2.0 * static_cast<double>(d) / nn));
}

PlantedModel make_planted(Index n, Index d, double sigma_sq, bool sparse, Rng& rng) {
  if (d <= 0 || d >= n) {
    throw InvalidArgument("planted model requires 0 < d < n");
  }
  if (!(sigma_sq >= 0.0) || !std::isfinite(sigma_sq)) {
    throw InvalidArgument("sigma_sq must be finite and >= 0");
  }
  if (!sparse) {
    return PlantedModel{random_orthonormal(n, d, rng), sigma_sq, true, std::nullopt};
  }
  const double density = sparse_density(n, d);
  for (int attempt = 0; attempt < kMaxSparseAttempts; ++attempt) {
    try {
      return PlantedModel{orthonormalize(draw_sparse_gaussian(n, d, density, rng)), sigma_sq, true, density};
    } catch (const RankDeficient&) {
      // Two columns landed on proportional supports; draw again.
    }
  }
  throw NumericalError("could not draw a full-rank sparse ground truth");
}

Sample draw_sample(const PlantedModel& model, Rng& rng) {
  const Index n = model.ambient_dim();
  const Index d = model.dim();
  Sample out;
  out.s.resize(d);
  fill_normal(out.s, rng, 1.0);
  out.v.noalias() = model.ubar.matrix() * out.s;
  if (model.normalize_signal) {
    const double norm = out.v.norm();
    out.v /= norm;
    out.s /= norm;
  }
  out.xi = Eigen::VectorXd::Zero(n);
  if (model.sigma_sq > 0.0) {
    fill_normal(out.xi, rng, std::sqrt(model.sigma_sq / static_cast<double>(n)));
  }
  out.x = out.v + out.xi;
  return out;
}

OracleInfo oracle_info(const OrthonormalBasis& u, const Sample& sample) {
  const Eigen::VectorXd coeffs = u.matrix().transpose() * sample.v;
  const Eigen::VectorXd v_perp = sample.v - u.matrix() * coeffs;
  return OracleInfo{v_perp.squaredNorm()};
}

OrthonormalBasis basis_at_angles(const OrthonormalBasis& ubar, const Eigen::VectorXd& cosines, Rng& rng) {
  const Index n = ubar.ambient_dim();
  const Index d = ubar.dim();
  if (cosines.size() != d) {
    throw InvalidArgument("need exactly d principal cosines");
  }
  if (2 * d > n) {
    throw InvalidArgument("basis_at_angles requires 2d <= n");
  }
  if ((cosines.array() < 0.0).any() || (cosines.array() > 1.0).any()) {
    throw InvalidArgument("principal cosines must lie in [0, 1]");
  }
  // Orthonormal directions in the complement of R(Ubar).
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(n, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < n; ++i) g(i, j) = normal(rng);
  }
  g -= ubar.matrix() * (ubar.matrix().transpose() * g);
  const Eigen::MatrixXd perp = orthonormalize(g).matrix();
  const Eigen::ArrayXd sines = (1.0 - cosines.array().square()).max(0.0).sqrt();

  Eigen::MatrixXd u = ubar.matrix() * cosines.asDiagonal() + perp * sines.matrix().asDiagonal();
  // Random rotation within the span leaves the principal angles unchanged.
  Eigen::MatrixXd h(d, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) h(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(h);
  const Eigen::MatrixXd rotation = qr.householderQ();
  return OrthonormalBasis(u * rotation);
}

void write_model_csv(std::ostream& out, const PlantedModel& model) {
  write_header(out, model);
  const auto& m = model.ubar.matrix();
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_entry(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing model CSV");
}

PlantedModel read_model_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "n,d,sigma_sq") {
    throw IoError("model CSV must start with header 'n,d,sigma_sq'");
  }
  if (!std::getline(in, line)) throw IoError("model CSV is missing its size line");
  const auto sizes = parse_row(line);
  if (sizes.size() != 3) throw IoError("model CSV size line must have 3 fields");
  const auto n = static_cast<Index>(sizes[0]);
  const auto d = static_cast<Index>(sizes[1]);
  if (n <= 0 || d <= 0 || d >= n) throw IoError("model CSV has invalid dimensions");
  Eigen::MatrixXd m(n, d);
  for (Index i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw IoError("model CSV ended after " + std::to_string(i) + " rows");
    const auto row = parse_row(line);
    if (static_cast<Index>(row.size()) != d) throw IoError("model CSV row has wrong width");
    for (Index j = 0; j < d; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
  }
  return PlantedModel{OrthonormalBasis(std::move(m)), sizes[2], true, std::nullopt};
}

void write_samples_csv(std::ostream& out, const PlantedModel& model, std::span<const Sample> samples) {
  write_header(out, model);
  for (const auto& sample : samples) {
    for (Index i = 0; i < sample.x.size(); ++i) {
      if (i) out << ',';
      out << format_entry(sample.x(i));
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing samples CSV");
}

}  // namespace grouse
