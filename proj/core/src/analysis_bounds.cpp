#include "grouse/analysis_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "grouse/errors.hpp"

namespace grouse {

void BoundParams::validate() const {
  if (d <= 0 || d >= n) throw InvalidArgument("bound parameters require 0 < d < n");
  if (!(sigma_sq >= 0.0)) throw InvalidArgument("sigma_sq must be >= 0");
  if (!(rho > 0.0 && rho < 1.0)) throw InvalidArgument("rho must lie in (0, 1)");
  if (!(rho_prime > 0.0 && rho_prime < 1.0)) throw InvalidArgument("rho_prime must lie in (0, 1)");
  if (!(rho + rho_prime < 1.0)) throw InvalidArgument("rho + rho_prime must be < 1");
  if (!(eps_star > 0.0 && eps_star < static_cast<double>(d))) throw InvalidArgument("eps_star must lie in (0, d)");
  if (!(C > 0.0)) throw InvalidArgument("C must be > 0");
}

double mu0(const BoundParams& p) {
  p.validate();
  const double n = static_cast<double>(p.n);
  const double d = static_cast<double>(p.d);
  return 1.0 + (std::log((1.0 - p.rho_prime) / p.C) + d * std::log(std::numbers::e / d)) / (d * std::log(n));
}

double k1_bound(const BoundParams& p) {
  const double d = static_cast<double>(p.d);
  return (d * d * d / p.rho_prime + d) * mu0(p) * std::log(static_cast<double>(p.n));
}

double k1_bound_from_rate(const BoundParams& p) {
  p.validate();
  const double d = static_cast<double>(p.d);
  const double initial = approx_initial_zeta(p.n, p.d, p.C);
  return (d * d / p.rho_prime + 1.0) * std::log((1.0 - p.rho_prime / 2.0) / initial);
}

double k2_bound(const BoundParams& p) {
  p.validate();
  const double product = p.eps_star * p.rho;
  if (!(product < 1.0) || !(product > 0.0)) {
    throw InvalidArgument("k2_bound requires 0 < eps_star * rho < 1");
  }
  return 2.0 * static_cast<double>(p.d) * std::log(1.0 / product);
}

double approx_initial_zeta(std::int64_t n, std::int64_t d, double C) {
  const double ratio = static_cast<double>(d) / (static_cast<double>(n) * std::numbers::e);
  return C * std::pow(ratio, static_cast<double>(d));
}

double exact_initial_zeta(std::int64_t n, std::int64_t d) {
  if (d <= 0 || d >= n) throw InvalidArgument("exact_initial_zeta requires 0 < d < n");
  double out = 1.0;
  for (std::int64_t i = 0; i < d; ++i) {
    out *= static_cast<double>(d - i) / static_cast<double>(n - i);
  }
  return out;
}

double expected_zeta_rate_bound(double zeta, const BoundParams& p) {
  p.validate();
  if (!(zeta >= 0.0 && zeta <= 1.0)) throw InvalidArgument("zeta must lie in [0, 1]");
  const double n = static_cast<double>(p.n);
  const double d = static_cast<double>(p.d);
  const double beta0 = 1.0 / (1.0 + d / n * p.sigma_sq);
  const double q = (1.0 - zeta) / d;
  // q / (q + sigma^2) written as 1 - sigma^2/(q + sigma^2); at zeta = 1, sigma^2 = 0 the gain is 0.
  const double damping = (q + p.sigma_sq) > 0.0 ? 1.0 - p.sigma_sq / (q + p.sigma_sq) : 0.0;
  return (1.0 + beta0 * q * damping) * zeta;
}

double expected_eps_rate_bound(double eps, double cos_sq_phi_d, const BoundParams& p) {
  p.validate();
  if (!(eps >= 0.0 && eps <= static_cast<double>(p.d))) throw InvalidArgument("eps must lie in [0, d]");
  if (!(cos_sq_phi_d >= 0.0 && cos_sq_phi_d <= 1.0)) throw InvalidArgument("cos^2 phi_d must lie in [0, 1]");
  const double n = static_cast<double>(p.n);
  const double d = static_cast<double>(p.d);
  const double beta0 = 1.0 / (1.0 + d / n * p.sigma_sq);
  const double beta1 = 1.0 - d / n;
  const double denom = eps / d + beta1 * p.sigma_sq;
  const double noise_term = denom > 0.0 ? beta1 * p.sigma_sq / denom : 0.0;
  return (1.0 - beta0 / d * (cos_sq_phi_d - noise_term)) * eps;
}

PhaseReport phase_targets(const BoundParams& p, bool noisy) {
  PhaseReport report;
  if (!noisy) {
    report.target_zeta = 0.5;
    report.target_eps = p.eps_star;
    return report;
  }
  const double n = static_cast<double>(p.n);
  const double d = static_cast<double>(p.d);
  report.target_zeta = std::min(0.5, std::exp(-p.tau2_or_default() * d * d * p.sigma_sq / n));
  report.target_eps = std::max(p.sigma_sq, p.tau1_or_default() * (d * d / n) * p.sigma_sq);
  return report;
}

PhaseReport detect_phases(std::span<const MetricSample> trajectory, const BoundParams& params, bool noisy) {
  if (trajectory.empty()) throw InvalidArgument("detect_phases needs a non-empty trajectory");
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    if (trajectory[i].t <= trajectory[i - 1].t) {
      throw InvalidArgument("trajectory iteration indices must be strictly increasing");
    }
  }
  PhaseReport report = phase_targets(params, noisy);
  std::size_t i = 0;
  for (; i < trajectory.size(); ++i) {
    if (trajectory[i].zeta >= report.target_zeta) {
      report.k1 = trajectory[i].t;
      break;
    }
  }
  if (!report.k1) return report;
  for (; i < trajectory.size(); ++i) {
    if (trajectory[i].epsilon <= report.target_eps) {
      report.k2 = trajectory[i].t - *report.k1;
      break;
    }
  }
  return report;
}

}  // namespace grouse
