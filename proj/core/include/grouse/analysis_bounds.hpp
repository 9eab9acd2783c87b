#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>

#include "grouse/subspace_metrics.hpp"

namespace grouse {

/// Parameters of the iteration-count and expected-rate bounds. Logarithms are natural.
struct BoundParams {
  std::int64_t n = 0;
  std::int64_t d = 0;
  double sigma_sq = 0.0;
  double rho = 0.1;
  double rho_prime = 0.1;
  double eps_star = 1e-4;
  double C = 1.0;
  /// Noisy phase-target constants; log(d) when unset.
  std::optional<double> tau1;
  std::optional<double> tau2;

  double tau1_or_default() const { return tau1.value_or(std::log(static_cast<double>(d))); }
  double tau2_or_default() const { return tau2.value_or(std::log(static_cast<double>(d))); }

  /// 0 < d < n, sigma_sq >= 0, rho, rho_prime in (0,1), rho + rho_prime < 1,
  /// 0 < eps_star < d, C > 0.
  void validate() const;
};

/// mu_0 = 1 + (log((1 - rho')/C) + d log(e/d)) / (d log n).
double mu0(const BoundParams& params);

/// K1 >= (d^3/rho' + d) mu_0 log n: iterations to reach zeta >= 1/2.
double k1_bound(const BoundParams& params);

/// The K1 expression the determinant-phase argument actually derives:
/// (d^2/rho' + 1) log((1 - rho'/2) / E[zeta_0]) with E[zeta_0] = C (d/(n e))^d.
/// Differs from k1_bound by a factor of d on the leading term.
double k1_bound_from_rate(const BoundParams& params);

/// K2 >= 2 d log(1 / (eps* rho)). Throws InvalidArgument when eps* rho >= 1.
double k2_bound(const BoundParams& params);

/// C (d/(n e))^d, the approximate mean zeta of a random initialization.
double approx_initial_zeta(std::int64_t n, std::int64_t d, double C = 1.0);

/// Exact E[zeta_0] for U_0 uniform on G(n, d): prod_{i<d} (d - i)/(n - i) = 1/binom(n, d).
double exact_initial_zeta(std::int64_t n, std::int64_t d);

/// Lower bound on E[zeta_{t+1} | U_t]:
/// (1 + beta0 q (1 - sigma^2/(q + sigma^2))) zeta, q = (1 - zeta)/d, beta0 = 1/(1 + d sigma^2/n).
double expected_zeta_rate_bound(double zeta, const BoundParams& params);

/// Upper bound on E[eps_{t+1} | U_t]:
/// (1 - (beta0/d)(cos^2 phi_d - beta1 sigma^2/(eps/d + beta1 sigma^2))) eps, beta1 = 1 - d/n.
double expected_eps_rate_bound(double eps, double cos_sq_phi_d, const BoundParams& params);

struct PhaseReport {
  /// First recorded t with zeta_t >= target_zeta.
  std::optional<std::int64_t> k1;
  /// Additional iterations, counted from k1, until eps_t <= target_eps.
  std::optional<std::int64_t> k2;
  double target_zeta = 0.5;
  double target_eps = 0.0;
};

/// Phase targets. Noiseless: zeta >= 1/2 then eps <= eps*. Noisy:
/// zeta >= min(1/2, exp(-tau2 d^2 sigma^2/n)) then eps <= max(sigma^2, tau1 d^2 sigma^2/n).
PhaseReport phase_targets(const BoundParams& params, bool noisy);

/// Throws InvalidArgument for an empty trajectory or non-increasing t.
PhaseReport detect_phases(std::span<const MetricSample> trajectory, const BoundParams& params, bool noisy);

}  // namespace grouse
