#pragma once

#include <optional>

#include "safefw/estimator.hpp"
#include "safefw/problem.hpp"

namespace safefw {

enum class Schedule { prescribed, adaptive };

/// Confidence budget and measurement-schedule constants shared by the safety
/// tests and the drivers.
struct SafetyConfig {
  double delta = 0.1;  // total failure probability over the run
  int T = 15;          // iteration budget; delta_bar = delta / T
  double omega0 = 0.01;
  double sigma = 0.0;
  int d = 0;
  int m = 0;
  ConfidenceMode mode = ConfidenceMode::chisq;
  /// Replaces phi^{-1}(delta_bar / m); phi_delta is then sigma times this.
  std::optional<double> phi_inverse_override;
  /// Replaces phi_delta = sigma phi^{-1}(delta_bar / m) outright.
  std::optional<double> phi_delta_override;
  double Cn = 0.0;
  Schedule schedule = Schedule::adaptive;

  double delta_bar() const { return delta / static_cast<double>(T); }
  /// phi^{-1}(delta_bar / m) at sample count n.
  double phi_inverse_at(long n) const;
  /// phi_delta = sigma phi^{-1}(delta_bar / m) at sample count n.
  double phi_delta(long n) const;
};

struct SafetyVerdict {
  bool safe = false;
  double lhs = 0.0;
  double min_margin = 0.0;
  Vector margins;
  int binding_constraint = -1;
};

/// eps_i = b_hat_i - <a_hat_i, x>.
Vector margins(const EstimatorState& state, const Vector& x);

/// Scalar membership test phi_delta sqrt(1/N + (x - xbar)^T R (x - xbar)) <=
/// min_i eps_i. Ties count as safe.
SafetyVerdict fact2_check(const EstimatorState& state, const SafetyConfig& cfg, const Vector& x);

/// The same membership evaluated directly on the cone constraints
/// <a_hat_i, x> - b_hat_i + phi_delta ||P^{1/2} [x; -1]|| <= 0 using a
/// Cholesky square root of P.
SafetyVerdict soc_check(const EstimatorState& state, const SafetyConfig& cfg, const Vector& x);

/// C_delta = 2 phi_delta d (Gamma0 + 1) / rho_min * sqrt((Gamma0^2 + 1)/omega0^2 + 1).
double c_delta(const GeometryConstants& geo, double phi_delta, double omega0, int d);

/// Lower bound on C_n guaranteeing per-iterate safety under the prescribed
/// schedule. Requires T >= 3.
double cn_lower_bound(const GeometryConstants& geo, double phi_delta, double omega0, int d, int T);

/// n_t = ceil(4 C_n (t + 2) ln(t + 2)^2).
long nt_schedule(double Cn, int t);

}  // namespace safefw
