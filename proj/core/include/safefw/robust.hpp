#pragma once

#include <optional>
#include <vector>

#include "safefw/estimator.hpp"
#include "safefw/frank_wolfe.hpp"
#include "safefw/oracle.hpp"
#include "safefw/problem.hpp"
#include "safefw/safety.hpp"

namespace safefw {

/// Estimate-then-optimise baseline: every measurement is taken up front around
/// one site, then Frank-Wolfe runs over the fixed safety set.
struct RoConfig {
  long total_measurements = 0;
  int T = 15;
  /// Defaults to x0.
  std::optional<Vector> measurement_site;
  double guard_radius = 1e4;
};

struct SocLinminOptions {
  double violation_tol = 1e-7;
  int max_cuts = 200;
};

struct SocLinminResult {
  Vector point;
  double value = 0.0;
  int cuts = 0;
  bool converged = false;
  double max_violation = 0.0;
  /// LP relaxation optimum after 0, 1, 2, ... cuts.
  std::vector<double> relaxation_values;
};

/// Approximately minimises <c, s> over the safety set by Kelley cutting
/// planes, starting from the estimated polytope. `safe_point` must lie in the
/// safety set; it anchors the fallback when the cut limit is reached.
SocLinminResult soc_linmin(const EstimatorState& state, const SafetyConfig& cfg, const Vector& c,
                           const Vector& safe_point, double guard_radius,
                           const SocLinminOptions& options = {});

/// max_i of <a_hat_i, x> - b_hat_i + phi_delta ||P^{1/2}[x; -1]||.
double soc_max_violation(const EstimatorState& state, const SafetyConfig& cfg, const Vector& x);

TrajectoryRecord ro_run(const Objective& objective, ConstraintOracle& oracle,
                        const SafetyConfig& safety, const RoConfig& cfg, const Vector& x0,
                        const IterationObserver& observer = {});

}  // namespace safefw
