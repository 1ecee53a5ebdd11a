#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "safefw/estimator.hpp"
#include "safefw/oracle.hpp"
#include "safefw/problem.hpp"
#include "safefw/safety.hpp"

namespace safefw {

struct IterationRecord {
  int t = 0;
  Vector x;
  Vector s_hat;
  double gap = 0.0;        // <grad f(x_t), x_t - s_hat_t>
  double dfs_value = 0.0;  // min over the estimated polytope of <grad f(x_t), s>
  double et_bound = 0.0;
  double gamma = 0.0;
  long n_t = 0;            // measurements taken during this iteration
  long N_t = 0;            // cumulative measurements
  long extra_measurements = 0;
  double fact2_lhs = 0.0;
  double min_margin = 0.0;
  bool safe = false;
  bool dfs_infeasible = false;
  bool step_taken = false;
  double f_value = 0.0;
  /// Ground-truth diagnostics, filled in by the harness or an observer.
  std::optional<bool> feasible;
  std::optional<bool> covered;
};

enum class RunStatus { completed, early_stop, budget_exhausted, failed };

const char* to_string(RunStatus status);

struct TrajectoryRecord {
  std::vector<IterationRecord> iterations;
  RunStatus status = RunStatus::completed;
  std::string message;
  long total_measurements = 0;
  long out_of_reach_probes = 0;
};

enum class SfwVariant { prescribed, adaptive };

/// Called after each iteration is recorded, with the estimator it was
/// computed from. Lets callers attach ground-truth diagnostics.
using IterationObserver = std::function<void(IterationRecord&, const EstimatorState&)>;

struct SfwConfig {
  double epsilon = 1e-6;
  int T = 15;
  SfwVariant variant = SfwVariant::adaptive;
  long max_total_measurements = 100'000'000;
  /// DFS is solved over D_hat intersected with the box |x_i| <= guard_radius.
  double guard_radius = 1e4;
  /// Constants for the gap-error bound; without them the bound is +inf.
  std::optional<GeometryConstants> geometry;
  IterationObserver observer;
};

/// <grad, x - s_hat>.
double surrogate_gap(const Vector& grad, const Vector& x, const Vector& s_hat);

/// M C_delta / sqrt(N), or +inf when N < C_delta^2 / (Gamma0 + 1)^2.
double et_bound(const SafetyConfig& cfg, const GeometryConstants& geo, double M, long n);

struct DfsResult {
  bool feasible = false;
  Vector s;
  double value = 0.0;
};

/// argmin <grad, s> over {A_hat s <= b_hat, |s_i| <= guard_radius}.
DfsResult solve_dfs(const Matrix& A_hat, const Vector& b_hat, const Vector& grad,
                    double guard_radius);

struct AdaptiveStepResult {
  Vector next;
  Vector s_hat;
  double dfs_value = 0.0;
  bool dfs_infeasible = false;
  long extra_measurements = 0;
  int extra_batches = 0;
  bool safe = false;
  bool budget_exhausted = false;
  /// Scalar safety test left-hand side at each candidate examined.
  std::vector<double> lhs_history;
};

/// Forms x_t + gamma (s_hat - x_t) and, while it fails the scalar safety test,
/// measures another cross around x_t, re-estimates and re-solves the DFS.
/// On budget exhaustion the iterate stays at x_t.
AdaptiveStepResult adaptive_step(EstimatorState& state, const SafetyConfig& cfg,
                                 ConstraintOracle& oracle, const Vector& x_t, const Vector& grad,
                                 double gamma, double guard_radius,
                                 long max_total_measurements);

/// Safe Frank-Wolfe with the prescribed n_t schedule or the adaptive
/// measurement loop.
TrajectoryRecord run_sfw(const Objective& objective, ConstraintOracle& oracle,
                         const SafetyConfig& safety, const SfwConfig& cfg, const Vector& x0);

/// Classical Frank-Wolfe with exact knowledge of D; the zero-uncertainty
/// reference.
TrajectoryRecord run_classical_fw(const Objective& objective, const Polytope& truth,
                                  const Vector& x0, int T);

}  // namespace safefw
