#include "safefw/frank_wolfe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "safefw/error.hpp"
#include "safefw/lp.hpp"

namespace safefw {

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::completed:
      return "completed";
    case RunStatus::early_stop:
      return "early_stop";
    case RunStatus::budget_exhausted:
      return "budget_exhausted";
    case RunStatus::failed:
      return "failed";
  }
  return "unknown";
}

double surrogate_gap(const Vector& grad, const Vector& x, const Vector& s_hat) {
  return grad.dot(x - s_hat);
}

double et_bound(const SafetyConfig& cfg, const GeometryConstants& geo, double M, long n) {
  if (n <= 0) return std::numeric_limits<double>::infinity();
  const double c = c_delta(geo, cfg.phi_delta(n), cfg.omega0, cfg.d);
  const double required = c * c / ((geo.Gamma0 + 1.0) * (geo.Gamma0 + 1.0));
  if (static_cast<double>(n) < required) return std::numeric_limits<double>::infinity();
  return M * c / std::sqrt(static_cast<double>(n));
}

DfsResult solve_dfs(const Matrix& A_hat, const Vector& b_hat, const Vector& grad,
                    double guard_radius) {
  const int m = static_cast<int>(A_hat.rows());
  const int d = static_cast<int>(A_hat.cols());
  lp::LpProblem prob;
  prob.c = grad;
  prob.A.resize(m + 2 * d, d);
  prob.A << A_hat, Matrix::Identity(d, d), -Matrix::Identity(d, d);
  prob.b.resize(m + 2 * d);
  prob.b << b_hat, Vector::Constant(2 * d, guard_radius);
  const auto sol = lp::solve(prob);
  DfsResult out;
  if (sol.status == lp::LpStatus::optimal) {
    out.feasible = true;
    out.s = sol.point;
    out.value = sol.value;
  }
  return out;
}

namespace {

SafetyVerdict safe_fact2(const EstimatorState& state, const SafetyConfig& cfg, const Vector& x) {
  try {
    return fact2_check(state, cfg, x);
  } catch (const NumericalError&) {
    SafetyVerdict v;
    v.margins = margins(state, x);
    v.min_margin = v.margins.minCoeff(&v.binding_constraint);
    v.lhs = std::numeric_limits<double>::infinity();
    v.safe = false;
    return v;
  }
}

long cross_size(long requested, int d) {
  const long n = std::max<long>(requested, 2L * d);
  return 2L * d * ((n + 2L * d - 1) / (2L * d));
}

}  // namespace

AdaptiveStepResult adaptive_step(EstimatorState& state, const SafetyConfig& cfg,
                                 ConstraintOracle& oracle, const Vector& x_t, const Vector& grad,
                                 double gamma, double guard_radius,
                                 long max_total_measurements) {
  const int d = state.dim();
  AdaptiveStepResult out;
  while (true) {
    const DfsResult dfs = solve_dfs(state.A_hat(), state.b_hat(), grad, guard_radius);
    out.dfs_infeasible = !dfs.feasible;
    out.s_hat = dfs.feasible ? dfs.s : x_t;
    out.dfs_value = dfs.feasible ? dfs.value : grad.dot(x_t);
    const Vector candidate = x_t + gamma * (out.s_hat - x_t);
    const SafetyVerdict verdict = safe_fact2(state, cfg, candidate);
    out.lhs_history.push_back(verdict.lhs);
    if (dfs.feasible && verdict.safe) {
      out.next = candidate;
      out.safe = true;
      return out;
    }
    if (oracle.measurements_taken() + 2L * d > max_total_measurements) {
      out.budget_exhausted = true;
      out.next = x_t;
      out.s_hat = x_t;
      return out;
    }
    const MeasurementBatch batch = oracle.measure_cross(x_t, 2L * d);
    state.absorb(batch);
    out.extra_measurements += batch.total();
    ++out.extra_batches;
  }
}

TrajectoryRecord run_sfw(const Objective& objective, ConstraintOracle& oracle,
                         const SafetyConfig& safety, const SfwConfig& cfg, const Vector& x0) {
  const int d = oracle.dim();
  const int m = oracle.num_constraints();
  if (x0.size() != d) throw DimensionError("run_sfw: x0 has wrong dimension");
  if (!(cfg.epsilon > 0.0)) throw PreconditionError("run_sfw: epsilon must be positive");
  if (cfg.T < 3) throw PreconditionError("run_sfw: T must be >= 3");
  const bool prescribed = cfg.variant == SfwVariant::prescribed;
  if (prescribed && !(safety.Cn > 0.0)) {
    throw PreconditionError("run_sfw: prescribed schedule needs C_n > 0");
  }
  if (cfg.geometry && cfg.geometry->eps0 <= 0.0) {
    throw PreconditionError("run_sfw: x0 must be strictly feasible");
  }

  EstimatorState state(d, m);
  TrajectoryRecord rec;
  Vector x = x0;
  const long start_count = oracle.measurements_taken();

  for (int t = 0; t <= cfg.T; ++t) {
    const long requested = prescribed ? nt_schedule(safety.Cn, t) : 2L * d * std::max(t, 1);
    const long realized = cross_size(requested, d);
    if (oracle.measurements_taken() + realized > cfg.max_total_measurements) {
      rec.status = RunStatus::budget_exhausted;
      std::ostringstream os;
      os << "measurement budget " << cfg.max_total_measurements << " exhausted at t=" << t;
      rec.message = os.str();
      break;
    }
    const long before = oracle.measurements_taken();
    state.absorb(oracle.measure_cross(x, std::max<long>(requested, 2L * d)));

    IterationRecord it;
    it.t = t;
    it.x = x;
    it.f_value = objective.value(x);
    const Vector grad = objective.gradient(x);

    DfsResult dfs = solve_dfs(state.A_hat(), state.b_hat(), grad, cfg.guard_radius);
    Vector s_hat = dfs.feasible ? dfs.s : x;
    it.dfs_infeasible = !dfs.feasible;
    it.dfs_value = dfs.feasible ? dfs.value : grad.dot(x);
    it.gap = surrogate_gap(grad, x, s_hat);
    it.et_bound = cfg.geometry ? et_bound(safety, *cfg.geometry, objective.M, state.count())
                               : std::numeric_limits<double>::infinity();

    const bool stop = it.gap + it.et_bound <= cfg.epsilon;
    Vector next = x;
    bool budget_hit = false;
    if (!stop && t < cfg.T) {
      it.gamma = 1.0 / (t + 2.0);
      if (prescribed) {
        next = x + it.gamma * (s_hat - x);
        it.step_taken = true;
      } else {
        const AdaptiveStepResult step = adaptive_step(state, safety, oracle, x, grad, it.gamma,
                                                      cfg.guard_radius,
                                                      cfg.max_total_measurements);
        it.extra_measurements = step.extra_measurements;
        budget_hit = step.budget_exhausted;
        if (step.extra_batches > 0) {
          // Report the direction and gap from the final estimate of this iteration.
          s_hat = step.s_hat;
          it.dfs_infeasible = step.dfs_infeasible;
          it.dfs_value = step.dfs_value;
          it.gap = surrogate_gap(grad, x, s_hat);
          it.et_bound = cfg.geometry
                            ? et_bound(safety, *cfg.geometry, objective.M, state.count())
                            : std::numeric_limits<double>::infinity();
        }
        if (!budget_hit) {
          next = step.next;
          it.step_taken = true;
        } else {
          it.gamma = 0.0;
        }
      }
    }
    it.s_hat = budget_hit ? x : s_hat;

    const SafetyVerdict verdict = safe_fact2(state, safety, x);
    it.fact2_lhs = verdict.lhs;
    it.min_margin = verdict.min_margin;
    it.safe = verdict.safe;
    it.N_t = state.count();
    it.n_t = oracle.measurements_taken() - before;
    if (cfg.observer) cfg.observer(it, state);
    rec.iterations.push_back(std::move(it));

    if (stop) {
      rec.status = RunStatus::early_stop;
      break;
    }
    if (budget_hit) {
      rec.status = RunStatus::budget_exhausted;
      std::ostringstream os;
      os << "measurement budget " << cfg.max_total_measurements
         << " exhausted in the adaptive loop at t=" << t;
      rec.message = os.str();
      break;
    }
    x = next;
  }
  rec.total_measurements = oracle.measurements_taken() - start_count;
  rec.out_of_reach_probes = oracle.out_of_reach_events();
  return rec;
}

TrajectoryRecord run_classical_fw(const Objective& objective, const Polytope& truth,
                                  const Vector& x0, int T) {
  if (x0.size() != truth.dim()) throw DimensionError("run_classical_fw: x0 has wrong dimension");
  TrajectoryRecord rec;
  Vector x = x0;
  for (int t = 0; t <= T; ++t) {
    IterationRecord it;
    it.t = t;
    it.x = x;
    it.f_value = objective.value(x);
    const Vector grad = objective.gradient(x);
    const auto sol = lp::solve({grad, truth.A, truth.b});
    if (sol.status != lp::LpStatus::optimal) {
      rec.status = RunStatus::failed;
      rec.message = std::string("classical FW: LP over the true polytope is ") +
                    lp::to_string(sol.status);
      break;
    }
    it.s_hat = sol.point;
    it.dfs_value = sol.value;
    it.gap = surrogate_gap(grad, x, sol.point);
    const Vector slack = truth.b - truth.A * x;
    it.min_margin = slack.minCoeff();
    it.safe = it.min_margin >= 0.0;
    it.et_bound = 0.0;
    if (t < T) {
      it.gamma = 1.0 / (t + 2.0);
      it.step_taken = true;
    }
    rec.iterations.push_back(it);
    if (it.step_taken) x = x + it.gamma * (sol.point - x);
  }
  return rec;
}

}  // namespace safefw
