#include "safefw/robust.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "safefw/error.hpp"
#include "safefw/lp.hpp"

namespace safefw {

namespace {

struct ConeTerms {
  Vector values;  // g_i(x)
  Vector grad_cone;  // gradient of phi ||P^{1/2} v|| w.r.t. x
};

ConeTerms cone_terms(const EstimatorState& state, double phi, const Vector& x) {
  const int d = state.dim();
  Vector v(d + 1);
  v.head(d) = x;
  v(d) = -1.0;
  const Vector Pv = state.inverse_gram() * v;
  const double norm = std::sqrt(std::max(0.0, v.dot(Pv)));
  ConeTerms out;
  out.values = state.A_hat() * x - state.b_hat() + Vector::Constant(state.num_constraints(),
                                                                    phi * norm);
  out.grad_cone = norm > 0.0 ? Vector(phi * Pv.head(d) / norm) : Vector(Vector::Zero(d));
  return out;
}

}  // namespace

double soc_max_violation(const EstimatorState& state, const SafetyConfig& cfg, const Vector& x) {
  return cone_terms(state, cfg.phi_delta(state.count()), x).values.maxCoeff();
}

SocLinminResult soc_linmin(const EstimatorState& state, const SafetyConfig& cfg, const Vector& c,
                           const Vector& safe_point, double guard_radius,
                           const SocLinminOptions& options) {
  const int d = state.dim();
  const int m = state.num_constraints();
  const double phi = cfg.phi_delta(state.count());
  const Matrix A_hat = state.A_hat();
  const Vector b_hat = state.b_hat();

  if (cone_terms(state, phi, safe_point).values.maxCoeff() > options.violation_tol) {
    throw PreconditionError("soc_linmin: anchor point is not in the safety set");
  }

  std::vector<Vector> cut_normals;
  std::vector<double> cut_offsets;

  SocLinminResult out;
  Vector best = safe_point;
  double best_value = c.dot(safe_point);

  while (true) {
    const int rows = m + 2 * d + static_cast<int>(cut_normals.size());
    lp::LpProblem prob;
    prob.c = c;
    prob.A.resize(rows, d);
    prob.b.resize(rows);
    prob.A.topRows(m) = A_hat;
    prob.b.head(m) = b_hat;
    prob.A.middleRows(m, d) = Matrix::Identity(d, d);
    prob.A.middleRows(m + d, d) = -Matrix::Identity(d, d);
    prob.b.segment(m, 2 * d).setConstant(guard_radius);
    for (std::size_t k = 0; k < cut_normals.size(); ++k) {
      prob.A.row(m + 2 * d + k) = cut_normals[k].transpose();
      prob.b(m + 2 * d + k) = cut_offsets[k];
    }
    const auto sol = lp::solve(prob);
    if (sol.status != lp::LpStatus::optimal) break;
    out.relaxation_values.push_back(sol.value);

    const ConeTerms terms = cone_terms(state, phi, sol.point);
    int worst = 0;
    const double violation = terms.values.maxCoeff(&worst);
    if (violation <= options.violation_tol) {
      out.point = sol.point;
      out.converged = true;
      break;
    }

    // Largest feasible step from the anchor toward the relaxation optimum.
    double lo = 0.0;
    double hi = 1.0;
    const Vector dir = sol.point - safe_point;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (cone_terms(state, phi, safe_point + mid * dir).values.maxCoeff() <= 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const Vector candidate = safe_point + lo * dir;
    if (c.dot(candidate) < best_value) {
      best_value = c.dot(candidate);
      best = candidate;
    }

    if (out.cuts >= options.max_cuts) break;
    const Vector normal = A_hat.row(worst).transpose() + terms.grad_cone;
    cut_normals.push_back(normal);
    cut_offsets.push_back(normal.dot(sol.point) - violation);
    ++out.cuts;
  }

  if (!out.converged) out.point = best;
  out.value = c.dot(out.point);
  out.max_violation = cone_terms(state, phi, out.point).values.maxCoeff();
  return out;
}

TrajectoryRecord ro_run(const Objective& objective, ConstraintOracle& oracle,
                        const SafetyConfig& safety, const RoConfig& cfg, const Vector& x0,
                        const IterationObserver& observer) {
  const int d = oracle.dim();
  if (x0.size() != d) throw DimensionError("ro_run: x0 has wrong dimension");
  if (cfg.total_measurements < 2L * (d + 1)) {
    throw PreconditionError("ro_run: total_measurements must be at least 2(d+1)");
  }
  const Vector site = cfg.measurement_site.value_or(x0);
  if (site.size() != d) throw DimensionError("ro_run: measurement site has wrong dimension");

  EstimatorState state(d, oracle.num_constraints());
  const long start_count = oracle.measurements_taken();
  state.absorb(oracle.measure_cross(site, cfg.total_measurements));

  TrajectoryRecord rec;
  const SafetyVerdict start = fact2_check(state, safety, x0);
  if (!start.safe) {
    rec.status = RunStatus::failed;
    rec.message = "ro_run: safety set is empty around x0 after the measurement phase";
    rec.total_measurements = oracle.measurements_taken() - start_count;
    rec.out_of_reach_probes = oracle.out_of_reach_events();
    return rec;
  }

  Vector x = x0;
  int warnings = 0;
  for (int t = 0; t <= cfg.T; ++t) {
    IterationRecord it;
    it.t = t;
    it.x = x;
    it.f_value = objective.value(x);
    const Vector grad = objective.gradient(x);
    const SocLinminResult lin = soc_linmin(state, safety, grad, x0, cfg.guard_radius);
    if (!lin.converged) ++warnings;
    it.s_hat = lin.point;
    it.dfs_value = lin.value;
    it.gap = surrogate_gap(grad, x, lin.point);
    it.et_bound = std::numeric_limits<double>::infinity();
    const SafetyVerdict verdict = fact2_check(state, safety, x);
    it.fact2_lhs = verdict.lhs;
    it.min_margin = verdict.min_margin;
    it.safe = verdict.safe;
    it.N_t = state.count();
    it.n_t = t == 0 ? state.count() : 0;
    if (t < cfg.T) {
      it.gamma = 1.0 / (t + 2.0);
      it.step_taken = true;
    }
    if (observer) observer(it, state);
    rec.iterations.push_back(it);
    if (it.step_taken) x = x + it.gamma * (lin.point - x);
  }
  if (warnings > 0) {
    std::ostringstream os;
    os << warnings << " linear subproblem(s) hit the cut limit";
    rec.message = os.str();
  }
  rec.total_measurements = oracle.measurements_taken() - start_count;
  rec.out_of_reach_probes = oracle.out_of_reach_events();
  return rec;
}

}  // namespace safefw
