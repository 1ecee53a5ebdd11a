#include "safefw/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "safefw/error.hpp"
#include "safefw/lp.hpp"

namespace safefw {

double Polytope::max_violation(const Vector& x) const {
  if (A.rows() == 0) return -std::numeric_limits<double>::infinity();
  return (A * x - b).maxCoeff();
}

Polytope Polytope::box(int d, double half_width) {
  Polytope p;
  p.A.resize(2 * d, d);
  p.A << Matrix::Identity(d, d), -Matrix::Identity(d, d);
  p.b = Vector::Constant(2 * d, half_width);
  return p;
}

Objective quadratic_objective(const Vector& target, double lipschitz_M) {
  Objective f;
  f.value = [target](const Vector& x) { return 0.5 * (x - target).squaredNorm(); };
  f.gradient = [target](const Vector& x) -> Vector { return x - target; };
  f.M = lipschitz_M;
  f.L = 1.0;
  return f;
}

GeometryOverrides GeometryOverrides::box(int d, double half_width) {
  GeometryOverrides o;
  o.Gamma = 2.0 * half_width * std::sqrt(static_cast<double>(d));
  o.Gamma0 = half_width * std::sqrt(static_cast<double>(d));
  o.rho_min = 1.0;
  return o;
}

namespace {

void check_shape(const Polytope& p) {
  if (p.A.rows() != p.b.size()) {
    std::ostringstream os;
    os << "polytope: A has " << p.A.rows() << " rows but b has " << p.b.size() << " entries";
    throw DimensionError(os.str());
  }
  if (p.A.cols() == 0) throw DimensionError("polytope: zero-dimensional constraint matrix");
  for (int i = 0; i < p.A.rows(); ++i) {
    if (p.A.row(i).isZero(0.0)) {
      std::ostringstream os;
      os << "polytope: row " << i << " of A is all zero";
      throw DimensionError(os.str());
    }
  }
}

}  // namespace

ValidationReport validate(const Polytope& p) {
  check_shape(p);
  const int d = p.dim();
  const int m = p.num_constraints();
  ValidationReport report;

  report.bounded = true;
  for (int i = 0; i < d && report.bounded; ++i) {
    for (double sign : {1.0, -1.0}) {
      lp::LpProblem prob{Vector::Zero(d), p.A, p.b};
      prob.c(i) = -sign;
      const auto sol = lp::solve(prob);
      if (sol.status == lp::LpStatus::unbounded) {
        report.bounded = false;
        break;
      }
      if (sol.status == lp::LpStatus::infeasible) return report;
    }
  }

  // max r  s.t.  <a_i, x> + r ||a_i|| <= b_i,  r <= cap
  constexpr double kRadiusCap = 1e6;
  lp::LpProblem cheb;
  cheb.A = Matrix::Zero(m + 1, d + 1);
  cheb.b = Vector::Zero(m + 1);
  cheb.A.topLeftCorner(m, d) = p.A;
  cheb.A.block(0, d, m, 1) = p.A.rowwise().norm();
  cheb.b.head(m) = p.b;
  cheb.A(m, d) = 1.0;
  cheb.b(m) = kRadiusCap;
  cheb.c = Vector::Zero(d + 1);
  cheb.c(d) = -1.0;
  const auto sol = lp::solve(cheb);
  if (sol.status == lp::LpStatus::optimal && sol.point(d) > 1e-9) {
    report.interior_point = Vector(sol.point.head(d));
    report.chebyshev_radius = sol.point(d);
  }
  return report;
}

std::vector<Vector> polytope_vertices(const Polytope& p, std::size_t max_subsets) {
  check_shape(p);
  const auto sets = lp::enumerate_active_sets(p.A, p.b, max_subsets);
  std::vector<Vector> vertices;
  for (const auto& s : sets) {
    const bool seen = std::any_of(vertices.begin(), vertices.end(), [&](const Vector& v) {
      return (v - s.point).cwiseAbs().maxCoeff() <= 1e-9;
    });
    if (!seen) vertices.push_back(s.point);
  }
  return vertices;
}

double max_vertex_distance(const std::vector<Vector>& vertices, const Vector& target) {
  double best = 0.0;
  for (const auto& v : vertices) best = std::max(best, (v - target).norm());
  return best;
}

GeometryConstants geometry_constants(const Polytope& p, const Objective& objective,
                                     const Vector& x0, const GeometryOverrides& overrides,
                                     std::size_t max_subsets) {
  check_shape(p);
  if (x0.size() != p.dim()) throw DimensionError("geometry_constants: x0 has wrong dimension");

  GeometryConstants g;
  g.eps0 = (p.b - p.A * x0).minCoeff();
  g.L_A = p.A.rowwise().norm().maxCoeff();
  if (g.eps0 <= 0.0) {
    throw PreconditionError("geometry_constants: x0 is not strictly feasible (eps0 <= 0)");
  }

  if (overrides.complete()) {
    g.Gamma = *overrides.Gamma;
    g.Gamma0 = *overrides.Gamma0;
    g.rho_min = *overrides.rho_min;
  } else {
    const auto sets = lp::enumerate_active_sets(p.A, p.b, max_subsets);
    if (sets.empty()) throw PreconditionError("geometry_constants: polytope has no vertices");
    double rho = std::numeric_limits<double>::infinity();
    double gamma0 = 0.0;
    for (const auto& s : sets) {
      rho = std::min(rho, s.sigma_min);
      gamma0 = std::max(gamma0, s.point.norm());
    }
    double gamma = 0.0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      for (std::size_t j = i + 1; j < sets.size(); ++j) {
        gamma = std::max(gamma, (sets[i].point - sets[j].point).norm());
      }
    }
    g.Gamma = overrides.Gamma.value_or(gamma);
    g.Gamma0 = overrides.Gamma0.value_or(gamma0);
    g.rho_min = overrides.rho_min.value_or(rho);
  }
  g.Cf_bound = objective.L * g.Gamma * g.Gamma;
  return g;
}

Vector project_onto_polytope(const Polytope& p, const Vector& x, double tol, int max_sweeps) {
  check_shape(p);
  if (p.contains(x, 0.0)) return x;
  const int m = p.num_constraints();
  const Vector row_sq = p.A.rowwise().squaredNorm();
  Matrix corrections = Matrix::Zero(p.dim(), m);
  Vector y = x;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    for (int i = 0; i < m; ++i) {
      const Vector z = y + corrections.col(i);
      const double excess = p.A.row(i).dot(z) - p.b(i);
      Vector projected = z;
      if (excess > 0.0) projected -= (excess / row_sq(i)) * p.A.row(i).transpose();
      corrections.col(i) = z - projected;
      change = std::max(change, (projected - y).cwiseAbs().maxCoeff());
      y = projected;
    }
    if (change <= tol && p.max_violation(y) <= tol) break;
  }
  return y;
}

}  // namespace safefw
