#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace safefw {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Ground-truth feasible set {x : A x <= b}.
struct Polytope {
  Matrix A;
  Vector b;

  int dim() const { return static_cast<int>(A.cols()); }
  int num_constraints() const { return static_cast<int>(A.rows()); }

  /// max_i (<a_i, x> - b_i); non-positive iff x is feasible.
  double max_violation(const Vector& x) const;
  bool contains(const Vector& x, double tol = 1e-9) const { return max_violation(x) <= tol; }

  /// The box {x : -half_width <= x_i <= half_width}, rows ordered [I; -I].
  static Polytope box(int d, double half_width = 1.0);
};

/// Smooth convex objective with an exact gradient oracle.
struct Objective {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  /// Lipschitz constant of f over the feasible set.
  double M = 0.0;
  /// Lipschitz constant of the gradient.
  double L = 0.0;
};

/// f(x) = 0.5 * ||x - target||^2 (L = 1). M is supplied by the caller since it
/// depends on the feasible set; see `max_vertex_distance`.
Objective quadratic_objective(const Vector& target, double lipschitz_M);

struct GeometryConstants {
  double Gamma = 0.0;   // diameter of D
  double Gamma0 = 0.0;  // max ||x|| over D
  double eps0 = 0.0;    // min_i (b_i - <a_i, x0>)
  double L_A = 0.0;     // max_i ||a_i||
  double rho_min = 0.0; // min over vertex active sets of sigma_min(A^B)
  double Cf_bound = 0.0; // L * Gamma^2
};

/// Analytic values that bypass vertex enumeration. All three must be set for
/// enumeration to be skipped.
struct GeometryOverrides {
  std::optional<double> Gamma;
  std::optional<double> Gamma0;
  std::optional<double> rho_min;

  bool complete() const { return Gamma && Gamma0 && rho_min; }
  static GeometryOverrides box(int d, double half_width = 1.0);
};

struct ValidationReport {
  bool bounded = false;
  /// Chebyshev center when the interior is non-empty.
  std::optional<Vector> interior_point;
  double chebyshev_radius = 0.0;
};

/// Checks boundedness (maximise +-e_i) and non-empty interior (max-margin LP).
/// Throws DimensionError on shape mismatch or an all-zero row.
ValidationReport validate(const Polytope& p);

/// Vertices of D via active-set enumeration; throws PreconditionError past the
/// subset cap.
std::vector<Vector> polytope_vertices(const Polytope& p, std::size_t max_subsets = 1'000'000);

/// max over vertices of ||v - target||: the Lipschitz constant of the
/// quadratic objective over D.
double max_vertex_distance(const std::vector<Vector>& vertices, const Vector& target);

GeometryConstants geometry_constants(const Polytope& p, const Objective& objective,
                                     const Vector& x0, const GeometryOverrides& overrides = {},
                                     std::size_t max_subsets = 1'000'000);

/// Euclidean projection onto D by Dykstra's alternating projections.
Vector project_onto_polytope(const Polytope& p, const Vector& x, double tol = 1e-12,
                             int max_sweeps = 200'000);

}  // namespace safefw
