#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace safefw::lp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// min <c, x>  subject to  A x <= b,  x free.
struct LpProblem {
  Vector c;
  Matrix A;
  Vector b;
};

enum class LpStatus { optimal, infeasible, unbounded };

const char* to_string(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  Vector point;
  double value = 0.0;
  /// Rows of A that are tight at `point` (within the feasibility tolerance).
  std::vector<int> active_set;
  int pivots = 0;
};

struct SimplexOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-10;
  double pivot_tol = 1e-11;
  /// Zero means "derive from problem size".
  int max_pivots = 0;
};

/// Dense two-phase tableau simplex with Bland's rule. Returns a vertex of the
/// feasible region when the optimum is attained. Throws NumericalError when
/// the pivot cap is hit.
LpSolution solve(const LpProblem& problem, const SimplexOptions& options = {});

/// One vertex found by active-set enumeration.
struct ActiveSetVertex {
  std::vector<int> active_set;
  Vector point;
  /// Smallest singular value of the d x d submatrix A^B.
  double sigma_min = 0.0;
};

/// Enumerates every d-subset B of constraints with nonsingular A^B whose
/// intersection point is feasible. One entry per subset, so a degenerate
/// vertex appears once per defining basis. Throws PreconditionError when the
/// number of subsets exceeds `max_subsets`.
std::vector<ActiveSetVertex> enumerate_active_sets(const Matrix& A, const Vector& b,
                                                   std::size_t max_subsets,
                                                   double feasibility_tol = 1e-9);

/// Distinct vertices of {x : A x <= b}, deduplicated at 1e-9. Capped at
/// m <= 16 and d <= 6; meant as a brute-force reference for `solve`.
std::vector<Vector> enumerate_vertices(const LpProblem& problem);

/// Binomial coefficient, saturating at SIZE_MAX.
std::size_t binomial(std::size_t n, std::size_t k);

}  // namespace safefw::lp
