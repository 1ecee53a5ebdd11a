#pragma once

#include <vector>

#include "safefw/oracle.hpp"
#include "safefw/problem.hpp"

namespace safefw {

/// Running least-squares estimate of all constraint parameters
/// beta_i = [a_i; b_i] from rows v = [x; -1] and observations y.
///
/// Until the design spans R^{d+1} the estimate is a minimum-norm
/// pseudo-inverse solution of the accumulated normal equations; afterwards the
/// inverse P = (Xbar^T Xbar)^{-1} is refactorised while the Gram matrix is
/// poorly conditioned and maintained by rank-one updates once it is not. A
/// degenerate update denominator triggers a rebuild of P from the stored Gram
/// matrix.
class EstimatorState {
 public:
  EstimatorState(int dim, int num_constraints);

  int dim() const { return d_; }
  int num_constraints() const { return m_; }

  void absorb(const Vector& point, const Vector& values);
  /// Absorbs `count` observations at the same point whose values sum to
  /// `value_sum`; identical to `count` single absorbs.
  void absorb_repeated(const Vector& point, long count, const Vector& value_sum);
  void absorb(const MeasurementBatch& batch);

  /// True once Xbar^T Xbar is positive definite and P is maintained.
  bool spans() const { return spans_; }
  long count() const { return n_; }

  /// P = (Xbar^T Xbar)^{-1}; throws PreconditionError before spanning.
  const Matrix& inverse_gram() const;
  const Matrix& gram() const { return gram_; }
  /// Xbar^T Y, (d+1) x m.
  const Matrix& moment() const { return moment_; }
  /// Columns are beta_hat_i = [a_hat_i; b_hat_i].
  const Matrix& beta_hat() const { return beta_; }
  Matrix A_hat() const { return beta_.topRows(d_).transpose(); }
  Vector b_hat() const { return beta_.row(d_).transpose(); }

  /// Sample mean of all absorbed points.
  const Vector& mean() const { return mean_; }
  /// Sum of (x_j - mean)(x_j - mean)^T.
  const Matrix& centered_scatter() const { return scatter_; }
  /// Sum of x_j x_j^T.
  Matrix sum_outer() const;

  /// Rebuilds P and beta_hat from the Gram matrix by dense factorisation.
  void recompute();

  int rebuilds() const { return rebuilds_; }

 private:
  void refresh_estimate();

  int d_;
  int m_;
  long n_ = 0;
  bool spans_ = false;
  bool well_conditioned_ = false;
  int rebuilds_ = 0;
  Matrix gram_;
  Matrix moment_;
  Matrix P_;
  Matrix beta_;
  Vector mean_;
  Matrix scatter_;
};

/// sigma * sqrt(lambda_max(P)) = ||Sigma^{1/2}||.
double covariance_sqrt_norm(const EstimatorState& state, double sigma);

/// Worst-case bound on ||Sigma^{1/2}|| for cross-pattern sampling:
/// sigma sqrt(d) sqrt((Gamma0^2 + 1)/omega0^2 + 1) / sqrt(N).
double covariance_sqrt_norm_bound(int d, double gamma0, double omega0, long n, double sigma);

struct BlockQuantities {
  Vector mean;
  /// Inverse centered scatter.
  Matrix R;
};

/// Sample mean and inverse centered scatter of the probe points. Throws
/// NumericalError when the scatter is singular.
BlockQuantities block_quantities(const EstimatorState& state);

/// Assembles [R, R xbar; xbar^T R, 1/N + xbar^T R xbar], which equals P.
Matrix inverse_gram_from_blocks(const BlockQuantities& blocks, long n);

enum class ConfidenceMode { subgaussian, chisq };

/// Confidence radius phi^{-1}(delta_bar). Throws PreconditionError when the
/// mode's validity condition fails.
double phi_inverse(ConfidenceMode mode, long n, int d, double delta_bar);

/// Inverse CDF of the chi-squared distribution by bisection on the
/// regularized lower incomplete gamma function.
double chi_squared_quantile(double dof, double probability, double abs_tol = 1e-10);

/// Per-constraint test (beta_hat_i - beta_i)^T (sigma^2 P)^{-1} (beta_hat_i -
/// beta_i) <= phi^2 against known true parameters. Diagnostic only.
std::vector<bool> confidence_membership(const EstimatorState& state, double sigma, double phi,
                                        const Matrix& beta_true);

}  // namespace safefw
