#include "safefw/estimator.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "safefw/error.hpp"

namespace safefw {

namespace {

constexpr double kBreakdownDenominator = 1e-12;
// Reciprocal condition numbers of the Gram matrix: below the first the design
// does not span; below the second P is refreshed densely instead of updated.
constexpr double kSpanRcond = 1e-12;
constexpr double kUpdateRcond = 1e-6;

Vector design_row(const Vector& point) {
  Vector v(point.size() + 1);
  v.head(point.size()) = point;
  v(point.size()) = -1.0;
  return v;
}

}  // namespace

EstimatorState::EstimatorState(int dim, int num_constraints)
    : d_(dim),
      m_(num_constraints),
      gram_(Matrix::Zero(dim + 1, dim + 1)),
      moment_(Matrix::Zero(dim + 1, num_constraints)),
      P_(Matrix::Zero(dim + 1, dim + 1)),
      beta_(Matrix::Zero(dim + 1, num_constraints)),
      mean_(Vector::Zero(dim)),
      scatter_(Matrix::Zero(dim, dim)) {
  if (dim <= 0 || num_constraints <= 0) {
    throw DimensionError("EstimatorState: dimension and constraint count must be positive");
  }
}

void EstimatorState::absorb(const Vector& point, const Vector& values) {
  absorb_repeated(point, 1, values);
}

void EstimatorState::absorb(const MeasurementBatch& batch) {
  for (int k = 0; k < batch.points.rows(); ++k) {
    absorb_repeated(batch.points.row(k).transpose(), batch.counts[k],
                    batch.value_sums.row(k).transpose());
  }
}

void EstimatorState::absorb_repeated(const Vector& point, long count, const Vector& value_sum) {
  if (point.size() != d_) throw DimensionError("absorb: point has wrong dimension");
  if (value_sum.size() != m_) throw DimensionError("absorb: values have wrong length");
  if (count <= 0) return;

  const Vector v = design_row(point);
  const double k = static_cast<double>(count);
  gram_.noalias() += k * v * v.transpose();
  moment_.noalias() += v * value_sum.transpose();

  // Weighted Welford update of mean and centered scatter.
  const long n_new = n_ + count;
  const Vector delta = point - mean_;
  mean_ += (k / static_cast<double>(n_new)) * delta;
  scatter_.noalias() += (static_cast<double>(n_) * k / static_cast<double>(n_new)) * delta *
                        delta.transpose();
  n_ = n_new;

  if (!well_conditioned_) {
    refresh_estimate();
    return;
  }
  const Vector Pv = P_ * v;
  const double denom = 1.0 + k * v.dot(Pv);
  if (!(denom > kBreakdownDenominator)) {
    recompute();
    return;
  }
  P_.noalias() -= (k / denom) * Pv * Pv.transpose();
  P_ = 0.5 * (P_ + P_.transpose()).eval();
  beta_.noalias() = P_ * moment_;
}

void EstimatorState::refresh_estimate() {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram_);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  if (lmax > 0.0 && lmin > kSpanRcond * lmax) {
    const int rebuilds = rebuilds_;
    recompute();
    rebuilds_ = rebuilds;
    well_conditioned_ = lmin > kUpdateRcond * lmax;
    return;
  }
  beta_ = Eigen::CompleteOrthogonalDecomposition<Matrix>(gram_).solve(moment_);
}

void EstimatorState::recompute() {
  Eigen::LDLT<Matrix> ldlt(gram_);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw NumericalError("EstimatorState: Gram matrix is not positive definite");
  }
  P_ = ldlt.solve(Matrix::Identity(d_ + 1, d_ + 1));
  P_ = 0.5 * (P_ + P_.transpose()).eval();
  beta_.noalias() = P_ * moment_;
  if (spans_) ++rebuilds_;
  spans_ = true;
}

const Matrix& EstimatorState::inverse_gram() const {
  if (!spans_) {
    throw PreconditionError("EstimatorState: design does not span R^{d+1} yet; P undefined");
  }
  return P_;
}

Matrix EstimatorState::sum_outer() const {
  return scatter_ + static_cast<double>(n_) * mean_ * mean_.transpose();
}

double covariance_sqrt_norm(const EstimatorState& state, double sigma) {
  const Matrix& P = state.inverse_gram();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(P, Eigen::EigenvaluesOnly);
  return sigma * std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

double covariance_sqrt_norm_bound(int d, double gamma0, double omega0, long n, double sigma) {
  return sigma * std::sqrt(static_cast<double>(d)) *
         std::sqrt((gamma0 * gamma0 + 1.0) / (omega0 * omega0) + 1.0) /
         std::sqrt(static_cast<double>(n));
}

BlockQuantities block_quantities(const EstimatorState& state) {
  const Matrix& S = state.centered_scatter();
  if (state.count() == 0) throw NumericalError("block_quantities: no points absorbed");
  Eigen::LDLT<Matrix> ldlt(S);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S, Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  if (!(lmax > 0.0) || lmin <= 1e-13 * lmax) {
    throw NumericalError("block_quantities: centered scatter is singular (points not spread)");
  }
  BlockQuantities out;
  out.mean = state.mean();
  out.R = ldlt.solve(Matrix::Identity(S.rows(), S.cols()));
  out.R = 0.5 * (out.R + out.R.transpose()).eval();
  return out;
}

Matrix inverse_gram_from_blocks(const BlockQuantities& blocks, long n) {
  const int d = static_cast<int>(blocks.mean.size());
  Matrix P(d + 1, d + 1);
  const Vector Rx = blocks.R * blocks.mean;
  P.topLeftCorner(d, d) = blocks.R;
  P.topRightCorner(d, 1) = Rx;
  P.bottomLeftCorner(1, d) = Rx.transpose();
  P(d, d) = 1.0 / static_cast<double>(n) + blocks.mean.dot(Rx);
  return P;
}

double chi_squared_quantile(double dof, double probability, double abs_tol) {
  if (!(probability > 0.0 && probability < 1.0)) {
    throw PreconditionError("chi_squared_quantile: probability must lie in (0, 1)");
  }
  if (!(dof > 0.0)) throw PreconditionError("chi_squared_quantile: dof must be positive");
  const auto cdf = [dof](double x) { return boost::math::gamma_p(0.5 * dof, 0.5 * x); };
  double lo = 0.0;
  double hi = std::max(1.0, dof);
  while (cdf(hi) < probability) hi *= 2.0;
  while (hi - lo > abs_tol) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < probability) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double phi_inverse(ConfidenceMode mode, long n, int d, double delta_bar) {
  if (!(delta_bar > 0.0 && delta_bar < 1.0)) {
    throw PreconditionError("phi_inverse: delta_bar must lie in (0, 1)");
  }
  if (mode == ConfidenceMode::chisq) {
    return std::sqrt(chi_squared_quantile(d + 1, 1.0 - delta_bar));
  }
  const double N = static_cast<double>(n);
  if (n < 1 || N * std::exp(-1.0 / 16.0) < delta_bar) {
    std::ostringstream os;
    os << "phi_inverse: sub-Gaussian radius requires N e^{-1/16} >= delta_bar (N=" << n
       << ", delta_bar=" << delta_bar << ")";
    throw PreconditionError(os.str());
  }
  const double log_term = std::log(N * N / delta_bar);
  const double first = std::sqrt(128.0 * d * std::log(N) * log_term);
  const double second = 8.0 / 3.0 * log_term;
  return std::max(first, second);
}

std::vector<bool> confidence_membership(const EstimatorState& state, double sigma, double phi,
                                        const Matrix& beta_true) {
  if (beta_true.rows() != state.dim() + 1 || beta_true.cols() != state.num_constraints()) {
    throw DimensionError("confidence_membership: beta_true has wrong shape");
  }
  if (!state.spans()) throw PreconditionError("confidence_membership: P is not yet defined");
  std::vector<bool> inside(state.num_constraints());
  const Matrix& gram = state.gram();
  for (int i = 0; i < state.num_constraints(); ++i) {
    const Vector diff = state.beta_hat().col(i) - beta_true.col(i);
    const double quad = diff.dot(gram * diff);
    if (sigma == 0.0) {
      inside[i] = quad == 0.0;
    } else {
      inside[i] = quad / (sigma * sigma) <= phi * phi;
    }
  }
  return inside;
}

}  // namespace safefw
