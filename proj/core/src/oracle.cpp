#include "safefw/oracle.hpp"

#include <sstream>

#include "safefw/error.hpp"

namespace safefw {

CrossPattern cross_pattern(const Vector& center, double omega0, long n) {
  const long d = center.size();
  if (n < 2 * d) {
    std::ostringstream os;
    os << "cross_pattern: need at least 2d = " << 2 * d << " measurements, got " << n;
    throw PreconditionError(os.str());
  }
  CrossPattern cp;
  cp.points.resize(2 * d, d);
  for (long i = 0; i < d; ++i) {
    cp.points.row(2 * i) = center.transpose();
    cp.points(2 * i, i) += omega0;
    cp.points.row(2 * i + 1) = center.transpose();
    cp.points(2 * i + 1, i) -= omega0;
  }
  cp.multiplicity = (n + 2 * d - 1) / (2 * d);
  return cp;
}

long MeasurementBatch::total() const {
  long n = 0;
  for (long c : counts) n += c;
  return n;
}

ConstraintOracle::ConstraintOracle(Polytope truth, NoiseModel noise, double omega0)
    : truth_(std::move(truth)), noise_(noise), omega0_(omega0), rng_(noise.seed) {
  if (truth_.A.rows() != truth_.b.size()) {
    throw DimensionError("ConstraintOracle: A and b disagree");
  }
  if (noise_.sigma < 0.0) throw PreconditionError("ConstraintOracle: sigma must be >= 0");
}

double ConstraintOracle::draw() {
  if (noise_.sigma == 0.0) return 0.0;
  switch (noise_.kind) {
    case NoiseKind::gaussian:
      return noise_.sigma * normal_(rng_);
    case NoiseKind::bounded_uniform:
      return noise_.sigma * uniform_(rng_);
  }
  return 0.0;
}

bool ConstraintOracle::within_reach(const Vector& x) const {
  if (truth_.contains(x, 0.0)) return true;
  const Vector y = project_onto_polytope(truth_, x, 1e-12, 20'000);
  return (y - x).norm() <= omega0_ * (1.0 + 1e-9);
}

Vector ConstraintOracle::measure(const Vector& x) {
  if (x.size() != truth_.dim()) throw DimensionError("measure: point has wrong dimension");
  if (!within_reach(x)) ++out_of_reach_;
  Vector y = truth_.A * x - truth_.b;
  for (int i = 0; i < y.size(); ++i) y(i) += draw();
  ++measurements_;
  return y;
}

Vector ConstraintOracle::tightened_measure(const Vector& x, const Vector& kappa) {
  if (kappa.size() != truth_.num_constraints()) {
    throw DimensionError("tightened_measure: kappa has wrong length");
  }
  if ((kappa.array() < 0.0).any()) {
    throw PreconditionError("tightened_measure: kappa must be non-negative");
  }
  // Adding kappa moves every facet inward by kappa_i / ||a_i||.
  return measure(x) + kappa;
}

MeasurementBatch ConstraintOracle::measure_cross(const Vector& center, long n) {
  if (center.size() != truth_.dim()) throw DimensionError("measure_cross: wrong dimension");
  const CrossPattern cp = cross_pattern(center, omega0_, n);
  const int m = truth_.num_constraints();
  MeasurementBatch batch;
  batch.center = center;
  batch.points = cp.points;
  batch.counts.assign(cp.points.rows(), cp.multiplicity);
  batch.value_sums = Matrix::Zero(cp.points.rows(), m);

  // Every probe is within omega0 of the center, so a feasible center makes
  // the whole cross reachable.
  const bool center_inside = truth_.contains(center, 0.0);
  for (int k = 0; k < cp.points.rows(); ++k) {
    const Vector x = cp.points.row(k).transpose();
    if (!center_inside && !within_reach(x)) out_of_reach_ += cp.multiplicity;
    const Vector exact = truth_.A * x - truth_.b;
    for (long r = 0; r < cp.multiplicity; ++r) {
      for (int i = 0; i < m; ++i) batch.value_sums(k, i) += exact(i) + draw();
    }
  }
  measurements_ += cp.total();
  return batch;
}

Matrix ConstraintOracle::true_parameters() const {
  const int d = truth_.dim();
  const int m = truth_.num_constraints();
  Matrix beta(d + 1, m);
  beta.topRows(d) = truth_.A.transpose();
  beta.row(d) = truth_.b.transpose();
  return beta;
}

}  // namespace safefw
