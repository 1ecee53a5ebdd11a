#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "safefw/problem.hpp"

namespace safefw {

enum class NoiseKind { gaussian, bounded_uniform };

/// Additive constraint-measurement noise. `sigma` is the sub-Gaussian
/// parameter: the standard deviation for gaussian, the half-width for
/// bounded_uniform.
struct NoiseModel {
  NoiseKind kind = NoiseKind::gaussian;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// The 2d probe points x +- omega0 e_i and how often each is measured.
struct CrossPattern {
  Matrix points;  // 2d x d, ordered +e_1, -e_1, +e_2, -e_2, ...
  long multiplicity = 0;
  long total() const { return multiplicity * points.rows(); }
};

/// Cross-pattern probes around `center` with n requested measurements, each
/// point measured ceil(n / 2d) times. Throws PreconditionError if n < 2d.
CrossPattern cross_pattern(const Vector& center, double omega0, long n);

/// Aggregated measurements: repeated probes at one point are stored once with
/// their count and the per-constraint sum of observed values.
struct MeasurementBatch {
  Vector center;
  Matrix points;                 // k x d distinct probe points
  std::vector<long> counts;      // measurements per point
  Matrix value_sums;             // k x m, sum of observations per point
  long total() const;
};

/// Noisy zeroth-order access y(x) = A x - b + eta to a ground-truth polytope.
/// Owns its random stream; one instance per run.
class ConstraintOracle {
 public:
  ConstraintOracle(Polytope truth, NoiseModel noise, double omega0);

  int dim() const { return truth_.dim(); }
  int num_constraints() const { return truth_.num_constraints(); }
  const NoiseModel& noise() const { return noise_; }
  double omega0() const { return omega0_; }

  /// One noisy evaluation of every constraint. Never fails; queries whose
  /// omega0-ball misses D are counted in out_of_reach_events().
  Vector measure(const Vector& x);

  /// Measurement of the tightened constraints A x <= b - kappa, i.e.
  /// measure(x) + kappa. Throws PreconditionError on negative kappa.
  Vector tightened_measure(const Vector& x, const Vector& kappa);

  /// Measures a full cross pattern around `center`, using at least n samples.
  MeasurementBatch measure_cross(const Vector& center, long n);

  long measurements_taken() const { return measurements_; }
  long out_of_reach_events() const { return out_of_reach_; }

  /// Ground-truth parameters [a_i; b_i] as columns ((d+1) x m). Diagnostic
  /// use only (confidence-set coverage checks).
  Matrix true_parameters() const;

 private:
  bool within_reach(const Vector& x) const;
  double draw();

  Polytope truth_;
  NoiseModel noise_;
  double omega0_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{-1.0, 1.0};
  long measurements_ = 0;
  long out_of_reach_ = 0;
};

}  // namespace safefw
