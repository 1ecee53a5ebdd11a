#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "safefw/error.hpp"
#include "safefw/oracle.hpp"
#include "safefw/safety.hpp"
#include "test_support.hpp"

namespace {

using safefw::EstimatorState;
using safefw::Matrix;
using safefw::SafetyConfig;
using safefw::Vector;

SafetyConfig config_with_phi(double phi_delta, int d = 2, int m = 4) {
  SafetyConfig cfg;
  cfg.d = d;
  cfg.m = m;
  cfg.sigma = 0.01;
  cfg.phi_delta_override = phi_delta;
  return cfg;
}

// Exact estimates of the unit box from a zero-noise cross at `center`.
EstimatorState exact_box_state(int d = 2, Vector center = Vector()) {
  if (center.size() == 0) center = Vector::Zero(d);
  safefw::ConstraintOracle oracle(safefw::Polytope::box(d),
                                  safefw::NoiseModel{safefw::NoiseKind::gaussian, 0.0, 1}, 0.01);
  EstimatorState s(d, 2 * d);
  s.absorb(oracle.measure_cross(center, 2 * d));
  return s;
}

TEST(Margins, CenterOfUnitBox) {
  const auto s = exact_box_state();
  EXPECT_LE((safefw::margins(s, Vector::Zero(2)) - Vector::Ones(4)).norm(), 1e-12);
}

TEST(Margins, ZeroOnFacet) {
  const auto s = exact_box_state();
  EXPECT_NEAR(safefw::margins(s, Vector{{1.0, 0.3}})(0), 0.0, 1e-12);
}

TEST(Margins, Affine) {
  const auto s = exact_box_state();
  const Vector x{{0.2, -0.5}};
  const Vector y{{-0.7, 0.1}};
  const double lam = 0.3;
  const Vector lhs = safefw::margins(s, lam * x + (1 - lam) * y);
  const Vector rhs = lam * safefw::margins(s, x) + (1 - lam) * safefw::margins(s, y);
  EXPECT_LE((lhs - rhs).norm(), 1e-12);
}

TEST(Fact2, ZeroUncertaintyPositiveMargins) {
  const auto s = exact_box_state();
  const auto v = safefw::fact2_check(s, config_with_phi(0.0), Vector{{0.9, -0.9}});
  EXPECT_TRUE(v.safe);
  EXPECT_EQ(v.lhs, 0.0);
}

TEST(Fact2, NegativeMarginIsUnsafe) {
  const auto s = exact_box_state();
  const auto v = safefw::fact2_check(s, config_with_phi(0.0), Vector{{1.01, 0.0}});
  EXPECT_FALSE(v.safe);
  EXPECT_EQ(v.binding_constraint, 0);
  EXPECT_NEAR(v.min_margin, -0.01, 1e-12);
}

TEST(Fact2, VerdictIsLhsAgainstMinMargin) {
  const auto s = exact_box_state();
  for (double phi : {0.0, 0.01, 1.0}) {
    for (const Vector& x : {Vector{{1.0, 0.0}}, Vector{{0.5, 0.5}}, Vector{{-0.99, 0.2}}}) {
      const auto v = safefw::fact2_check(s, config_with_phi(phi), x);
      EXPECT_EQ(v.safe, v.lhs <= v.min_margin);
    }
  }
}

TEST(Soc, AgreesWithFact2OnExamples) {
  const auto s = exact_box_state();
  for (double phi : {0.0, 1e-3, 0.05}) {
    const auto cfg = config_with_phi(phi);
    for (const Vector& x : {Vector{{0.9, -0.9}}, Vector{{1.01, 0.0}}, Vector{{0.2, 0.3}},
                            Vector{{5.0, 5.0}}}) {
      const auto a = safefw::fact2_check(s, cfg, x);
      const auto b = safefw::soc_check(s, cfg, x);
      EXPECT_EQ(a.safe, b.safe);
      EXPECT_NEAR(a.lhs, b.lhs, 1e-9);
    }
  }
}

TEST(Soc, FarOutsideIsUnsafe) {
  const auto s = exact_box_state();
  EXPECT_FALSE(safefw::soc_check(s, config_with_phi(0.01), Vector{{10.0, 0.0}}).safe);
}

TEST(Soc, ZeroRadiusIsPolytopeMembership) {
  std::mt19937_64 rng(1);
  const auto design = safefw::testing::random_design(rng, 2, 4, 30, 0.2);
  const auto s = safefw::testing::absorb_all(design, 2, 4);
  const auto cfg = config_with_phi(0.0);
  for (int k = 0; k < 200; ++k) {
    const Vector x = 2.0 * safefw::testing::random_normal(rng, 2);
    const bool inside = (s.A_hat() * x - s.b_hat()).maxCoeff() <= 0.0;
    EXPECT_EQ(safefw::soc_check(s, cfg, x).safe, inside);
  }
}

TEST(Soc, RandomAgreementWithFact2) {
  std::mt19937_64 rng(2);
  int disagreements = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int d = 1 + trial % 4;
    const auto design = safefw::testing::random_design(rng, d, 3, 4 * d + 4, 0.3, 0.5);
    const auto s = safefw::testing::absorb_all(design, d, 3);
    const auto cfg = config_with_phi(std::uniform_real_distribution<>(0.0, 0.5)(rng), d, 3);
    const Vector x = safefw::testing::random_normal(rng, d);
    const auto a = safefw::fact2_check(s, cfg, x);
    const auto b = safefw::soc_check(s, cfg, x);
    EXPECT_NEAR(a.lhs, b.lhs, 1e-9 * std::max(1.0, a.lhs));
    if (a.safe != b.safe && std::abs(a.lhs - a.min_margin) > 1e-9) ++disagreements;
  }
  EXPECT_EQ(disagreements, 0);
}

TEST(Fact2, LhsShrinksWithSymmetricBatchesAtCenter) {
  safefw::ConstraintOracle oracle(safefw::Polytope::box(3),
                                  safefw::NoiseModel{safefw::NoiseKind::gaussian, 0.01, 3}, 0.01);
  EstimatorState s(3, 6);
  SafetyConfig cfg;
  cfg.d = 3;
  cfg.m = 6;
  cfg.sigma = 0.01;
  const Vector x{{0.1, 0.2, 0.3}};
  s.absorb(oracle.measure_cross(Vector::Zero(3), 12));
  double prev = safefw::fact2_check(s, cfg, x).lhs;
  for (int k = 0; k < 10; ++k) {
    s.absorb(oracle.measure_cross(x, 6));
    const double cur = safefw::fact2_check(s, cfg, x).lhs;
    EXPECT_LE(cur, prev);
    prev = cur;
  }
}

TEST(Config, UnionBoundAndRadius) {
  SafetyConfig cfg;
  cfg.delta = 0.1;
  cfg.T = 15;
  cfg.d = 2;
  cfg.m = 4;
  cfg.sigma = 0.01;
  EXPECT_NEAR(cfg.delta_bar() * cfg.T, cfg.delta, 1e-15);
  const double expected = 0.01 * std::sqrt(safefw::chi_squared_quantile(3, 1.0 - 0.1 / 15 / 4));
  EXPECT_NEAR(cfg.phi_delta(100), expected, 1e-12);
  cfg.phi_inverse_override = 3.43;
  EXPECT_NEAR(cfg.phi_delta(100), 0.0343, 1e-15);
  cfg.phi_delta_override = 3.43;
  EXPECT_EQ(cfg.phi_delta(100), 3.43);
  SafetyConfig exact;
  exact.sigma = 0.0;
  exact.d = 2;
  exact.m = 4;
  EXPECT_EQ(exact.phi_delta(10), 0.0);
}

TEST(Schedule, CnLowerBoundArithmetic) {
  safefw::GeometryConstants geo;
  geo.eps0 = 1.0;
  geo.L_A = 1.0;
  geo.rho_min = 1.0;
  geo.Gamma0 = std::sqrt(2.0);
  geo.Gamma = 2.0 * std::sqrt(2.0);
  const double phi = 3.43;
  const double omega0 = 0.01;
  // Independent evaluation.
  const double g0 = std::sqrt(2.0);
  const double c = 2.0 * phi * 2.0 * (g0 + 1.0) * std::sqrt(3.0 / (omega0 * omega0) + 1.0);
  const double ll = std::log(std::log(15.0));
  const double expected = c * c * std::max(4.0 * ll * ll, 1.0 / ((g0 + 1.0) * (g0 + 1.0)));
  EXPECT_NEAR(safefw::c_delta(geo, phi, omega0, 2), c, 1e-9 * c);
  EXPECT_NEAR(safefw::cn_lower_bound(geo, phi, omega0, 2, 15), expected, 1e-9 * expected);
  EXPECT_NEAR(safefw::cn_lower_bound(geo, 2 * phi, omega0, 2, 15), 4.0 * expected,
              1e-9 * expected);
  EXPECT_THROW(safefw::cn_lower_bound(geo, phi, omega0, 2, 2), safefw::PreconditionError);
}

TEST(Schedule, NtValues) {
  EXPECT_EQ(safefw::nt_schedule(96.0, 0), 369);
  EXPECT_EQ(safefw::nt_schedule(96.0, 0),
            static_cast<long>(std::ceil(4.0 * 96.0 * 2.0 * std::log(2.0) * std::log(2.0))));
  EXPECT_EQ(safefw::nt_schedule(0.0, 5), 0);
  for (int t = 0; t < 50; ++t) {
    EXPECT_LE(safefw::nt_schedule(96.0, t), safefw::nt_schedule(96.0, t + 1));
  }
  EXPECT_THROW(safefw::nt_schedule(1.0, -1), safefw::PreconditionError);
}

}  // namespace
