#include <benchmark/benchmark.h>

#include <random>

#include "safefw/harness.hpp"
#include "safefw/lp.hpp"

namespace {

using safefw::Matrix;
using safefw::Vector;

// Box plus `extra` random cuts; the origin stays interior.
safefw::lp::LpProblem random_lp(int d, int extra, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> offset(0.3, 1.5);
  const auto box = safefw::Polytope::box(d);
  Matrix A(2 * d + extra, d);
  Vector b(2 * d + extra);
  A.topRows(2 * d) = box.A;
  b.head(2 * d) = box.b;
  for (int i = 0; i < extra; ++i) {
    Vector a(d);
    for (int k = 0; k < d; ++k) a(k) = normal(rng);
    A.row(2 * d + i) = a.normalized().transpose();
    b(2 * d + i) = offset(rng);
  }
  Vector c(d);
  for (int k = 0; k < d; ++k) c(k) = normal(rng);
  return {c, A, b};
}

void BM_LpSolve(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto p = random_lp(d, 2 * d, 7);
  for (auto _ : state) benchmark::DoNotOptimize(safefw::lp::solve(p));
}
BENCHMARK(BM_LpSolve)->Arg(2)->Arg(4)->Arg(10)->Arg(20);

void BM_EstimatorAbsorb(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  safefw::ConstraintOracle oracle(safefw::Polytope::box(d),
                                  safefw::NoiseModel{safefw::NoiseKind::gaussian, 0.01, 3}, 0.01);
  const auto batch = oracle.measure_cross(Vector::Zero(d), 2L * d);
  for (auto _ : state) {
    state.PauseTiming();
    safefw::EstimatorState est(d, 2 * d);
    est.absorb(batch);
    state.ResumeTiming();
    for (int k = 0; k < 16; ++k) est.absorb(batch);
    benchmark::DoNotOptimize(est.beta_hat());
  }
  state.SetItemsProcessed(state.iterations() * 16);
}
BENCHMARK(BM_EstimatorAbsorb)->Arg(2)->Arg(4)->Arg(10);

void BM_SfwRun(benchmark::State& state) {
  namespace h = safefw::harness;
  const int d = static_cast<int>(state.range(0));
  const nlohmann::json j = {
      {"problem", {{"type", "box"}, {"d", d}}},
      {"noise", {{"kind", "gaussian"}, {"sigma", 0.01}}},
      {"omega0", 0.01},
      {"delta", 0.1},
      {"T", 15},
      {"variant", "adaptive"},
      {"repetitions", 1},
      {"base_seed", 1}};
  const auto cfg = h::parse_config(j);
  const auto inst = h::build_instance(cfg);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(h::run_single(cfg, inst, h::Variant::adaptive, ++seed));
  }
}
BENCHMARK(BM_SfwRun)->Arg(2)->Arg(4)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
