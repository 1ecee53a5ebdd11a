#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "safefw/error.hpp"
#include "safefw/harness.hpp"

namespace {

namespace fs = std::filesystem;
namespace h = safefw::harness;
using nlohmann::json;
using safefw::Vector;

json base_config() {
  return json::parse(R"({
    "problem": {"type": "box", "d": 2},
    "noise": {"kind": "gaussian", "sigma": 0.01},
    "omega0": 0.01, "delta": 0.1, "T": 15, "epsilon": 1e-6,
    "confidence": {"mode": "chisq"},
    "Cn": {"times_d_squared": 24},
    "variant": "adaptive", "repetitions": 3, "base_seed": 1000
  })");
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("safefw_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void expect_config_error(json j, const std::string& field) {
  try {
    h::parse_config(j);
    ADD_FAILURE() << "expected ConfigError for " << field;
  } catch (const safefw::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
  }
}

TEST(Config, ParsesDefaults) {
  const auto cfg = h::parse_config(base_config());
  EXPECT_EQ(cfg.problem.d, 2);
  EXPECT_EQ(cfg.problem.x_prime, (Vector{{2.0, 0.5}}));
  EXPECT_EQ(cfg.variant, h::Variant::adaptive);
  EXPECT_EQ(*cfg.cn_times_d_squared, 24.0);
  EXPECT_FALSE(cfg.x0.has_value());
}

TEST(Config, ErrorsNameTheField) {
  auto j = base_config();
  j["T"] = 2;
  expect_config_error(j, "T");
  j = base_config();
  j["noise"]["sigma"] = -1.0;
  expect_config_error(j, "noise.sigma");
  j = base_config();
  j["variant"] = "bogus";
  expect_config_error(j, "variant");
  j = base_config();
  j["problem"]["x_prime"] = {1.0};
  expect_config_error(j, "problem.x_prime");
  j = base_config();
  j["repetitions"] = 0;
  expect_config_error(j, "repetitions");
  j = base_config();
  j["Cn"] = "sometimes";
  expect_config_error(j, "Cn");
  j = base_config();
  j["variant"] = "ro";
  expect_config_error(j, "ro.total_measurements");
  j = base_config();
  j.erase("problem");
  expect_config_error(j, "problem");
}

TEST(Config, AutoCnNeedsSampleFreeRadius) {
  auto j = base_config();
  j.erase("Cn");
  j["confidence"]["mode"] = "subgaussian";
  EXPECT_THROW(h::build_instance(h::parse_config(j)), safefw::ConfigError);
  j["confidence"]["mode"] = "chisq";
  const auto inst = h::build_instance(h::parse_config(j));
  EXPECT_GT(inst.safety.Cn, 0.0);
}

TEST(Instance, BoxQuadraticOptimum) {
  const auto inst = h::build_instance(h::parse_config(base_config()));
  EXPECT_NEAR(inst.f_star, 0.5, 1e-15);
  EXPECT_EQ(inst.x_star, (Vector{{1.0, 0.5}}));
  EXPECT_NEAR(inst.geometry.eps0, 1.0, 1e-15);
  EXPECT_NEAR(inst.safety.Cn, 96.0, 1e-12);
  EXPECT_NEAR(inst.guard_radius, 10.0 * std::sqrt(2.0), 1e-12);
}

TEST(Instance, ExplicitPolytope) {
  auto j = base_config();
  j["problem"] = json::parse(R"({"type": "explicit",
      "A": [[1, 0], [0, 1], [-1, 0], [0, -1], [1, 1]],
      "b": [1, 1, 1, 1, 1.5], "x_prime": [2, 0.5]})");
  const auto inst = h::build_instance(h::parse_config(j));
  // Projection of (2, 0.5) onto the square cut by x + y <= 1.5 is (1, 0.5).
  EXPECT_LE((inst.x_star - Vector{{1.0, 0.5}}).norm(), 1e-9);
  j["problem"]["A"] = json::parse("[[1, 0]]");
  j["problem"]["b"] = json::parse("[1]");
  EXPECT_THROW(h::build_instance(h::parse_config(j)), safefw::ConfigError);
}

TEST(Experiment, CurvesStartAtOneAndSeedsAreSequential) {
  const auto cfg = h::parse_config(base_config());
  const auto summary = h::run_experiment(cfg);
  ASSERT_EQ(summary.runs.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(summary.runs[i].seed, 1000u + i);
    EXPECT_FALSE(summary.runs[i].failed) << summary.runs[i].error;
    EXPECT_EQ(summary.runs[i].normalized.front(), 1.0);
    EXPECT_EQ(summary.runs[i].iterate_violations, 0);
  }
  EXPECT_EQ(summary.mean_curve.front(), 1.0);
  EXPECT_EQ(summary.mean_curve.size(), 16u);
  EXPECT_EQ(h::exit_code_for(summary), 0);
}

TEST(Experiment, SeedDeterminismGivesIdenticalCsv) {
  const auto cfg = h::parse_config(base_config());
  const auto inst = h::build_instance(cfg);
  const fs::path a = scratch_dir("det_a");
  const fs::path b = scratch_dir("det_b");
  h::export_experiment(a, h::run_experiment(cfg, inst), inst, cfg);
  h::export_experiment(b, h::run_experiment(cfg, inst), inst, cfg);
  for (int i = 0; i < 3; ++i) {
    const std::string name = "adaptive_seed" + std::to_string(1000 + i) + ".csv";
    EXPECT_EQ(slurp(a / name), slurp(b / name));
  }
}

TEST(Experiment, ThreadCountDoesNotChangeResults) {
  auto j = base_config();
  const auto serial = h::run_experiment(h::parse_config(j));
  j["threads"] = 3;
  const auto parallel = h::run_experiment(h::parse_config(j));
  ASSERT_EQ(serial.runs.size(), parallel.runs.size());
  for (std::size_t i = 0; i < serial.runs.size(); ++i) {
    EXPECT_EQ(serial.runs[i].normalized, parallel.runs[i].normalized);
    EXPECT_EQ(serial.runs[i].N_T, parallel.runs[i].N_T);
  }
  EXPECT_EQ(serial.mean_curve, parallel.mean_curve);
}

TEST(Experiment, ZeroNoiseRerunIsBitIdentical) {
  auto j = base_config();
  j["noise"]["sigma"] = 0.0;
  j["repetitions"] = 1;
  const auto a = h::run_experiment(h::parse_config(j));
  const auto b = h::run_experiment(h::parse_config(j));
  EXPECT_EQ(a.runs[0].normalized, b.runs[0].normalized);
}

TEST(Experiment, OracleVariantIsClassicalFrankWolfe) {
  auto j = base_config();
  j["variant"] = "fw-oracle";
  j["repetitions"] = 1;
  const auto cfg = h::parse_config(j);
  const auto inst = h::build_instance(cfg);
  const auto s = h::run_experiment(cfg, inst);
  const auto ref = safefw::run_classical_fw(inst.objective, inst.truth, inst.x0, 15);
  ASSERT_EQ(s.runs[0].trajectory.iterations.size(), ref.iterations.size());
  EXPECT_EQ(s.runs[0].trajectory.iterations.back().x, ref.iterations.back().x);
  EXPECT_EQ(s.runs[0].N_T, 0);
}

TEST(Experiment, ExitCodePolicy) {
  h::RunSummary s;
  s.runs.resize(10);
  s.failed_runs = 1;
  EXPECT_EQ(h::exit_code_for(s), 0);
  s.failed_runs = 2;
  EXPECT_EQ(h::exit_code_for(s), 2);
}

TEST(Export, CsvRoundTripAndAggregate) {
  const auto cfg = h::parse_config(base_config());
  const auto inst = h::build_instance(cfg);
  const auto summary = h::run_experiment(cfg, inst);
  const fs::path dir = scratch_dir("roundtrip");
  h::export_experiment(dir, summary, inst, cfg);

  std::vector<double> mean(16, 0.0);
  for (const auto& run : summary.runs) {
    const auto rows = h::read_trajectory_csv(dir / ("adaptive_seed" + std::to_string(run.seed) +
                                                    ".csv"));
    ASSERT_EQ(rows.size(), run.trajectory.iterations.size());
    for (std::size_t t = 0; t < rows.size(); ++t) {
      const auto& it = run.trajectory.iterations[t];
      EXPECT_EQ(rows[t].size(), h::kTrajectoryColumns.size());
      EXPECT_EQ(rows[t].at("t"), it.t);
      EXPECT_EQ(rows[t].at("f_gap"), it.f_value - inst.f_star);
      EXPECT_EQ(rows[t].at("normalized_gap"), run.normalized[t]);
      EXPECT_EQ(rows[t].at("ghat"), it.gap);
      EXPECT_EQ(rows[t].at("et_bound"), it.et_bound);
      EXPECT_EQ(rows[t].at("n_t"), it.n_t);
      EXPECT_EQ(rows[t].at("N_t"), it.N_t);
      EXPECT_EQ(rows[t].at("fact2_lhs"), it.fact2_lhs);
      EXPECT_EQ(rows[t].at("min_margin"), it.min_margin);
      EXPECT_EQ(rows[t].at("safe_flag"), it.safe ? 1.0 : 0.0);
      EXPECT_EQ(rows[t].at("feasible_flag"), 1.0);
      mean[t] += rows[t].at("normalized_gap") / 3.0;
    }
  }
  for (std::size_t t = 0; t < 16; ++t) EXPECT_NEAR(mean[t], summary.mean_curve[t], 1e-12);

  const json js = json::parse(slurp(dir / "summary.json"));
  EXPECT_EQ(js.at("runs").size(), 3u);
  EXPECT_EQ(js.at("config"), cfg.raw);
  const auto curve = js.at("aggregate").at("mean_curve").get<std::vector<double>>();
  for (std::size_t t = 0; t < 16; ++t) EXPECT_NEAR(curve[t], summary.mean_curve[t], 1e-12);
}

TEST(Export, EmptyTrajectoryIsHeaderOnly) {
  const auto cfg = h::parse_config(base_config());
  const auto inst = h::build_instance(cfg);
  h::RunResult empty;
  const fs::path dir = scratch_dir("empty");
  h::write_trajectory_csv(dir / "e.csv", empty, inst);
  EXPECT_EQ(slurp(dir / "e.csv"),
            "t,f_gap,normalized_gap,ghat,et_bound,n_t,N_t,fact2_lhs,min_margin,safe_flag,"
            "feasible_flag\n");
  EXPECT_TRUE(h::read_trajectory_csv(dir / "e.csv").empty());
}

TEST(Export, UnwritablePathReportsContext) {
  const auto cfg = h::parse_config(base_config());
  const auto inst = h::build_instance(cfg);
  try {
    h::write_trajectory_csv("/nonexistent_dir/x.csv", h::RunResult{}, inst);
    ADD_FAILURE();
  } catch (const safefw::Error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent_dir/x.csv"), std::string::npos);
  }
}

TEST(Compare, ZeroNoiseTiesEverySeed) {
  auto j = base_config();
  j["noise"]["sigma"] = 0.0;
  j["ro"] = {{"total_measurements", "match"}};
  const auto report = h::compare_sfw_ro(h::parse_config(j));
  ASSERT_EQ(report.pairs.size(), 3u);
  for (const auto& p : report.pairs) {
    EXPECT_NEAR(p.sfw_final, p.ro_final, 1e-9);
    EXPECT_EQ(p.sfw_N_T, p.ro_N_T);
  }
  EXPECT_EQ(report.sfw_not_worse, 3);
}

TEST(Compare, LargerRoBudgetNarrowsTheGap) {
  auto j = base_config();
  j["noise"]["sigma"] = 0.1;
  j["repetitions"] = 5;
  j["ro"] = {{"total_measurements", "match"}};
  const auto matched = h::compare_sfw_ro(h::parse_config(j));
  long mean_budget = 0;
  for (const auto& p : matched.pairs) mean_budget += p.sfw_N_T;
  mean_budget /= 5;
  j["ro"]["total_measurements"] = 10 * mean_budget;
  const auto generous = h::compare_sfw_ro(h::parse_config(j));
  EXPECT_LE(generous.ro.mean_curve.back(), matched.ro.mean_curve.back());
}

}  // namespace
