#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "safefw/frank_wolfe.hpp"
#include "safefw/oracle.hpp"
#include "safefw/problem.hpp"
#include "safefw/robust.hpp"
#include "safefw/safety.hpp"

namespace safefw::harness {

enum class Variant { prescribed, adaptive, ro, fw_oracle };

const char* to_string(Variant v);

struct ProblemSpec {
  std::string type = "box";  // "box" or "explicit"
  int d = 2;
  double half_width = 1.0;
  Matrix A;
  Vector b;
  Vector x_prime;
};

struct ExperimentConfig {
  ProblemSpec problem;
  std::optional<Vector> x0;
  NoiseKind noise_kind = NoiseKind::gaussian;
  double sigma = 0.01;
  double omega0 = 0.01;
  double delta = 0.1;
  int T = 15;
  double epsilon = 1e-6;
  ConfidenceMode confidence_mode = ConfidenceMode::chisq;
  std::optional<double> phi_inverse;
  std::optional<double> phi_delta;
  /// Exactly one of these describes C_n; all empty means "auto".
  std::optional<double> cn_value;
  std::optional<double> cn_times_d_squared;
  Variant variant = Variant::adaptive;
  long max_total_measurements = 100'000'000;
  /// Empty: match the SFW run's realised total (compare only).
  std::optional<long> ro_total_measurements;
  std::optional<Vector> ro_site;
  int repetitions = 1;
  std::uint64_t base_seed = 1;
  int threads = 1;
  std::string output_dir;
  nlohmann::json raw;
};

/// Throws ConfigError naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Everything derived from the configuration that is shared by all
/// repetitions. Immutable once built.
struct Instance {
  Polytope truth;
  Objective objective;
  Vector x0;
  Vector x_star;
  double f_star = 0.0;
  GeometryConstants geometry;
  SafetyConfig safety;
  double guard_radius = 0.0;
};

Instance build_instance(const ExperimentConfig& cfg);

struct RunResult {
  std::uint64_t seed = 0;
  Variant variant = Variant::adaptive;
  TrajectoryRecord trajectory;
  std::vector<double> normalized;  // (f(x_t) - f*) / (f(x0) - f*)
  int iterate_violations = 0;
  int coverage_failures = 0;
  long probe_violations = 0;
  long N_T = 0;
  double wall_seconds = 0.0;
  bool failed = false;
  std::string error;

  double final_normalized() const { return normalized.empty() ? 1.0 : normalized.back(); }
};

struct RunSummary {
  Variant variant = Variant::adaptive;
  std::vector<RunResult> runs;
  std::vector<double> mean_curve;
  std::vector<double> std_curve;
  double mean_N_T = 0.0;
  int failed_runs = 0;
  int runs_with_violation = 0;
  double violation_rate = 0.0;
};

/// One repetition. `ro_budget` overrides the configured RO budget.
RunResult run_single(const ExperimentConfig& cfg, const Instance& instance, Variant variant,
                     std::uint64_t seed, std::optional<long> ro_budget = std::nullopt);

/// `repetitions` runs with seeds base_seed + i, aggregated in seed order.
RunSummary run_experiment(const ExperimentConfig& cfg, const Instance& instance);
RunSummary run_experiment(const ExperimentConfig& cfg);

/// Mean and standard deviation curves over non-failed runs; shorter
/// trajectories are padded with their last value.
void aggregate(RunSummary& summary, int T);

struct ComparePair {
  std::uint64_t seed = 0;
  double sfw_final = 0.0;
  double ro_final = 0.0;
  long sfw_N_T = 0;
  long ro_N_T = 0;
};

struct CompareReport {
  std::vector<ComparePair> pairs;
  RunSummary sfw;
  RunSummary ro;
  int sfw_not_worse = 0;
  double fraction_sfw_not_worse = 0.0;
};

/// Adaptive SFW and RO on matched seeds and matched measurement budgets.
CompareReport compare_sfw_ro(const ExperimentConfig& cfg);

/// Exit code policy: 2 when more than 10% of runs failed, else 0.
int exit_code_for(const RunSummary& summary);

extern const std::vector<std::string> kTrajectoryColumns;

void write_trajectory_csv(const std::filesystem::path& path, const RunResult& run,
                          const Instance& instance);
/// Rows of a trajectory CSV keyed by column name.
std::vector<std::map<std::string, double>> read_trajectory_csv(const std::filesystem::path& path);

nlohmann::json summary_to_json(const RunSummary& summary, const ExperimentConfig& cfg);
nlohmann::json compare_to_json(const CompareReport& report, const ExperimentConfig& cfg);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Per-run CSVs plus summary.json under `dir`.
void export_experiment(const std::filesystem::path& dir, const RunSummary& summary,
                       const Instance& instance, const ExperimentConfig& cfg);

}  // namespace safefw::harness
