#include "safefw/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "safefw/error.hpp"

namespace safefw::harness {

using nlohmann::json;

const char* to_string(Variant v) {
  switch (v) {
    case Variant::prescribed:
      return "prescribed";
    case Variant::adaptive:
      return "adaptive";
    case Variant::ro:
      return "ro";
    case Variant::fw_oracle:
      return "fw-oracle";
  }
  return "unknown";
}

namespace {

[[noreturn]] void config_fail(const std::string& field, const std::string& why) {
  throw ConfigError("config field '" + field + "': " + why);
}

Vector to_vector(const json& j, const std::string& field) {
  if (!j.is_array()) config_fail(field, "expected an array of numbers");
  Vector v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) config_fail(field, "expected an array of numbers");
    v(static_cast<int>(i)) = j[i].get<double>();
  }
  return v;
}

Matrix to_matrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) config_fail(field, "expected a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) config_fail(field, "rows must be non-empty arrays");
  Matrix A(static_cast<int>(j.size()), static_cast<int>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) config_fail(field, "ragged rows");
    A.row(static_cast<int>(i)) = to_vector(j[i], field).transpose();
  }
  return A;
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) config_fail(field, "expected a number");
  return j.get<double>();
}

long integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) config_fail(field, "expected an integer");
  return j.get<long>();
}

Variant parse_variant(const std::string& s) {
  if (s == "prescribed") return Variant::prescribed;
  if (s == "adaptive") return Variant::adaptive;
  if (s == "ro") return Variant::ro;
  if (s == "fw-oracle") return Variant::fw_oracle;
  config_fail("variant", "unknown variant '" + s + "'");
}

Vector default_target(int d) {
  Vector x = Vector::Constant(d, 0.5);
  x(0) = 2.0;
  return x;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  cfg.raw = j;
  try {
    if (!j.contains("problem")) config_fail("problem", "missing");
    const json& p = j.at("problem");
    cfg.problem.type = p.value("type", std::string("box"));
    if (cfg.problem.type == "box") {
      cfg.problem.d = static_cast<int>(integer(p.at("d"), "problem.d"));
      if (cfg.problem.d < 1) config_fail("problem.d", "must be >= 1");
      if (p.contains("half_width")) {
        cfg.problem.half_width = number(p.at("half_width"), "problem.half_width");
        if (!(cfg.problem.half_width > 0.0)) config_fail("problem.half_width", "must be > 0");
      }
    } else if (cfg.problem.type == "explicit") {
      cfg.problem.A = to_matrix(p.at("A"), "problem.A");
      cfg.problem.b = to_vector(p.at("b"), "problem.b");
      if (cfg.problem.A.rows() != cfg.problem.b.size()) {
        config_fail("problem.b", "length must equal the number of rows of A");
      }
      cfg.problem.d = static_cast<int>(cfg.problem.A.cols());
    } else {
      config_fail("problem.type", "must be 'box' or 'explicit'");
    }
    cfg.problem.x_prime = p.contains("x_prime") ? to_vector(p.at("x_prime"), "problem.x_prime")
                                                : default_target(cfg.problem.d);
    if (cfg.problem.x_prime.size() != cfg.problem.d) {
      config_fail("problem.x_prime", "dimension mismatch");
    }

    if (j.contains("x0")) {
      cfg.x0 = to_vector(j.at("x0"), "x0");
      if (cfg.x0->size() != cfg.problem.d) config_fail("x0", "dimension mismatch");
    }

    if (j.contains("noise")) {
      const json& n = j.at("noise");
      const std::string kind = n.value("kind", std::string("gaussian"));
      if (kind == "gaussian") {
        cfg.noise_kind = NoiseKind::gaussian;
      } else if (kind == "bounded-uniform") {
        cfg.noise_kind = NoiseKind::bounded_uniform;
      } else {
        config_fail("noise.kind", "must be 'gaussian' or 'bounded-uniform'");
      }
      if (n.contains("sigma")) cfg.sigma = number(n.at("sigma"), "noise.sigma");
    }
    if (cfg.sigma < 0.0) config_fail("noise.sigma", "must be >= 0");

    if (j.contains("omega0")) cfg.omega0 = number(j.at("omega0"), "omega0");
    if (!(cfg.omega0 > 0.0)) config_fail("omega0", "must be > 0");
    if (j.contains("delta")) cfg.delta = number(j.at("delta"), "delta");
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) config_fail("delta", "must lie in (0, 1)");
    if (j.contains("T")) cfg.T = static_cast<int>(integer(j.at("T"), "T"));
    if (cfg.T < 3) config_fail("T", "must be >= 3");
    if (j.contains("epsilon")) cfg.epsilon = number(j.at("epsilon"), "epsilon");
    if (!(cfg.epsilon > 0.0)) config_fail("epsilon", "must be > 0");

    if (j.contains("confidence")) {
      const json& c = j.at("confidence");
      const std::string mode = c.value("mode", std::string("chisq"));
      if (mode == "chisq") {
        cfg.confidence_mode = ConfidenceMode::chisq;
      } else if (mode == "subgaussian") {
        cfg.confidence_mode = ConfidenceMode::subgaussian;
      } else {
        config_fail("confidence.mode", "must be 'chisq' or 'subgaussian'");
      }
      if (c.contains("phi_inverse") && !c.at("phi_inverse").is_null()) {
        cfg.phi_inverse = number(c.at("phi_inverse"), "confidence.phi_inverse");
        if (*cfg.phi_inverse < 0.0) config_fail("confidence.phi_inverse", "must be >= 0");
      }
      if (c.contains("phi_delta") && !c.at("phi_delta").is_null()) {
        cfg.phi_delta = number(c.at("phi_delta"), "confidence.phi_delta");
        if (*cfg.phi_delta < 0.0) config_fail("confidence.phi_delta", "must be >= 0");
      }
    }

    if (j.contains("Cn")) {
      const json& c = j.at("Cn");
      if (c.is_number()) {
        cfg.cn_value = c.get<double>();
        if (!(*cfg.cn_value > 0.0)) config_fail("Cn", "must be > 0");
      } else if (c.is_string()) {
        if (c.get<std::string>() != "auto") config_fail("Cn", "string value must be 'auto'");
      } else if (c.is_object() && c.contains("times_d_squared")) {
        cfg.cn_times_d_squared = number(c.at("times_d_squared"), "Cn.times_d_squared");
        if (!(*cfg.cn_times_d_squared > 0.0)) config_fail("Cn.times_d_squared", "must be > 0");
      } else {
        config_fail("Cn", "expected a number, \"auto\" or {\"times_d_squared\": k}");
      }
    }

    if (j.contains("variant")) {
      if (!j.at("variant").is_string()) config_fail("variant", "expected a string");
      cfg.variant = parse_variant(j.at("variant").get<std::string>());
    }
    if (j.contains("max_total_measurements")) {
      cfg.max_total_measurements = integer(j.at("max_total_measurements"),
                                           "max_total_measurements");
      if (cfg.max_total_measurements < 1) config_fail("max_total_measurements", "must be >= 1");
    }

    if (j.contains("ro")) {
      const json& r = j.at("ro");
      if (r.contains("total_measurements")) {
        const json& tm = r.at("total_measurements");
        if (tm.is_string()) {
          if (tm.get<std::string>() != "match") {
            config_fail("ro.total_measurements", "string value must be 'match'");
          }
        } else {
          cfg.ro_total_measurements = integer(tm, "ro.total_measurements");
          if (*cfg.ro_total_measurements < 2L * (cfg.problem.d + 1)) {
            config_fail("ro.total_measurements", "must be >= 2(d+1)");
          }
        }
      }
      if (r.contains("measurement_site")) {
        cfg.ro_site = to_vector(r.at("measurement_site"), "ro.measurement_site");
        if (cfg.ro_site->size() != cfg.problem.d) {
          config_fail("ro.measurement_site", "dimension mismatch");
        }
      }
    }
    if (cfg.variant == Variant::ro && !cfg.ro_total_measurements) {
      config_fail("ro.total_measurements", "required for variant 'ro'");
    }

    if (j.contains("repetitions")) cfg.repetitions = static_cast<int>(integer(j.at("repetitions"), "repetitions"));
    if (cfg.repetitions < 1) config_fail("repetitions", "must be >= 1");
    if (j.contains("base_seed")) {
      if (!j.at("base_seed").is_number_unsigned() && !j.at("base_seed").is_number_integer()) {
        config_fail("base_seed", "expected a non-negative integer");
      }
      cfg.base_seed = j.at("base_seed").get<std::uint64_t>();
    }
    if (j.contains("threads")) cfg.threads = static_cast<int>(integer(j.at("threads"), "threads"));
    if (cfg.threads < 1) config_fail("threads", "must be >= 1");
    if (j.contains("output")) {
      const json& o = j.at("output");
      if (o.contains("dir")) {
        if (!o.at("dir").is_string()) config_fail("output.dir", "expected a string");
        cfg.output_dir = o.at("dir").get<std::string>();
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

Instance build_instance(const ExperimentConfig& cfg) {
  Instance inst;
  const int d = cfg.problem.d;
  const Vector& target = cfg.problem.x_prime;
  GeometryOverrides overrides;
  double M = 0.0;
  if (cfg.problem.type == "box") {
    const double hw = cfg.problem.half_width;
    inst.truth = Polytope::box(d, hw);
    overrides = GeometryOverrides::box(d, hw);
    M = std::sqrt((target.cwiseAbs().array() + hw).square().sum());
    inst.x_star = target.cwiseMax(-hw).cwiseMin(hw);
  } else {
    inst.truth = Polytope{cfg.problem.A, cfg.problem.b};
    const ValidationReport report = validate(inst.truth);
    if (!report.bounded) throw ConfigError("problem: feasible set is unbounded");
    if (!report.interior_point) throw ConfigError("problem: feasible set has empty interior");
    M = max_vertex_distance(polytope_vertices(inst.truth), target);
    inst.x_star = project_onto_polytope(inst.truth, target);
  }
  inst.objective = quadratic_objective(target, M);
  inst.f_star = inst.objective.value(inst.x_star);
  inst.x0 = cfg.x0.value_or(Vector::Zero(d));
  try {
    inst.geometry = geometry_constants(inst.truth, inst.objective, inst.x0, overrides);
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("x0/problem: ") + e.what());
  }
  inst.guard_radius = 10.0 * inst.geometry.Gamma0;

  SafetyConfig& s = inst.safety;
  s.delta = cfg.delta;
  s.T = cfg.T;
  s.omega0 = cfg.omega0;
  s.sigma = cfg.sigma;
  s.d = d;
  s.m = inst.truth.num_constraints();
  s.mode = cfg.confidence_mode;
  s.phi_inverse_override = cfg.phi_inverse;
  s.phi_delta_override = cfg.phi_delta;
  s.schedule = cfg.variant == Variant::prescribed ? Schedule::prescribed : Schedule::adaptive;
  if (cfg.cn_value) {
    s.Cn = *cfg.cn_value;
  } else if (cfg.cn_times_d_squared) {
    s.Cn = *cfg.cn_times_d_squared * d * d;
  } else {
    if (cfg.confidence_mode == ConfidenceMode::subgaussian && !cfg.phi_inverse &&
        !cfg.phi_delta) {
      throw ConfigError(
          "Cn: 'auto' needs a sample-size-free radius (chisq mode or a phi override)");
    }
    s.Cn = cn_lower_bound(inst.geometry, s.phi_delta(1), s.omega0, d, cfg.T);
  }
  return inst;
}

namespace {

std::vector<double> normalized_curve(const TrajectoryRecord& traj, const Instance& inst) {
  std::vector<double> out;
  const double h0 = inst.objective.value(inst.x0) - inst.f_star;
  for (const auto& it : traj.iterations) {
    out.push_back((it.f_value - inst.f_star) / h0);
  }
  if (!out.empty()) out.front() = 1.0;
  return out;
}

}  // namespace

RunResult run_single(const ExperimentConfig& cfg, const Instance& inst, Variant variant,
                     std::uint64_t seed, std::optional<long> ro_budget) {
  RunResult res;
  res.seed = seed;
  res.variant = variant;
  const auto start = std::chrono::steady_clock::now();
  try {
    ConstraintOracle oracle(inst.truth, NoiseModel{cfg.noise_kind, cfg.sigma, seed}, cfg.omega0);
    const Matrix beta_true = oracle.true_parameters();
    const SafetyConfig& safety = inst.safety;
    IterationObserver observer = [&](IterationRecord& it, const EstimatorState& state) {
      it.feasible = inst.truth.contains(it.x);
      if (cfg.sigma > 0.0 && state.spans()) {
        const auto inside =
            confidence_membership(state, cfg.sigma, safety.phi_inverse_at(state.count()),
                                  beta_true);
        it.covered = std::all_of(inside.begin(), inside.end(), [](bool b) { return b; });
      } else {
        it.covered = true;
      }
    };

    switch (variant) {
      case Variant::prescribed:
      case Variant::adaptive: {
        SfwConfig sc;
        sc.epsilon = cfg.epsilon;
        sc.T = cfg.T;
        sc.variant = variant == Variant::prescribed ? SfwVariant::prescribed
                                                    : SfwVariant::adaptive;
        sc.max_total_measurements = cfg.max_total_measurements;
        sc.guard_radius = inst.guard_radius;
        sc.geometry = inst.geometry;
        sc.observer = observer;
        res.trajectory = run_sfw(inst.objective, oracle, safety, sc, inst.x0);
        break;
      }
      case Variant::ro: {
        RoConfig rc;
        rc.total_measurements = ro_budget.value_or(cfg.ro_total_measurements.value_or(0));
        rc.T = cfg.T;
        rc.measurement_site = cfg.ro_site;
        rc.guard_radius = inst.guard_radius;
        res.trajectory = ro_run(inst.objective, oracle, safety, rc, inst.x0, observer);
        break;
      }
      case Variant::fw_oracle: {
        res.trajectory = run_classical_fw(inst.objective, inst.truth, inst.x0, cfg.T);
        for (auto& it : res.trajectory.iterations) {
          it.feasible = inst.truth.contains(it.x);
          it.covered = true;
        }
        break;
      }
    }
    res.normalized = normalized_curve(res.trajectory, inst);
    for (const auto& it : res.trajectory.iterations) {
      if (it.feasible && !*it.feasible) ++res.iterate_violations;
      if (it.covered && !*it.covered) ++res.coverage_failures;
    }
    res.probe_violations = res.trajectory.out_of_reach_probes;
    res.N_T = res.trajectory.total_measurements;
    if (res.trajectory.status == RunStatus::failed) {
      res.failed = true;
      res.error = res.trajectory.message;
    }
  } catch (const std::exception& e) {
    res.failed = true;
    res.error = e.what();
  }
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

void aggregate(RunSummary& summary, int T) {
  const std::size_t len = static_cast<std::size_t>(T) + 1;
  summary.mean_curve.assign(len, 0.0);
  summary.std_curve.assign(len, 0.0);
  summary.failed_runs = 0;
  summary.runs_with_violation = 0;
  double n_total = 0.0;
  std::vector<const RunResult*> ok;
  for (const auto& r : summary.runs) {
    if (r.failed) {
      ++summary.failed_runs;
      continue;
    }
    if (r.iterate_violations > 0) ++summary.runs_with_violation;
    ok.push_back(&r);
    n_total += static_cast<double>(r.N_T);
  }
  summary.violation_rate =
      summary.runs.empty() ? 0.0
                           : static_cast<double>(summary.runs_with_violation) /
                                 static_cast<double>(summary.runs.size());
  if (ok.empty()) return;
  summary.mean_N_T = n_total / static_cast<double>(ok.size());
  auto value_at = [](const RunResult& r, std::size_t t) {
    if (r.normalized.empty()) return 1.0;
    return t < r.normalized.size() ? r.normalized[t] : r.normalized.back();
  };
  for (std::size_t t = 0; t < len; ++t) {
    double sum = 0.0;
    for (const auto* r : ok) sum += value_at(*r, t);
    const double mean = sum / static_cast<double>(ok.size());
    double var = 0.0;
    for (const auto* r : ok) var += (value_at(*r, t) - mean) * (value_at(*r, t) - mean);
    summary.mean_curve[t] = mean;
    summary.std_curve[t] = ok.size() > 1 ? std::sqrt(var / static_cast<double>(ok.size() - 1))
                                         : 0.0;
  }
}

namespace {

std::vector<RunResult> run_many(const ExperimentConfig& cfg, const Instance& inst,
                                Variant variant,
                                const std::vector<std::optional<long>>& ro_budgets) {
  const int reps = cfg.repetitions;
  std::vector<RunResult> runs(reps);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < reps; i = next++) {
      runs[i] = run_single(cfg, inst, variant, cfg.base_seed + static_cast<std::uint64_t>(i),
                           ro_budgets.empty() ? std::nullopt : ro_budgets[i]);
    }
  };
  const int threads = std::min(cfg.threads, reps);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return runs;
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& cfg, const Instance& inst) {
  RunSummary summary;
  summary.variant = cfg.variant;
  summary.runs = run_many(cfg, inst, cfg.variant, {});
  aggregate(summary, cfg.T);
  return summary;
}

RunSummary run_experiment(const ExperimentConfig& cfg) {
  return run_experiment(cfg, build_instance(cfg));
}

CompareReport compare_sfw_ro(const ExperimentConfig& cfg) {
  const Instance inst = build_instance(cfg);
  CompareReport report;
  report.sfw.variant = Variant::adaptive;
  report.sfw.runs = run_many(cfg, inst, Variant::adaptive, {});
  aggregate(report.sfw, cfg.T);

  std::vector<std::optional<long>> budgets(cfg.repetitions);
  for (int i = 0; i < cfg.repetitions; ++i) {
    budgets[i] = cfg.ro_total_measurements
                     ? *cfg.ro_total_measurements
                     : std::max<long>(report.sfw.runs[i].N_T, 2L * (cfg.problem.d + 1));
  }
  report.ro.variant = Variant::ro;
  report.ro.runs = run_many(cfg, inst, Variant::ro, budgets);
  aggregate(report.ro, cfg.T);

  for (int i = 0; i < cfg.repetitions; ++i) {
    const RunResult& s = report.sfw.runs[i];
    const RunResult& r = report.ro.runs[i];
    ComparePair pair;
    pair.seed = s.seed;
    pair.sfw_final = s.failed ? std::numeric_limits<double>::infinity() : s.final_normalized();
    pair.ro_final = r.failed ? std::numeric_limits<double>::infinity() : r.final_normalized();
    pair.sfw_N_T = s.N_T;
    pair.ro_N_T = r.N_T;
    const double tol = 1e-12 * std::max(1.0, std::abs(pair.ro_final));
    if (!s.failed && pair.sfw_final <= pair.ro_final + tol) ++report.sfw_not_worse;
    report.pairs.push_back(pair);
  }
  report.fraction_sfw_not_worse =
      static_cast<double>(report.sfw_not_worse) / static_cast<double>(cfg.repetitions);
  return report;
}

int exit_code_for(const RunSummary& summary) {
  if (summary.runs.empty()) return 0;
  return static_cast<double>(summary.failed_runs) > 0.1 * static_cast<double>(summary.runs.size())
             ? 2
             : 0;
}

const std::vector<std::string> kTrajectoryColumns = {
    "t",      "f_gap", "normalized_gap", "ghat",       "et_bound",  "n_t",
    "N_t",    "fact2_lhs", "min_margin", "safe_flag", "feasible_flag"};

namespace {

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  return std::stod(s);
}

json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  return fmt_double(v);
}

}  // namespace

void write_trajectory_csv(const std::filesystem::path& path, const RunResult& run,
                          const Instance& inst) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write trajectory CSV " + path.string());
  for (std::size_t k = 0; k < kTrajectoryColumns.size(); ++k) {
    out << (k ? "," : "") << kTrajectoryColumns[k];
  }
  out << '\n';
  const auto& its = run.trajectory.iterations;
  for (std::size_t k = 0; k < its.size(); ++k) {
    const auto& it = its[k];
    const double normalized = k < run.normalized.size() ? run.normalized[k]
                                                        : std::numeric_limits<double>::quiet_NaN();
    out << it.t << ',' << fmt_double(it.f_value - inst.f_star) << ',' << fmt_double(normalized)
        << ',' << fmt_double(it.gap) << ',' << fmt_double(it.et_bound) << ',' << it.n_t << ','
        << it.N_t << ',' << fmt_double(it.fact2_lhs) << ',' << fmt_double(it.min_margin) << ','
        << (it.safe ? 1 : 0) << ',' << (it.feasible.value_or(true) ? 1 : 0) << '\n';
  }
  if (!out) throw Error("I/O error while writing " + path.string());
}

std::vector<std::map<std::string, double>> read_trajectory_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read trajectory CSV " + path.string());
  std::string line;
  std::vector<std::string> header;
  if (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::vector<std::map<std::string, double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::map<std::string, double> row;
    for (std::size_t k = 0; std::getline(ss, cell, ','); ++k) {
      if (k >= header.size()) throw Error("malformed CSV row in " + path.string());
      row[header[k]] = parse_double(cell);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json summary_to_json(const RunSummary& summary, const ExperimentConfig& cfg) {
  json j;
  j["config"] = cfg.raw;
  j["variant"] = to_string(summary.variant);
  json runs = json::array();
  for (const auto& r : summary.runs) {
    json jr;
    jr["seed"] = r.seed;
    jr["status"] = to_string(r.trajectory.status);
    jr["failed"] = r.failed;
    if (!r.error.empty()) jr["error"] = r.error;
    if (!r.trajectory.message.empty()) jr["message"] = r.trajectory.message;
    jr["N_T"] = r.N_T;
    jr["iterate_violations"] = r.iterate_violations;
    jr["probe_violations"] = r.probe_violations;
    jr["coverage_failures"] = r.coverage_failures;
    jr["final_normalized_gap"] = finite_or_string(r.final_normalized());
    jr["normalized_curve"] = r.normalized;
    jr["wall_seconds"] = r.wall_seconds;
    runs.push_back(jr);
  }
  j["runs"] = runs;
  json agg;
  agg["mean_curve"] = summary.mean_curve;
  agg["std_curve"] = summary.std_curve;
  agg["mean_N_T"] = summary.mean_N_T;
  agg["failed_runs"] = summary.failed_runs;
  agg["runs_with_violation"] = summary.runs_with_violation;
  agg["violation_rate"] = summary.violation_rate;
  j["aggregate"] = agg;
  return j;
}

nlohmann::json compare_to_json(const CompareReport& report, const ExperimentConfig& cfg) {
  json j;
  j["config"] = cfg.raw;
  json pairs = json::array();
  for (const auto& p : report.pairs) {
    pairs.push_back({{"seed", p.seed},
                     {"sfw_final", finite_or_string(p.sfw_final)},
                     {"ro_final", finite_or_string(p.ro_final)},
                     {"sfw_N_T", p.sfw_N_T},
                     {"ro_N_T", p.ro_N_T}});
  }
  j["pairs"] = pairs;
  j["sfw_not_worse"] = report.sfw_not_worse;
  j["fraction_sfw_not_worse"] = report.fraction_sfw_not_worse;
  j["sfw"] = summary_to_json(report.sfw, cfg)["aggregate"];
  j["ro"] = summary_to_json(report.ro, cfg)["aggregate"];
  return j;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write JSON " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error("I/O error while writing " + path.string());
}

void export_experiment(const std::filesystem::path& dir, const RunSummary& summary,
                       const Instance& inst, const ExperimentConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  for (const auto& r : summary.runs) {
    const std::string name = std::string(to_string(r.variant)) + "_seed" +
                             std::to_string(r.seed) + ".csv";
    write_trajectory_csv(dir / name, r, inst);
  }
  write_json(dir / "summary.json", summary_to_json(summary, cfg));
}

}  // namespace safefw::harness
