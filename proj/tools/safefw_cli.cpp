// Command-line front end for the experiment harness.
//
//   safefw run             --config cfg.json [--seed N] [--out DIR] [--reps N]
//   safefw compare         --config cfg.json [--seed N] [--out DIR] [--reps N]
//   safefw validate-config --config cfg.json
//
// Exit codes: 0 success, 1 configuration error, 2 too many failed runs.

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "safefw/error.hpp"
#include "safefw/harness.hpp"

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool run_flags) {
  cmd->add_option("--config", opts.config, "Experiment configuration (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  if (!run_flags) return;
  cmd->add_option("--seed", opts.seed, "Base seed (overrides base_seed)");
  cmd->add_option("--reps", opts.reps, "Number of repetitions")->check(CLI::PositiveNumber);
  cmd->add_option("--out", opts.out, "Output directory (overrides output.dir)");
}

safefw::harness::ExperimentConfig load(const CommonOptions& opts) {
  auto cfg = safefw::harness::load_config(opts.config);
  if (opts.seed) {
    cfg.base_seed = *opts.seed;
    cfg.raw["base_seed"] = *opts.seed;
  }
  if (opts.reps) {
    cfg.repetitions = *opts.reps;
    cfg.raw["repetitions"] = *opts.reps;
  }
  if (!opts.out.empty()) cfg.output_dir = opts.out;
  return cfg;
}

void print_summary(const safefw::harness::RunSummary& s) {
  std::cout << "variant " << safefw::harness::to_string(s.variant) << ": " << s.runs.size()
            << " runs, " << s.failed_runs << " failed, " << s.runs_with_violation
            << " with an infeasible iterate, mean N_T " << std::fixed << std::setprecision(1)
            << s.mean_N_T << "\n";
  if (!s.mean_curve.empty()) {
    std::cout << "mean normalized gap at T: " << std::scientific << std::setprecision(4)
              << s.mean_curve.back() << " (std " << s.std_curve.back() << ")\n";
  }
  std::cout.unsetf(std::ios::floatfield);
}

int cmd_run(const CommonOptions& opts) {
  const auto cfg = load(opts);
  const auto instance = safefw::harness::build_instance(cfg);
  const auto summary = safefw::harness::run_experiment(cfg, instance);
  print_summary(summary);
  if (!cfg.output_dir.empty()) {
    safefw::harness::export_experiment(cfg.output_dir, summary, instance, cfg);
    std::cout << "wrote " << cfg.output_dir << "\n";
  }
  return safefw::harness::exit_code_for(summary);
}

int cmd_compare(const CommonOptions& opts) {
  const auto cfg = load(opts);
  const auto instance = safefw::harness::build_instance(cfg);
  const auto report = safefw::harness::compare_sfw_ro(cfg);
  print_summary(report.sfw);
  print_summary(report.ro);
  std::cout << "SFW not worse than RO in " << report.sfw_not_worse << "/" << report.pairs.size()
            << " paired seeds\n";
  if (!cfg.output_dir.empty()) {
    const std::filesystem::path dir(cfg.output_dir);
    safefw::harness::export_experiment(dir / "sfw", report.sfw, instance, cfg);
    safefw::harness::export_experiment(dir / "ro", report.ro, instance, cfg);
    safefw::harness::write_json(dir / "compare.json",
                                safefw::harness::compare_to_json(report, cfg));
    std::cout << "wrote " << cfg.output_dir << "\n";
  }
  return std::max(safefw::harness::exit_code_for(report.sfw),
                  safefw::harness::exit_code_for(report.ro));
}

int cmd_validate(const CommonOptions& opts) {
  const auto cfg = load(opts);
  const auto instance = safefw::harness::build_instance(cfg);
  std::cout << "config OK: d=" << cfg.problem.d << " m=" << instance.truth.num_constraints()
            << " variant=" << safefw::harness::to_string(cfg.variant)
            << " C_n=" << instance.safety.Cn << " phi_delta=" << instance.safety.phi_delta(1)
            << " f*=" << instance.f_star << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safe Frank-Wolfe experiment harness"};
  app.require_subcommand(1);

  CommonOptions run_opts, cmp_opts, val_opts;
  auto* run = app.add_subcommand("run", "Run repeated experiments and export trajectories");
  add_common(run, run_opts, true);
  auto* compare = app.add_subcommand("compare", "Paired adaptive-SFW vs RO comparison");
  add_common(compare, cmp_opts, true);
  auto* validate = app.add_subcommand("validate-config", "Parse and check a configuration");
  add_common(validate, val_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*compare) return cmd_compare(cmp_opts);
    if (*validate) return cmd_validate(val_opts);
  } catch (const safefw::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
