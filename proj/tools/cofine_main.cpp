// Command-line front end: learn-u / simulate / report.

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "cofine/commands.hpp"
#include "cofine/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"coarse-to-fine contextual bandit simulator"};
  app.set_version_flag("--version", std::string(cofine::kVersion));
  app.require_subcommand(1);

  // learn-u
  cofine::cli::LearnUOptions learn_opt;
  CLI::App* learn = app.add_subcommand(
      "learn-u", "train the subspace projection from a profile CSV");
  learn->add_option("--profiles", learn_opt.profiles_csv, "profile CSV path")
      ->required();
  learn->add_option("--k", learn_opt.subspace_dim, "subspace dimension")
      ->required();
  learn->add_flag("--ridge", learn_opt.ridge,
                  "augment profiles with the identity ridge");
  learn->add_option("--out", learn_opt.out_dir, "output directory")->required();

  // simulate
  cofine::cli::SimulateOptions sim_opt;
  std::uint64_t seed_override = 0;
  int trials_override = 0;
  int horizon_override = 0;
  CLI::App* simulate =
      app.add_subcommand("simulate", "run a configured experiment protocol");
  simulate->add_option("--config", sim_opt.config, "experiment config file")
      ->required();
  simulate->add_option("--out", sim_opt.out_dir, "output directory")->required();
  CLI::Option* seed_opt =
      simulate->add_option("--seed", seed_override, "override the base seed");
  CLI::Option* trials_opt =
      simulate->add_option("--trials", trials_override, "override trial count");
  CLI::Option* horizon_opt =
      simulate->add_option("--horizon", horizon_override, "override horizon T");

  // report
  cofine::cli::ReportOptions report_opt;
  CLI::App* report =
      app.add_subcommand("report", "merge trace CSVs into a comparison report");
  report->add_option("--traces", report_opt.traces, "trace CSV files")
      ->required()
      ->expected(-1);
  report->add_option("--out", report_opt.out_dir, "output directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    // CLI11 returns 0 for --help/--version; map real parse errors to 2.
    return code == 0 ? 0 : cofine::cli::kExitInput;
  }

  if (learn->parsed()) return cofine::cli::cmd_learn_u(learn_opt);
  if (simulate->parsed()) {
    if (*seed_opt) sim_opt.seed = seed_override;
    if (*trials_opt) sim_opt.trials = trials_override;
    if (*horizon_opt) sim_opt.horizon = horizon_override;
    return cofine::cli::cmd_simulate(sim_opt);
  }
  if (report->parsed()) return cofine::cli::cmd_report(report_opt);
  return cofine::cli::kExitInput;
}
