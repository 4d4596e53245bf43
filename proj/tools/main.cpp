#include <CLI11.hpp>
#include <exception>
#include <iostream>

#include "wbcbf/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Risk-aware safety filter: Wasserstein-barycenter sensor fusion feeding a "
               "sampled-CVaR control-barrier QP, with a Monte Carlo crossing-pedestrian "
               "study"};
  app.require_subcommand(1);

  wbcbf::RunOptions run_opts;
  auto* run = app.add_subcommand("run", "Run selected scenario campaigns");
  run->add_option("--config", run_opts.config_path, "Key-value config file");
  run->add_option("--scenario", run_opts.scenarios,
                  "Scenario preset name(s): s1, s2, s3_text, s3_table (default: all)");
  run->add_option("--controller", run_opts.controller, "cbf | wbcvar | both")
      ->default_val("both");
  run->add_option("--runs", run_opts.runs, "Episodes per campaign (default: configured)");
  run->add_option("--seed", run_opts.seed, "Campaign base seed (default: configured)");
  run->add_option("--out", run_opts.out_dir, "Output directory")->default_val("out");
  run->add_flag("--plot", run_opts.plot, "Write per-episode trajectory CSV + SVG");
  run->add_flag("--trace", run_opts.trace, "Write per-episode trajectory CSV");
  run->add_option("--threads", run_opts.threads, "Worker threads (0 = hardware)");

  std::string rep_out = "out";
  int rep_threads = 0;
  std::uint64_t rep_seed = 42;
  auto* rep = app.add_subcommand(
      "reproduce", "Full study: every preset, both controllers, 100 runs each");
  rep->add_option("--out", rep_out, "Output directory")->default_val("out");
  rep->add_option("--seed", rep_seed, "Campaign base seed")->default_val("42");
  rep->add_option("--threads", rep_threads, "Worker threads (0 = hardware)");

  auto* self = app.add_subcommand("selftest", "Run the independent oracle suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      wbcbf::cmd_run(run_opts, std::cout);
      return 0;
    }
    if (rep->parsed()) {
      wbcbf::cmd_reproduce(rep_out, std::cout, rep_seed, rep_threads);
      return 0;
    }
    if (self->parsed()) {
      return wbcbf::cmd_selftest(std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
