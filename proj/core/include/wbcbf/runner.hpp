#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "wbcbf/report.hpp"
#include "wbcbf/sim.hpp"

namespace wbcbf {

struct RunOptions {
  std::string config_path;             // empty = built-in defaults
  std::vector<std::string> scenarios;  // preset names; empty = all presets
  std::string controller = "both";     // cbf | wbcvar | both
  int runs = -1;                       // -1 = configured value
  std::int64_t seed = -1;              // -1 = configured value
  std::string out_dir = "out";
  bool plot = false;
  bool trace = false;
  int threads = 0;  // 0 = hardware concurrency
};

struct OutputBundle {
  std::string out_dir;
  std::string per_run_csv;
  std::string campaign_csv;
  std::vector<std::string> trajectory_csvs;
  std::vector<std::string> svgs;
  std::vector<CampaignSummary> summaries;
};

/// Runs the selected (scenario, controller) campaigns, writes the per-run and
/// campaign CSVs (plus optional trajectory CSVs/SVG plots), and prints the
/// comparison table to os.
OutputBundle cmd_run(const RunOptions& opts, std::ostream& os);

/// The full desk-scale study: every preset, both controllers, 100 runs each,
/// under one documented seed.
OutputBundle cmd_reproduce(const std::string& out_dir, std::ostream& os,
                           std::uint64_t seed = 42, int threads = 0);

/// Runs the oracle suites and prints one line per oracle; returns 0 when all
/// pass.
int cmd_selftest(std::ostream& os);

}  // namespace wbcbf
