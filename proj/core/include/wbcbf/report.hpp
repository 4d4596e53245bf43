#pragma once

#include <span>
#include <string>
#include <vector>

#include "wbcbf/sim.hpp"

namespace wbcbf {

/// Shortest round-trip decimal form of v (std::to_chars); parsing the output
/// recovers the exact double, and equal inputs give byte-equal strings.
std::string format_double(double v);

struct PerRunRow {
  std::string scenario;
  std::string controller;
  std::uint64_t seed = 0;
  bool success = false;
  double min_distance = 0.0;
  int steps = 0;
  int filter_active_steps = 0;
  int solver_fallbacks = 0;
};

void write_per_run_csv(const std::string& path, std::span<const PerRunRow> rows);
void write_campaign_csv(const std::string& path, std::span<const CampaignSummary> rows);
std::vector<CampaignSummary> read_campaign_csv(const std::string& path);

/// Time series of one episode: t_s, av pose and speed, vru position, true
/// barrier value, applied input, gamma, and the filter-active flag.
void write_trajectory_csv(const std::string& path, const RunMetrics& run);

/// Static plot of one episode: AV path, VRU path, and the clearance circle at
/// the minimum-approach instant. Pure presentation; no numeric output.
void write_trajectory_svg(const std::string& path, const RunMetrics& run,
                          const ScenarioConfig& cfg);

/// Console comparison table, one row per (scenario, controller).
std::string format_summary_table(std::span<const CampaignSummary> rows);

}  // namespace wbcbf
