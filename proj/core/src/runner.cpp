#include "wbcbf/runner.hpp"

#include <filesystem>
#include <ostream>
#include <stdexcept>

#include "wbcbf/config.hpp"
#include "wbcbf/selftest.hpp"

namespace wbcbf {

namespace {

std::vector<ControllerKind> parse_controllers(const std::string& name) {
  if (name == "cbf") return {ControllerKind::CbfBaseline};
  if (name == "wbcvar") return {ControllerKind::WbCvarCbf};
  if (name == "both") return {ControllerKind::CbfBaseline, ControllerKind::WbCvarCbf};
  throw std::runtime_error("unknown controller '" + name + "' (expected cbf|wbcvar|both)");
}

std::vector<ScenarioConfig> select_scenarios(const std::vector<std::string>& names,
                                             const Config& cfg) {
  std::vector<ScenarioConfig> all = scenario_presets();
  for (auto& s : all) s = apply_config(s, cfg);
  if (names.empty()) return all;
  std::vector<ScenarioConfig> out;
  for (const auto& n : names) {
    bool found = false;
    for (const auto& s : all) {
      if (s.name == n) {
        out.push_back(s);
        found = true;
        break;
      }
    }
    if (!found) {
      std::string known;
      for (const auto& s : all) known += (known.empty() ? "" : ", ") + s.name;
      throw std::runtime_error("unknown scenario '" + n + "' (known: " + known + ")");
    }
  }
  return out;
}

}  // namespace

OutputBundle cmd_run(const RunOptions& opts, std::ostream& os) {
  const Config cfg =
      opts.config_path.empty() ? Config::defaults() : Config::from_file(opts.config_path);
  std::vector<ScenarioConfig> scenarios = select_scenarios(opts.scenarios, cfg);
  const std::vector<ControllerKind> controllers = parse_controllers(opts.controller);

  std::filesystem::create_directories(opts.out_dir);
  OutputBundle bundle;
  bundle.out_dir = opts.out_dir;
  bundle.per_run_csv = opts.out_dir + "/runs.csv";
  bundle.campaign_csv = opts.out_dir + "/campaigns.csv";

  std::vector<PerRunRow> rows;
  for (ScenarioConfig sc : scenarios) {
    if (opts.runs > 0) sc.runs = opts.runs;
    if (opts.seed >= 0) sc.base_seed = static_cast<std::uint64_t>(opts.seed);
    for (ControllerKind k : controllers) {
      sc.controller = k;
      const CampaignResult camp = run_campaign(sc, opts.threads);
      bundle.summaries.push_back(camp.summary);
      for (const RunMetrics& m : camp.episodes) {
        rows.push_back({sc.name, to_string(k), m.seed, m.success, m.min_distance, m.steps,
                        m.filter_active_steps, m.solver_fallbacks});
        if (opts.trace || opts.plot) {
          const std::string stem = opts.out_dir + "/traj_" + sc.name + "_" + to_string(k) +
                                   "_" + std::to_string(m.seed);
          write_trajectory_csv(stem + ".csv", m);
          bundle.trajectory_csvs.push_back(stem + ".csv");
          if (opts.plot) {
            write_trajectory_svg(stem + ".svg", m, sc);
            bundle.svgs.push_back(stem + ".svg");
          }
        }
      }
    }
  }
  write_per_run_csv(bundle.per_run_csv, rows);
  write_campaign_csv(bundle.campaign_csv, bundle.summaries);
  os << format_summary_table(bundle.summaries);
  return bundle;
}

OutputBundle cmd_reproduce(const std::string& out_dir, std::ostream& os, std::uint64_t seed,
                           int threads) {
  RunOptions opts;
  opts.out_dir = out_dir;
  opts.controller = "both";
  opts.seed = static_cast<std::int64_t>(seed);
  opts.threads = threads;
  return cmd_run(opts, os);
}

int cmd_selftest(std::ostream& os) {
  const selftest::SelftestReport rep = selftest::run_selftest();
  os << selftest::format_report(rep);
  return rep.all_pass() ? 0 : 1;
}

}  // namespace wbcbf
