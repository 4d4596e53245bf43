#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wbcbf/config.hpp"
#include "wbcbf/report.hpp"
#include "wbcbf/runner.hpp"
#include "wbcbf/selftest.hpp"

using namespace wbcbf;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name)
      : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("config parses values and rejects bad keys with diagnostics") {
  const Config c = Config::from_string("sim.dt = 0.05  # faster loop\n"
                                       "mpc.horizon=12\n"
                                       "sensors.gps_std = 0.25\n");
  CHECK(c.get_double("sim.dt") == 0.05);
  CHECK(c.get_int("mpc.horizon") == 12);
  CHECK(*c.get_override("sensors.gps_std") == 0.25);
  CHECK(!Config::defaults().get_override("sensors.gps_std").has_value());

  CHECK_THROWS_WITH_AS(Config::from_string("sim.dtt = 0.1\n"),
                       doctest::Contains("sim.dtt"), std::runtime_error);
  CHECK_THROWS_WITH_AS(Config::from_string("sim.dt = soon\n"), doctest::Contains("sim.dt"),
                       std::runtime_error);
  CHECK_THROWS_AS(Config::from_string("just words\n"), std::runtime_error);
  CHECK_THROWS_AS(Config::from_file("/nonexistent/path.cfg"), std::runtime_error);
}

TEST_CASE("config overrides flow into the scenario") {
  const Config c = Config::from_string("barrier.epsilon = 0.1\n"
                                       "scenario.av_speed = 9\n"
                                       "sensors.v2x_std = 0.7\n");
  const ScenarioConfig sc = apply_config(scenario_presets()[0], c);
  CHECK(sc.barrier.epsilon == 0.1);
  CHECK(sc.av_initial.speed == 9.0);
  CHECK(sc.suite[2].std == 0.7);
  // untouched preset noise survives
  CHECK(sc.suite[0].std == 0.1);
  // crossing stays synchronized with the approach time
  const double t_conf = (sc.conflict_point - sc.av_initial.pos).norm() /
                        sc.path_waypoints[0].second;
  CHECK(sc.vru_initial.pos.y == doctest::Approx(-4.5 * t_conf));
}

TEST_CASE("format_double round-trips exactly") {
  for (double v : {0.1, 1.0 / 3.0, 6.15, 2.8000000000000003, 1e-17, -42.0}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
}

TEST_CASE("campaign csv round-trips the summary values") {
  TempDir tmp("wbcbf_csv_test");
  std::vector<CampaignSummary> rows(2);
  rows[0] = {"s1", ControllerKind::CbfBaseline, 100, 97, 97.0, 6.43210987654321, 3, 1e-7};
  rows[1] = {"s2", ControllerKind::WbCvarCbf, 100, 100, 100.0, 7.0300000000000002, 0, 2e-8};
  const std::string path = (tmp.path / "campaigns.csv").string();
  write_campaign_csv(path, rows);
  const auto back = read_campaign_csv(path);
  REQUIRE(back.size() == 2);
  for (int i = 0; i < 2; ++i) {
    CHECK(back[i].scenario == rows[i].scenario);
    CHECK(back[i].controller == rows[i].controller);
    CHECK(back[i].runs == rows[i].runs);
    CHECK(back[i].successes == rows[i].successes);
    CHECK(back[i].sr_percent == rows[i].sr_percent);
    CHECK(back[i].mdp == rows[i].mdp);
  }
}

TEST_CASE("cmd_run writes deterministic outputs and plotting changes no numbers") {
  TempDir a("wbcbf_run_a"), b("wbcbf_run_b"), c("wbcbf_run_c");
  RunOptions opts;
  opts.scenarios = {"s1"};
  opts.controller = "both";
  opts.runs = 2;
  opts.seed = 7;
  opts.threads = 1;
  std::ostringstream sink;

  opts.out_dir = a.path.string();
  const OutputBundle ba = cmd_run(opts, sink);
  opts.out_dir = b.path.string();
  cmd_run(opts, sink);
  CHECK(slurp((a.path / "runs.csv").string()) == slurp((b.path / "runs.csv").string()));
  CHECK(slurp((a.path / "campaigns.csv").string()) ==
        slurp((b.path / "campaigns.csv").string()));

  opts.out_dir = c.path.string();
  opts.plot = true;
  const OutputBundle bc = cmd_run(opts, sink);
  CHECK(slurp((a.path / "campaigns.csv").string()) ==
        slurp((c.path / "campaigns.csv").string()));
  CHECK(bc.svgs.size() == 4);  // 2 runs x 2 controllers
  for (const auto& svg : bc.svgs) {
    const std::string content = slurp(svg);
    CHECK(content.find("<svg") != std::string::npos);
    CHECK(content.find("circle") != std::string::npos);
  }
  CHECK(ba.summaries.size() == 2);
}

TEST_CASE("cmd_run rejects unknown scenario names") {
  RunOptions opts;
  opts.scenarios = {"s9"};
  std::ostringstream sink;
  CHECK_THROWS_WITH_AS(cmd_run(opts, sink), doctest::Contains("s9"), std::runtime_error);
}

TEST_CASE("selftest detects a broken hinge") {
  // flip the hinge direction of the Rockafellar-Uryasev sum; the grid oracle
  // must notice the mutation
  const auto broken = selftest::check_cvar_grid(
      20, 2000, [](std::span<const double> v, double eps, double gamma) {
        double acc = 0.0;
        for (double x : v) acc += std::max(x - gamma, 0.0);  // wrong side
        return gamma - acc / (static_cast<double>(v.size()) * eps);
      });
  CHECK(!broken.pass);

  const auto good = selftest::check_cvar_grid(20, 2000);
  CHECK(good.pass);
}

TEST_CASE("selftest report lists every oracle with residuals") {
  selftest::SelftestReport rep;
  rep.oracles.push_back({"alpha", true, 1e-9, ""});
  rep.oracles.push_back({"beta", false, 0.5, "broken"});
  const std::string txt = selftest::format_report(rep);
  CHECK(txt.find("[PASS] alpha") != std::string::npos);
  CHECK(txt.find("[FAIL] beta") != std::string::npos);
  CHECK(txt.find("broken") != std::string::npos);
  CHECK(!rep.all_pass());
}
