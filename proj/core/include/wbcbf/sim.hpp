#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wbcbf/control.hpp"
#include "wbcbf/dynamics.hpp"
#include "wbcbf/sensing.hpp"
#include "wbcbf/wasserstein.hpp"

namespace wbcbf {

enum class ControllerKind { CbfBaseline, WbCvarCbf };

std::string to_string(ControllerKind k);

/// Full description of one closed-loop experiment: geometry, noise models,
/// controller selection, and campaign bookkeeping.
struct ScenarioConfig {
  std::string name;

  std::vector<std::pair<Vec2, double>> path_waypoints;
  VehicleState av_initial;
  ObstacleState vru_initial;

  SensorModel gps;
  std::vector<SensorModel> suite;  // LiDAR, Camera, V2X

  BarrierParams barrier;
  MpcConfig mpc;
  ControllerKind controller = ControllerKind::WbCvarCbf;
  int ego_samples = 10;         // I
  int barycenter_samples = 10;  // J
  double gamma_tiebreak = 1e-6;
  BarycenterOptions barycenter;

  int runs = 100;
  std::uint64_t base_seed = 42;
  double dt = 0.1;        // s
  double max_time = 30.0; // s

  Vec2 conflict_point{50.0, 0.0};
  double past_conflict_margin = 20.0;  // m of arc past the conflict point
  double success_clearance = 2.8;      // m, vehicle radius + pedestrian radius
};

struct TrajectoryPoint {
  double t = 0.0;
  VehicleState vehicle;
  ObstacleState obstacle;
  FilterDecision decision;
  double h_true = 0.0;  // barrier at the true positions
};

struct RunMetrics {
  bool success = false;
  double min_distance = 0.0;  // m, center to center
  std::vector<TrajectoryPoint> trajectory;
  std::uint64_t seed = 0;  // per-run stream id within the campaign
  int steps = 0;
  int filter_active_steps = 0;
  int solver_fallbacks = 0;
  double max_kkt_optimal = 0.0;  // audit: max KKT residual over optimal solves
};

struct CampaignSummary {
  std::string scenario;
  ControllerKind controller = ControllerKind::CbfBaseline;
  int runs = 0;
  int successes = 0;
  double sr_percent = 0.0;
  double mdp = 0.0;  // m, mean of per-run minima over successful runs
  int solver_fallbacks = 0;
  double max_kkt_optimal = 0.0;
};

struct CampaignResult {
  CampaignSummary summary;
  std::vector<RunMetrics> episodes;  // ordered by seed
};

/// One closed-loop episode: truth dynamics, sensing, fusion (WB controller),
/// nominal MPC, safety filter, actuation, until the AV passes the conflict
/// point plus a margin or the time cap elapses. Solver fallbacks are recorded
/// in the log and never abort the episode. Metrics are a pure function of
/// (cfg, seed).
RunMetrics run_episode(const ScenarioConfig& cfg, std::uint64_t seed);

/// Runs cfg.runs episodes with stream ids 0..runs-1 and aggregates SR and
/// MDP (MDP over successful runs only). threads = 0 picks the hardware
/// concurrency; aggregation is seed-ordered, so results do not depend on the
/// thread count.
CampaignResult run_campaign(const ScenarioConfig& cfg, int threads = 0);

/// The crossing-pedestrian study presets. Scenario 3 appears twice because
/// its V2X noise level is carried as two named variants (0.5 and 1.0).
std::vector<ScenarioConfig> scenario_presets();

}  // namespace wbcbf
