#include "wbcbf/sim.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>
#include <thread>

namespace wbcbf {

std::string to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::CbfBaseline: return "cbf";
    case ControllerKind::WbCvarCbf: return "wbcvar";
  }
  return "?";
}

namespace {

std::uint64_t sensor_stream_id(SensorKind k) {
  switch (k) {
    case SensorKind::GPS: return 0;
    case SensorKind::LiDAR: return 1;
    case SensorKind::Camera: return 2;
    case SensorKind::V2X: return 3;
  }
  return 0;
}

constexpr std::uint64_t kCbcStreamId = 4;

}  // namespace

RunMetrics run_episode(const ScenarioConfig& cfg, std::uint64_t seed) {
  const RngStream root(cfg.base_seed, seed);
  RngStream gps_rng = root.child(sensor_stream_id(SensorKind::GPS));
  std::vector<RngStream> obs_rngs;
  obs_rngs.reserve(cfg.suite.size());
  for (const auto& m : cfg.suite) obs_rngs.push_back(root.child(sensor_stream_id(m.kind)));
  RngStream cbc_rng = root.child(kCbcStreamId);

  const ReferencePath path(cfg.path_waypoints);
  const double conflict_arc = path.project(cfg.conflict_point);
  const double end_arc = conflict_arc + cfg.past_conflict_margin;

  VehicleState veh = cfg.av_initial;
  ObstacleState obs = cfg.vru_initial;

  QpSolution mpc_warm, filter_warm;
  FilterOptions fopts;
  fopts.limits = cfg.mpc.limits;
  fopts.dt = cfg.dt;
  fopts.wheelbase = cfg.mpc.wheelbase;
  fopts.qp_tol = cfg.mpc.qp_tol;
  fopts.qp_max_iter = cfg.mpc.qp_max_iter;
  fopts.gamma_tiebreak = cfg.gamma_tiebreak;
  fopts.warm = &filter_warm;

  RunMetrics out;
  out.seed = seed;
  out.min_distance = std::numeric_limits<double>::infinity();
  const int max_steps = static_cast<int>(std::ceil(cfg.max_time / cfg.dt));
  FilterDecision last_decision;

  for (int step = 0; step < max_steps; ++step) {
    if (path.project(veh.pos) >= end_arc) break;

    const Gaussian2 ego_meas = measure_ego(veh, cfg.gps, gps_rng);
    const auto obs_meas = measure_obstacle(obs, cfg.suite, obs_rngs);
    const VehicleState est{ego_meas.mean, veh.heading, veh.speed};

    MpcSolveInfo mpc_info;
    const ControlInput u_nom = mpc_nominal(est, path, cfg.mpc, &mpc_info, &mpc_warm);
    if (mpc_info.fallback) {
      ++out.solver_fallbacks;
    } else {
      out.max_kkt_optimal = std::max(out.max_kkt_optimal, mpc_info.kkt.max_residual());
    }

    FilterDecision dec;
    if (cfg.controller == ControllerKind::WbCvarCbf) {
      bool fused = false;
      Gaussian2 wb;
      try {
        wb = fuse_obstacle(obs_meas, cfg.suite, cfg.barycenter);
        fused = true;
      } catch (const std::runtime_error&) {
        dec.u_nom = u_nom;
        dec.u_safe = cfg.mpc.limits.max_braking();
        dec.active = true;
        dec.fallback = true;
        dec.gamma = std::numeric_limits<double>::quiet_NaN();
      }
      if (fused) {
        dec = filter_wb_cvar_cbf(u_nom, est, ego_meas, wb, obs.vel, cfg.barrier,
                                 cfg.ego_samples, cfg.barycenter_samples, cbc_rng, fopts);
      }
    } else {
      dec = filter_cbf_baseline(u_nom, est, ego_meas, obs_meas, obs.vel, cfg.barrier, fopts);
    }
    if (dec.fallback) {
      ++out.solver_fallbacks;
    } else if (dec.active) {
      out.max_kkt_optimal = std::max(out.max_kkt_optimal, dec.kkt.max_residual());
    }
    if (dec.active) ++out.filter_active_steps;

    out.trajectory.push_back({step * cfg.dt, veh, obs, dec,
                              barrier(veh.pos, obs.pos, cfg.barrier)});
    out.min_distance = std::min(out.min_distance, (veh.pos - obs.pos).norm());
    last_decision = dec;

    veh = vehicle_step(veh, dec.u_safe, cfg.dt, cfg.mpc.wheelbase);
    obs = obstacle_step(obs, cfg.dt);
    ++out.steps;
  }

  out.trajectory.push_back({out.steps * cfg.dt, veh, obs, last_decision,
                            barrier(veh.pos, obs.pos, cfg.barrier)});
  out.min_distance = std::min(out.min_distance, (veh.pos - obs.pos).norm());
  out.success = out.min_distance > cfg.success_clearance;
  return out;
}

CampaignResult run_campaign(const ScenarioConfig& cfg, int threads) {
  if (cfg.runs < 1) throw std::invalid_argument("run_campaign: runs must be >= 1");
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  threads = std::min(threads, cfg.runs);

  CampaignResult res;
  res.episodes.resize(static_cast<std::size_t>(cfg.runs));
  if (threads == 1) {
    for (int k = 0; k < cfg.runs; ++k) {
      res.episodes[static_cast<std::size_t>(k)] =
          run_episode(cfg, static_cast<std::uint64_t>(k));
    }
  } else {
    std::vector<std::future<void>> jobs;
    jobs.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      jobs.push_back(std::async(std::launch::async, [&, t]() {
        for (int k = t; k < cfg.runs; k += threads) {
          res.episodes[static_cast<std::size_t>(k)] =
              run_episode(cfg, static_cast<std::uint64_t>(k));
        }
      }));
    }
    for (auto& j : jobs) j.get();
  }

  CampaignSummary& s = res.summary;
  s.scenario = cfg.name;
  s.controller = cfg.controller;
  s.runs = cfg.runs;
  double mdp_sum = 0.0;
  for (const RunMetrics& m : res.episodes) {
    if (m.success) {
      ++s.successes;
      mdp_sum += m.min_distance;
    }
    s.solver_fallbacks += m.solver_fallbacks;
    s.max_kkt_optimal = std::max(s.max_kkt_optimal, m.max_kkt_optimal);
  }
  s.sr_percent = 100.0 * static_cast<double>(s.successes) / static_cast<double>(s.runs);
  s.mdp = s.successes > 0 ? mdp_sum / static_cast<double>(s.successes)
                          : std::numeric_limits<double>::quiet_NaN();
  return res;
}

std::vector<ScenarioConfig> scenario_presets() {
  ScenarioConfig base;
  base.path_waypoints = {{{-10.0, 0.0}, 8.0}, {{120.0, 0.0}, 8.0}};
  base.av_initial = {{0.0, 0.0}, 0.0, 8.0};
  // Crossing VRU timed to reach the conflict point together with the
  // unimpeded AV: 50 m at 8 m/s versus 28.125 m at 4.5 m/s.
  base.vru_initial = {{50.0, -28.125}, {0.0, 4.5}};
  base.conflict_point = {50.0, 0.0};

  base.gps = {SensorKind::GPS, {0.0, 0.0}, 0.1, 0.0};
  base.suite = {
      {SensorKind::LiDAR, {0.0, 0.0}, 0.1, 0.4},
      {SensorKind::Camera, {0.0, 0.0}, 0.2, 0.4},
      {SensorKind::V2X, {0.0, 0.0}, 1.0, 0.2},
  };

  std::vector<ScenarioConfig> out;
  ScenarioConfig s1 = base;
  s1.name = "s1";
  out.push_back(s1);

  ScenarioConfig s2 = base;
  s2.name = "s2";
  s2.gps.std = 0.5;
  out.push_back(s2);

  ScenarioConfig s3_text = base;
  s3_text.name = "s3_text";
  s3_text.gps.std = 0.5;
  s3_text.suite[2].bias = {-1.0, 0.0};
  s3_text.suite[2].std = 0.5;
  out.push_back(s3_text);

  ScenarioConfig s3_table = s3_text;
  s3_table.name = "s3_table";
  s3_table.suite[2].std = 1.0;
  out.push_back(s3_table);

  return out;
}

}  // namespace wbcbf
