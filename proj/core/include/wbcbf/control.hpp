#pragma once

#include <utility>
#include <vector>

#include "wbcbf/dynamics.hpp"
#include "wbcbf/qp.hpp"
#include "wbcbf/risk.hpp"
#include "wbcbf/sensing.hpp"

namespace wbcbf {

/// Polyline reference with a target speed per waypoint, arc-length
/// parameterized. At least two distinct waypoints.
class ReferencePath {
 public:
  struct Sample {
    Vec2 pos;
    double heading = 0.0;
    double speed = 0.0;
  };

  explicit ReferencePath(std::vector<std::pair<Vec2, double>> waypoints);

  double length() const { return arcs_.back(); }

  /// Arc length of the closest point on the path.
  double project(const Vec2& p) const;

  /// Interpolated reference at arc length s, clamped to [0, length].
  Sample sample(double s) const;

 private:
  std::vector<Vec2> pts_;
  std::vector<double> speeds_;
  std::vector<double> arcs_;
};

struct InputLimits {
  double accel_min = -6.0;  // m/s^2
  double accel_max = 3.0;
  double steer_min = -0.5;  // rad
  double steer_max = 0.5;

  ControlInput clamp(const ControlInput& u) const;
  ControlInput max_braking() const { return {accel_min, 0.0}; }
};

struct MpcConfig {
  int horizon = 10;
  double dt = 0.1;
  double wheelbase = 2.9;
  double q_pos = 10.0;
  double q_heading = 1.0;
  double q_speed = 1.0;
  double r_accel = 0.1;
  double r_steer = 1.0;
  InputLimits limits;
  double accel_rate = 30.0;  // m/s^3
  double steer_rate = 3.0;   // rad/s
  double qp_tol = 1e-6;
  int qp_max_iter = 4000;
};

struct MpcSolveInfo {
  QpStatus status = QpStatus::optimal;
  KktResiduals kkt;
  int iterations = 0;
  bool fallback = false;
};

/// First input of the horizon-optimal tracking sequence for the
/// rollout-linearized bicycle model. Solver failure falls back to maximal
/// braking.
ControlInput mpc_nominal(const VehicleState& s, const ReferencePath& path,
                         const MpcConfig& cfg, MpcSolveInfo* info = nullptr,
                         QpSolution* warm = nullptr);

/// Safety-filter outcome. active=false means the nominal input already
/// satisfied the constraint and u_safe == u_nom exactly; gamma is the VaR
/// variable of the CVaR filter (NaN for the baseline and on fallback).
struct FilterDecision {
  ControlInput u_safe;
  ControlInput u_nom;
  double gamma = 0.0;
  bool active = false;
  QpStatus solver_status = QpStatus::optimal;
  bool fallback = false;
  KktResiduals kkt;
};

struct FilterOptions {
  InputLimits limits;
  double dt = 0.1;
  double wheelbase = 2.9;
  double qp_tol = 1e-6;
  int qp_max_iter = 4000;
  /// Tiny linear preference that drives the returned gamma to the
  /// Rockafellar-Uryasev maximizer (the VaR) when the solution set is flat.
  double gamma_tiebreak = 1e-6;
  QpSolution* warm = nullptr;  // in/out warm start, updated on optimal solves
};

/// Baseline mean-fused filter: unweighted mean of the obstacle measurement
/// means, one deterministic discrete-time CBC at the measured ego mean,
/// min |u - u_nom|^2 subject to CBC(u) >= 0 and input bounds.
FilterDecision filter_cbf_baseline(const ControlInput& u_nom, const VehicleState& s,
                                   const Gaussian2& ego_meas,
                                   const std::vector<std::pair<SensorKind, Gaussian2>>& obstacle_meas,
                                   const Vec2& obstacle_vel, const BarrierParams& p,
                                   const FilterOptions& opts);

/// Minimal-intervention solve of a sampled-CVaR constraint in its exact
/// epigraph form (variables u, gamma, one slack per sample); u_nom is taken
/// from the sample set.
FilterDecision solve_cvar_epigraph(const CbcSampleSet& set, double epsilon,
                                   const FilterOptions& opts);

/// Risk-aware filter: samples the ego and fused obstacle distributions,
/// enforces the sampled-CVaR control barrier constraint through its exact
/// epigraph form, and minimally modifies u_nom.
FilterDecision filter_wb_cvar_cbf(const ControlInput& u_nom, const VehicleState& s,
                                  const Gaussian2& ego_meas, const Gaussian2& wb,
                                  const Vec2& obstacle_vel, const BarrierParams& p,
                                  int ego_samples, int barycenter_samples, RngStream& rng,
                                  const FilterOptions& opts);

}  // namespace wbcbf
