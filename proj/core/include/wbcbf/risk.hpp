#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "wbcbf/dynamics.hpp"
#include "wbcbf/geometry.hpp"
#include "wbcbf/rng.hpp"

namespace wbcbf {

/// Barrier and risk parameters. The keep-out distance is
/// vehicle_radius + obstacle_radius + safety_dist; alpha_gain is the slope of
/// the class-K decay (per second, valid up to 1/dt); epsilon the risk level.
struct BarrierParams {
  double vehicle_radius = 1.8;   // m
  double obstacle_radius = 1.0;  // m
  double safety_dist = 3.0;      // m
  double alpha_gain = 1.0;       // 1/s
  double epsilon = 0.05;

  double keep_out() const { return vehicle_radius + obstacle_radius + safety_dist; }
};

/// One affine-in-u realization of the control barrier constraint:
/// CBC(u) = const_term + grad_u . (u - u_nom), meters.
struct CbcSample {
  double const_term = 0.0;
  Vec2 grad_u;  // d CBC / d (accel, steer)
};

struct CbcSampleSet {
  std::vector<CbcSample> samples;  // ego-major order, size I*J
  int ego_count = 0;               // I
  int barycenter_count = 0;        // J
  ControlInput u_nom;
};

/// Distance barrier h = |z_v - z_o| - keep_out. Nonnegative h is the safe set.
double barrier(const Vec2& z_v, const Vec2& z_o, const BarrierParams& p);

/// One-step discrete control barrier constraint at given current/next
/// positions, linearized in u around u_nom through the position Jacobian:
/// CBC(u) = h_next(u) - h_now + alpha_gain*dt*h_now.
CbcSample make_cbc_sample(const Vec2& vehicle_now, const Vec2& vehicle_next_nom,
                          const Mat2& jac_pos_u, const Vec2& obstacle_now,
                          const Vec2& obstacle_next, double alpha_dt,
                          const BarrierParams& p);

/// Draws ego_count positions from ego_dist and barycenter_count from wb_dist
/// and forms one affine CBC per (ego, barycenter) pair. The sampled ego error
/// offsets both the current and the one-step-ahead vehicle position
/// (perfectly correlated across the step); the obstacle advances one step at
/// obstacle_vel.
CbcSampleSet build_cbc_samples(const Gaussian2& ego_dist, const Gaussian2& wb_dist,
                               const VehicleState& s, const ControlInput& u_nom,
                               const Vec2& obstacle_vel, const BarrierParams& p,
                               int ego_count, int barycenter_count, double dt,
                               double wheelbase, RngStream& rng);

/// Lower-tail quantile: the ceil(N*eps)-th smallest value.
double empirical_var(std::span<const double> values, double epsilon);

/// Mean of the ceil(N*eps) smallest values (lower-tail expectation).
double empirical_cvar(std::span<const double> values, double epsilon);

/// Rockafellar-Uryasev sample approximation
/// F(gamma) = gamma - 1/(N*eps) * sum_i max(gamma - v_i, 0).
double ru_function(std::span<const double> values, double epsilon, double gamma);

/// Exact epigraph form of the sampled CVaR constraint over variables
/// x = (u, gamma, slack_1..N): rows
///   slack_i >= 0,
///   slack_i >= gamma - CBC_i(u),
///   gamma - 1/(N*eps) * sum_i slack_i >= 0,
/// all as A x >= b. N samples give 2N+1 rows over N+3 variables.
struct EpigraphRows {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

EpigraphRows epigraph_rows(const CbcSampleSet& set, double epsilon);

}  // namespace wbcbf
