#pragma once

#include "wbcbf/geometry.hpp"

namespace wbcbf {

/// Kinematic-bicycle vehicle state. Heading is wrapped to (-pi, pi] and
/// speed is nonnegative.
struct VehicleState {
  Vec2 pos;
  double heading = 0.0;  // rad
  double speed = 0.0;    // m/s
};

struct ControlInput {
  double accel = 0.0;  // m/s^2
  double steer = 0.0;  // rad
};

/// Constant-velocity obstacle (crossing pedestrian).
struct ObstacleState {
  Vec2 pos;
  Vec2 vel;
};

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// One control period of the kinematic bicycle under 4th-order Runge-Kutta.
/// Braking through zero stops the vehicle at the zero crossing; speed never
/// goes negative.
VehicleState vehicle_step(const VehicleState& s, const ControlInput& u, double dt,
                          double wheelbase);

/// d(next position)/d(accel, steer), central finite differences with step
/// 1e-5 in each input. Column 0 is accel, column 1 steer.
Mat2 vehicle_step_jacobian_u(const VehicleState& s, const ControlInput& u0, double dt,
                             double wheelbase);

ObstacleState obstacle_step(const ObstacleState& o, double dt);

}  // namespace wbcbf
