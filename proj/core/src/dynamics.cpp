#include "wbcbf/dynamics.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace wbcbf {

double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r = std::numbers::pi;
  return r;
}

namespace {

using State4 = std::array<double, 4>;  // x, y, heading, speed

State4 deriv(const State4& s, const ControlInput& u, double wheelbase) {
  const double v = s[3];
  return {v * std::cos(s[2]), v * std::sin(s[2]), v / wheelbase * std::tan(u.steer),
          u.accel};
}

State4 axpy(const State4& s, double h, const State4& d) {
  return {s[0] + h * d[0], s[1] + h * d[1], s[2] + h * d[2], s[3] + h * d[3]};
}

}  // namespace

VehicleState vehicle_step(const VehicleState& s, const ControlInput& u, double dt,
                          double wheelbase) {
  // Integrate only up to the zero-speed crossing when braking to rest; the
  // model freezes there (zero speed moves nothing).
  double horizon = dt;
  if (u.accel < 0.0 && s.speed + u.accel * dt < 0.0) {
    horizon = -s.speed / u.accel;
  }
  State4 y{s.pos.x, s.pos.y, s.heading, s.speed};
  if (horizon > 0.0) {
    const State4 k1 = deriv(y, u, wheelbase);
    const State4 k2 = deriv(axpy(y, 0.5 * horizon, k1), u, wheelbase);
    const State4 k3 = deriv(axpy(y, 0.5 * horizon, k2), u, wheelbase);
    const State4 k4 = deriv(axpy(y, horizon, k3), u, wheelbase);
    for (int i = 0; i < 4; ++i) {
      y[i] += horizon / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  }
  VehicleState next;
  next.pos = {y[0], y[1]};
  next.heading = wrap_angle(y[2]);
  next.speed = std::max(y[3], 0.0);
  return next;
}

Mat2 vehicle_step_jacobian_u(const VehicleState& s, const ControlInput& u0, double dt,
                             double wheelbase) {
  constexpr double h = 1e-5;
  const VehicleState ap = vehicle_step(s, {u0.accel + h, u0.steer}, dt, wheelbase);
  const VehicleState am = vehicle_step(s, {u0.accel - h, u0.steer}, dt, wheelbase);
  const VehicleState sp = vehicle_step(s, {u0.accel, u0.steer + h}, dt, wheelbase);
  const VehicleState sm = vehicle_step(s, {u0.accel, u0.steer - h}, dt, wheelbase);
  const double inv = 1.0 / (2.0 * h);
  return {(ap.pos.x - am.pos.x) * inv, (sp.pos.x - sm.pos.x) * inv,
          (ap.pos.y - am.pos.y) * inv, (sp.pos.y - sm.pos.y) * inv};
}

ObstacleState obstacle_step(const ObstacleState& o, double dt) {
  return {o.pos + dt * o.vel, o.vel};
}

}  // namespace wbcbf
