#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wbcbf/dynamics.hpp"
#include "wbcbf/geometry.hpp"
#include "wbcbf/rng.hpp"

namespace wbcbf {

enum class SensorKind { GPS, LiDAR, Camera, V2X };

std::string to_string(SensorKind k);

/// Gaussian sensor channel. The bias shifts the drawn mean only and is never
/// part of the reported covariance: the consumer is told the modeled noise,
/// not the unmodeled latency offset.
struct SensorModel {
  SensorKind kind = SensorKind::GPS;
  Vec2 bias;           // m
  double std = 0.0;    // m per axis, isotropic
  double weight = 0.0; // barycenter weight, obstacle sensors only
};

struct MeasurementSet {
  Gaussian2 ego;
  std::vector<std::pair<SensorKind, Gaussian2>> obstacle;
};

/// One GPS fix: mean drawn from N(truth.pos + bias, std^2 I), covariance
/// reported as the modeled std^2 I.
Gaussian2 measure_ego(const VehicleState& truth, const SensorModel& gps, RngStream& rng);

/// One measurement per obstacle sensor, each drawing from its own stream
/// (rngs aligned with suite order).
std::vector<std::pair<SensorKind, Gaussian2>> measure_obstacle(
    const ObstacleState& truth, const std::vector<SensorModel>& suite,
    std::span<RngStream> rngs);

}  // namespace wbcbf
