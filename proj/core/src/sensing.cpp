#include "wbcbf/sensing.hpp"

#include <stdexcept>

namespace wbcbf {

std::string to_string(SensorKind k) {
  switch (k) {
    case SensorKind::GPS: return "gps";
    case SensorKind::LiDAR: return "lidar";
    case SensorKind::Camera: return "camera";
    case SensorKind::V2X: return "v2x";
  }
  return "?";
}

namespace {

Gaussian2 draw_channel(const Vec2& truth_pos, const SensorModel& m, RngStream& rng) {
  const SpdMat2 cov = SpdMat2::isotropic(m.std * m.std);
  Gaussian2 dist{truth_pos + m.bias, cov};
  return {gaussian_sample(dist, rng), cov};
}

}  // namespace

Gaussian2 measure_ego(const VehicleState& truth, const SensorModel& gps, RngStream& rng) {
  if (gps.kind != SensorKind::GPS) {
    throw std::invalid_argument("measure_ego: sensor model is not a GPS model");
  }
  return draw_channel(truth.pos, gps, rng);
}

std::vector<std::pair<SensorKind, Gaussian2>> measure_obstacle(
    const ObstacleState& truth, const std::vector<SensorModel>& suite,
    std::span<RngStream> rngs) {
  if (rngs.size() != suite.size()) {
    throw std::invalid_argument("measure_obstacle: one rng stream per sensor required");
  }
  std::vector<std::pair<SensorKind, Gaussian2>> out;
  out.reserve(suite.size());
  for (std::size_t i = 0; i < suite.size(); ++i) {
    out.emplace_back(suite[i].kind, draw_channel(truth.pos, suite[i], rngs[i]));
  }
  return out;
}

}  // namespace wbcbf
