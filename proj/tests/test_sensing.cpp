#include <doctest.h>

#include <cmath>

#include "wbcbf/sensing.hpp"

using namespace wbcbf;

namespace {

const VehicleState kTruth{{10.0, -5.0}, 0.0, 8.0};
const ObstacleState kObs{{50.0, 3.0}, {0.0, 4.5}};

std::vector<SensorModel> default_suite() {
  return {{SensorKind::LiDAR, {0, 0}, 0.1, 0.4},
          {SensorKind::Camera, {0, 0}, 0.2, 0.4},
          {SensorKind::V2X, {0, 0}, 1.0, 0.2}};
}

}  // namespace

TEST_CASE("noiseless gps returns the truth") {
  RngStream rng(1, 0);
  const Gaussian2 g = measure_ego(kTruth, {SensorKind::GPS, {0, 0}, 0.0, 0.0}, rng);
  CHECK(g.mean.x == kTruth.pos.x);
  CHECK(g.mean.y == kTruth.pos.y);
  CHECK(g.cov.a == 0.0);
  CHECK(g.cov.d == 0.0);
}

TEST_CASE("pure bias shifts the mean only") {
  RngStream rng(1, 1);
  const Gaussian2 g = measure_ego(kTruth, {SensorKind::GPS, {1.0, 0.0}, 0.0, 0.0}, rng);
  CHECK(g.mean.x == kTruth.pos.x + 1.0);
  CHECK(g.mean.y == kTruth.pos.y);
}

TEST_CASE("gps rms error matches the configured sigma") {
  RngStream rng(1, 2);
  const SensorModel gps{SensorKind::GPS, {0, 0}, 0.5, 0.0};
  const int n = 10000;
  double sq_x = 0.0, sq_y = 0.0;
  for (int i = 0; i < n; ++i) {
    const Gaussian2 g = measure_ego(kTruth, gps, rng);
    sq_x += (g.mean.x - kTruth.pos.x) * (g.mean.x - kTruth.pos.x);
    sq_y += (g.mean.y - kTruth.pos.y) * (g.mean.y - kTruth.pos.y);
    CHECK(g.cov.a == 0.25);  // reported covariance is the model, not the draw
    CHECK(g.cov.d == 0.25);
    CHECK(g.cov.b == 0.0);
  }
  CHECK(std::abs(std::sqrt(sq_x / n) - 0.5) < 0.02);
  CHECK(std::abs(std::sqrt(sq_y / n) - 0.5) < 0.02);
}

TEST_CASE("measure_ego requires a gps model") {
  RngStream rng(1, 3);
  CHECK_THROWS_AS(measure_ego(kTruth, {SensorKind::LiDAR, {0, 0}, 0.1, 0.4}, rng),
                  std::invalid_argument);
}

TEST_CASE("noiseless suite pins all three sensors to the truth") {
  auto suite = default_suite();
  for (auto& s : suite) s.std = 0.0;
  std::vector<RngStream> rngs = {RngStream(2, 1), RngStream(2, 2), RngStream(2, 3)};
  const auto meas = measure_obstacle(kObs, suite, rngs);
  REQUIRE(meas.size() == 3);
  for (const auto& [kind, g] : meas) {
    CHECK(g.mean.x == kObs.pos.x);
    CHECK(g.mean.y == kObs.pos.y);
  }
}

TEST_CASE("v2x bias offsets its channel systematically") {
  auto suite = default_suite();
  suite[2].bias = {-1.0, 0.0};
  std::vector<RngStream> rngs = {RngStream(3, 1), RngStream(3, 2), RngStream(3, 3)};
  const int n = 10000;
  double v2x_dx = 0.0, lidar_dx = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto meas = measure_obstacle(kObs, suite, rngs);
    v2x_dx += meas[2].second.mean.x - kObs.pos.x;
    lidar_dx += meas[0].second.mean.x - kObs.pos.x;
  }
  CHECK(std::abs(v2x_dx / n + 1.0) < 0.05);
  CHECK(std::abs(lidar_dx / n) < 0.01);
}

TEST_CASE("per-sensor streams draw independently") {
  const auto suite = default_suite();
  std::vector<RngStream> rngs = {RngStream(4, 1), RngStream(4, 2), RngStream(4, 3)};
  const int n = 10000;
  double cross = 0.0, var_a = 0.0, var_b = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto meas = measure_obstacle(kObs, suite, rngs);
    const double ea = (meas[0].second.mean.x - kObs.pos.x) / suite[0].std;
    const double eb = (meas[1].second.mean.x - kObs.pos.x) / suite[1].std;
    cross += ea * eb;
    var_a += ea * ea;
    var_b += eb * eb;
  }
  CHECK(std::abs(cross / std::sqrt(var_a * var_b)) < 0.05);
}

TEST_CASE("empirical covariance of draws matches the model within 5 percent") {
  auto suite = default_suite();
  std::vector<RngStream> rngs = {RngStream(5, 1), RngStream(5, 2), RngStream(5, 3)};
  const int n = 10000;
  std::vector<double> sq(3, 0.0);
  for (int i = 0; i < n; ++i) {
    const auto meas = measure_obstacle(kObs, suite, rngs);
    for (int s = 0; s < 3; ++s) {
      const double dx = meas[s].second.mean.x - kObs.pos.x;
      const double dy = meas[s].second.mean.y - kObs.pos.y;
      sq[s] += 0.5 * (dx * dx + dy * dy);
    }
  }
  for (int s = 0; s < 3; ++s) {
    const double want = suite[s].std * suite[s].std;
    CHECK(std::abs(sq[s] / n - want) / want < 0.05);
  }
}
