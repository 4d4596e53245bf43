#include "wbcbf/config.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wbcbf {

namespace {

enum class KeyType { f64, i64, u64, f64_or_preset };

struct KeySpec {
  const char* key;
  KeyType type;
  const char* default_value;
};

// Every scenario- and controller-level default lives here so the study can be
// re-parameterized without recompiling.
constexpr std::array<KeySpec, 52> kSchema{{
    {"sim.dt", KeyType::f64, "0.1"},
    {"sim.max_time_s", KeyType::f64, "30"},
    {"sim.runs", KeyType::i64, "100"},
    {"sim.base_seed", KeyType::u64, "42"},
    {"sim.past_conflict_margin_m", KeyType::f64, "20"},
    {"sim.success_clearance_m", KeyType::f64, "2.8"},

    {"vehicle.wheelbase_m", KeyType::f64, "2.9"},
    {"vehicle.accel_min", KeyType::f64, "-6"},
    {"vehicle.accel_max", KeyType::f64, "3"},
    {"vehicle.steer_min", KeyType::f64, "-0.5"},
    {"vehicle.steer_max", KeyType::f64, "0.5"},

    {"mpc.horizon", KeyType::i64, "10"},
    {"mpc.q_pos", KeyType::f64, "10"},
    {"mpc.q_heading", KeyType::f64, "1"},
    {"mpc.q_speed", KeyType::f64, "1"},
    {"mpc.r_accel", KeyType::f64, "0.1"},
    {"mpc.r_steer", KeyType::f64, "1.0"},
    {"mpc.accel_rate", KeyType::f64, "30"},
    {"mpc.steer_rate", KeyType::f64, "3"},

    {"qp.tol", KeyType::f64, "1e-6"},
    {"qp.max_iter", KeyType::i64, "4000"},

    {"barrier.vehicle_radius_m", KeyType::f64, "1.8"},
    {"barrier.obstacle_radius_m", KeyType::f64, "1.0"},
    {"barrier.safety_dist_m", KeyType::f64, "3.0"},
    {"barrier.alpha_gain", KeyType::f64, "1.0"},
    {"barrier.epsilon", KeyType::f64, "0.05"},

    {"risk.ego_samples", KeyType::i64, "10"},
    {"risk.wb_samples", KeyType::i64, "10"},
    {"risk.gamma_tiebreak", KeyType::f64, "1e-6"},

    {"wb.tol", KeyType::f64, "1e-10"},
    {"wb.max_iter", KeyType::i64, "200"},
    {"wb.regularization", KeyType::f64, "1e-12"},

    {"fusion.lambda_lidar", KeyType::f64, "0.4"},
    {"fusion.lambda_camera", KeyType::f64, "0.4"},
    {"fusion.lambda_v2x", KeyType::f64, "0.2"},

    {"scenario.av_start_x", KeyType::f64, "0"},
    {"scenario.av_start_y", KeyType::f64, "0"},
    {"scenario.av_speed", KeyType::f64, "8"},
    {"scenario.ref_speed", KeyType::f64, "8"},
    {"scenario.path_start_x", KeyType::f64, "-10"},
    {"scenario.path_end_x", KeyType::f64, "120"},
    {"scenario.conflict_x", KeyType::f64, "50"},
    {"scenario.vru_speed", KeyType::f64, "4.5"},

    {"sensors.gps_std", KeyType::f64_or_preset, "preset"},
    {"sensors.gps_bias_east", KeyType::f64_or_preset, "preset"},
    {"sensors.gps_bias_north", KeyType::f64_or_preset, "preset"},
    {"sensors.lidar_std", KeyType::f64_or_preset, "preset"},
    {"sensors.camera_std", KeyType::f64_or_preset, "preset"},
    {"sensors.v2x_std", KeyType::f64_or_preset, "preset"},
    {"sensors.v2x_bias_east", KeyType::f64_or_preset, "preset"},
    {"sensors.v2x_bias_north", KeyType::f64_or_preset, "preset"},
    {"sensors.lidar_bias_east", KeyType::f64_or_preset, "preset"},
}};

const KeySpec* find_spec(const std::string& key) {
  for (const auto& s : kSchema) {
    if (key == s.key) return &s;
  }
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parses_as_double(const std::string& v, double* out = nullptr) {
  double d = 0.0;
  const char* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, d);
  if (ec != std::errc{} || p != end) return false;
  if (out != nullptr) *out = d;
  return true;
}

bool parses_as_signed(const std::string& v, long long* out = nullptr) {
  long long d = 0;
  const char* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, d);
  if (ec != std::errc{} || p != end) return false;
  if (out != nullptr) *out = d;
  return true;
}

bool parses_as_unsigned(const std::string& v, unsigned long long* out = nullptr) {
  unsigned long long d = 0;
  const char* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, d);
  if (ec != std::errc{} || p != end) return false;
  if (out != nullptr) *out = d;
  return true;
}

}  // namespace

Config Config::defaults() {
  Config c;
  for (const auto& s : kSchema) c.values_[s.key] = s.default_value;
  return c;
}

Config Config::from_string(const std::string& text) {
  Config c = defaults();
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected 'key = value', got '" + line + "'");
    }
    c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str());
}

void Config::set(const std::string& key, const std::string& value) {
  const KeySpec* spec = find_spec(key);
  if (spec == nullptr) {
    throw std::runtime_error("unknown config key '" + key + "'");
  }
  bool ok = false;
  switch (spec->type) {
    case KeyType::f64: ok = parses_as_double(value); break;
    case KeyType::i64: ok = parses_as_signed(value); break;
    case KeyType::u64: ok = parses_as_unsigned(value); break;
    case KeyType::f64_or_preset: ok = value == "preset" || parses_as_double(value); break;
  }
  if (!ok) {
    throw std::runtime_error("config key '" + key + "': cannot parse value '" + value + "'");
  }
  values_[key] = value;
}

double Config::get_double(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::logic_error("config key '" + key + "' not in schema");
  double d = 0.0;
  if (!parses_as_double(it->second, &d)) {
    throw std::runtime_error("config key '" + key + "' holds non-numeric '" + it->second + "'");
  }
  return d;
}

int Config::get_int(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::logic_error("config key '" + key + "' not in schema");
  long long d = 0;
  if (!parses_as_signed(it->second, &d)) {
    throw std::runtime_error("config key '" + key + "' holds non-integer '" + it->second + "'");
  }
  return static_cast<int>(d);
}

std::uint64_t Config::get_u64(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::logic_error("config key '" + key + "' not in schema");
  unsigned long long d = 0;
  if (!parses_as_unsigned(it->second, &d)) {
    throw std::runtime_error("config key '" + key + "' holds non-integer '" + it->second + "'");
  }
  return d;
}

std::optional<double> Config::get_override(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::logic_error("config key '" + key + "' not in schema");
  double d = 0.0;
  if (parses_as_double(it->second, &d)) return d;
  return std::nullopt;
}

ScenarioConfig apply_config(const ScenarioConfig& preset, const Config& cfg) {
  ScenarioConfig out = preset;

  out.dt = cfg.get_double("sim.dt");
  out.max_time = cfg.get_double("sim.max_time_s");
  out.runs = cfg.get_int("sim.runs");
  out.base_seed = cfg.get_u64("sim.base_seed");
  out.past_conflict_margin = cfg.get_double("sim.past_conflict_margin_m");
  out.success_clearance = cfg.get_double("sim.success_clearance_m");

  out.mpc.dt = out.dt;
  out.mpc.wheelbase = cfg.get_double("vehicle.wheelbase_m");
  out.mpc.limits.accel_min = cfg.get_double("vehicle.accel_min");
  out.mpc.limits.accel_max = cfg.get_double("vehicle.accel_max");
  out.mpc.limits.steer_min = cfg.get_double("vehicle.steer_min");
  out.mpc.limits.steer_max = cfg.get_double("vehicle.steer_max");
  out.mpc.horizon = cfg.get_int("mpc.horizon");
  out.mpc.q_pos = cfg.get_double("mpc.q_pos");
  out.mpc.q_heading = cfg.get_double("mpc.q_heading");
  out.mpc.q_speed = cfg.get_double("mpc.q_speed");
  out.mpc.r_accel = cfg.get_double("mpc.r_accel");
  out.mpc.r_steer = cfg.get_double("mpc.r_steer");
  out.mpc.accel_rate = cfg.get_double("mpc.accel_rate");
  out.mpc.steer_rate = cfg.get_double("mpc.steer_rate");
  out.mpc.qp_tol = cfg.get_double("qp.tol");
  out.mpc.qp_max_iter = cfg.get_int("qp.max_iter");

  out.barrier.vehicle_radius = cfg.get_double("barrier.vehicle_radius_m");
  out.barrier.obstacle_radius = cfg.get_double("barrier.obstacle_radius_m");
  out.barrier.safety_dist = cfg.get_double("barrier.safety_dist_m");
  out.barrier.alpha_gain = cfg.get_double("barrier.alpha_gain");
  out.barrier.epsilon = cfg.get_double("barrier.epsilon");

  out.ego_samples = cfg.get_int("risk.ego_samples");
  out.barycenter_samples = cfg.get_int("risk.wb_samples");
  out.gamma_tiebreak = cfg.get_double("risk.gamma_tiebreak");
  out.barycenter.tol = cfg.get_double("wb.tol");
  out.barycenter.max_iter = cfg.get_int("wb.max_iter");
  out.barycenter.regularization = cfg.get_double("wb.regularization");

  // Crossing geometry: straight East-bound path; the VRU crosses northbound
  // through the conflict point, timed to meet the unimpeded AV there.
  const double y0 = cfg.get_double("scenario.av_start_y");
  const double ref_speed = cfg.get_double("scenario.ref_speed");
  out.path_waypoints = {{{cfg.get_double("scenario.path_start_x"), y0}, ref_speed},
                        {{cfg.get_double("scenario.path_end_x"), y0}, ref_speed}};
  out.av_initial.pos = {cfg.get_double("scenario.av_start_x"), y0};
  out.av_initial.heading = 0.0;
  out.av_initial.speed = cfg.get_double("scenario.av_speed");
  out.conflict_point = {cfg.get_double("scenario.conflict_x"), y0};
  const double vru_speed = cfg.get_double("scenario.vru_speed");
  const double time_to_conflict =
      (out.conflict_point - out.av_initial.pos).norm() / ref_speed;
  out.vru_initial.pos = {out.conflict_point.x,
                         out.conflict_point.y - vru_speed * time_to_conflict};
  out.vru_initial.vel = {0.0, vru_speed};

  for (auto& s : out.suite) {
    switch (s.kind) {
      case SensorKind::LiDAR: s.weight = cfg.get_double("fusion.lambda_lidar"); break;
      case SensorKind::Camera: s.weight = cfg.get_double("fusion.lambda_camera"); break;
      case SensorKind::V2X: s.weight = cfg.get_double("fusion.lambda_v2x"); break;
      case SensorKind::GPS: break;
    }
  }

  if (auto v = cfg.get_override("sensors.gps_std")) out.gps.std = *v;
  if (auto v = cfg.get_override("sensors.gps_bias_east")) out.gps.bias.x = *v;
  if (auto v = cfg.get_override("sensors.gps_bias_north")) out.gps.bias.y = *v;
  for (auto& s : out.suite) {
    if (s.kind == SensorKind::LiDAR) {
      if (auto v = cfg.get_override("sensors.lidar_std")) s.std = *v;
      if (auto v = cfg.get_override("sensors.lidar_bias_east")) s.bias.x = *v;
    } else if (s.kind == SensorKind::Camera) {
      if (auto v = cfg.get_override("sensors.camera_std")) s.std = *v;
    } else if (s.kind == SensorKind::V2X) {
      if (auto v = cfg.get_override("sensors.v2x_std")) s.std = *v;
      if (auto v = cfg.get_override("sensors.v2x_bias_east")) s.bias.x = *v;
      if (auto v = cfg.get_override("sensors.v2x_bias_north")) s.bias.y = *v;
    }
  }
  return out;
}

}  // namespace wbcbf
