#pragma once

#include <map>
#include <optional>
#include <string>

#include "wbcbf/sim.hpp"

namespace wbcbf {

/// Flat key-value configuration with dotted section keys, e.g.
///   sim.dt = 0.1        # seconds
/// '#' starts a comment. Keys outside the schema and values that do not parse
/// are rejected with a diagnostic naming the offending key. Sensor-noise keys
/// accept the sentinel value "preset", meaning "keep the scenario preset".
class Config {
 public:
  static Config defaults();
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  void set(const std::string& key, const std::string& value);

  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  /// For preset-sentinel keys: engaged only when the key holds a number.
  std::optional<double> get_override(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Applies the configuration on top of a scenario preset: geometry and
/// controller parameters come from config keys, sensor noise from the preset
/// unless a sensors.* key overrides it.
ScenarioConfig apply_config(const ScenarioConfig& preset, const Config& cfg);

}  // namespace wbcbf
