#ifndef FNLAB_CONFIG_HPP
#define FNLAB_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fnlab/experiment.hpp"

namespace fnlab {

inline constexpr const char* kToolVersion = "0.1.0";

struct ConfigKey {
  const char* name;
  const char* default_value;
  const char* help;
};

const std::vector<ConfigKey>& config_keys();

/// Flat `key = value` configuration. Lists are comma-separated. Layers apply
/// in order defaults < file < explicit overrides.
class Config {
 public:
  Config();

  // Unknown keys raise ConfigError listing every valid key.
  void load_file(const std::string& path);
  void set(const std::string& key, const std::string& value);
  // "key=value"
  void set_assignment(const std::string& assignment);

  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  long get_long(const std::string& key) const;
  int get_int(const std::string& key) const { return static_cast<int>(get_long(key)); }
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& key) const;

  // Comment lines every output file starts with.
  std::vector<std::string> header(const std::string& command) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

DistributionSpec distribution_spec(const Config& cfg);
RunSettings run_settings(const Config& cfg);
std::vector<RemovalSide> removal_sides(const Config& cfg);

}  // namespace fnlab

#endif  // FNLAB_CONFIG_HPP
