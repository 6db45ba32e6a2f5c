#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrscan/model.hpp"
#include "mrscan/sampler.hpp"
#include "mrscan/synth.hpp"

namespace mrscan {

// Flat view of a configuration: dotted key -> JSON value. Nested objects in
// a config file are flattened ({"scan": {"u": 50}} becomes "scan.u").
class ConfigMap {
 public:
  ConfigMap() = default;
  explicit ConfigMap(const nlohmann::json& document);

  static ConfigMap from_file(const std::filesystem::path& path);

  // Applies `key=value`; the value is read as JSON when it parses, otherwise
  // as a plain string.
  void apply_override(const std::string& assignment);
  void set(const std::string& key, nlohmann::json value) { values_[key] = std::move(value); }

  bool contains(const std::string& key) const { return values_.count(key) > 0; }
  const nlohmann::json& at(const std::string& key) const;

  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;

  // Throws ConfigError naming the first key outside `known` that does not
  // start with one of `open_prefixes`.
  void check_known(const std::set<std::string>& known,
                   const std::vector<std::string>& open_prefixes = {}) const;

  const std::map<std::string, nlohmann::json>& values() const { return values_; }

 private:
  void flatten(const nlohmann::json& node, const std::string& prefix);
  std::map<std::string, nlohmann::json> values_;
};

struct RunConfig {
  ChainConfig chain;
  PriorSpec prior;
};

// Keys read by build_run_config: chain.*, model.dim, prior.*, scan.*, amh.*.
const std::set<std::string>& run_config_keys();

// Builds and validates sampler settings. Unknown keys under the sampler
// prefixes are rejected.
RunConfig build_run_config(const ConfigMap& config);

Distance parse_distance(const std::string& name);
std::string to_string(Distance distance);

// Keys read by build_dgp_spec: dgp.*.
const std::set<std::string>& dgp_config_keys();
DgpSpec build_dgp_spec(const ConfigMap& config);

nlohmann::json to_json(const RunConfig& config);
nlohmann::json to_json(const DgpSpec& spec);

}  // namespace mrscan
