#include "mrscan/config.hpp"

#include <fstream>

#include "mrscan/errors.hpp"

namespace mrscan {

using nlohmann::json;

ConfigMap::ConfigMap(const json& document) {
  if (!document.is_object()) throw ConfigError("configuration must be a JSON object");
  flatten(document, "");
}

void ConfigMap::flatten(const json& node, const std::string& prefix) {
  for (auto it = node.begin(); it != node.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object())
      flatten(*it, key);
    else
      values_[key] = *it;
  }
}

ConfigMap ConfigMap::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return ConfigMap(json::parse(in, nullptr, true, true));
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
}

void ConfigMap::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  values_[key] = std::move(value);
}

const json& ConfigMap::at(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing configuration key " + key);
  return it->second;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (!it->second.is_number()) throw ConfigError(key + " must be a number");
  return it->second.get<double>();
}

int ConfigMap::get_int(const std::string& key, int fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (!it->second.is_number_integer()) throw ConfigError(key + " must be an integer");
  return it->second.get<int>();
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (!it->second.is_boolean()) throw ConfigError(key + " must be true or false");
  return it->second.get<bool>();
}

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (!it->second.is_string()) throw ConfigError(key + " must be a string");
  return it->second.get<std::string>();
}

void ConfigMap::check_known(const std::set<std::string>& known,
                            const std::vector<std::string>& open_prefixes) const {
  for (const auto& [key, value] : values_) {
    if (known.count(key)) continue;
    bool open = false;
    for (const auto& p : open_prefixes) open = open || key.rfind(p, 0) == 0;
    if (!open) throw ConfigError("unknown configuration key " + key);
  }
}

Distance parse_distance(const std::string& name) {
  if (name == "euclidean") return Distance::Euclidean;
  if (name == "squared_euclidean") return Distance::SquaredEuclidean;
  throw ConfigError("unknown prior.distance '" + name +
                    "' (expected euclidean or squared_euclidean)");
}

std::string to_string(Distance distance) {
  return distance == Distance::Euclidean ? "euclidean" : "squared_euclidean";
}

const std::set<std::string>& run_config_keys() {
  static const std::set<std::string> keys = {
      "chain.iterations", "chain.burn_in",  "chain.thinning",     "chain.seed",
      "chain.recenter_every", "chain.record_acceptance", "chain.start", "chain.pilot_iterations",
      "model.dim",
      "prior.sigma2",     "prior.sigma2_eps", "prior.alpha_mean", "prior.alpha_var",
      "prior.distance",   "scan.strategy",  "scan.q0",            "scan.u",
      "scan.c",           "scan.epsilon",   "scan.K",             "scan.partition_file",
      "scan.damping",     "scan.V",         "amh.variant",        "amh.psi",
      "amh.beta",         "amh.v",          "amh.delta0",         "amh.target"};
  return keys;
}

RunConfig build_run_config(const ConfigMap& cfg) {
  for (const auto& [key, value] : cfg.values()) {
    for (const char* prefix : {"chain.", "model.", "prior.", "scan.", "amh."})
      if (key.rfind(prefix, 0) == 0 && !run_config_keys().count(key))
        throw ConfigError("unknown configuration key " + key);
  }
  RunConfig rc;
  auto& c = rc.chain;
  c.iterations = cfg.get_int("chain.iterations", c.iterations);
  c.burn_in = cfg.get_int("chain.burn_in", c.burn_in);
  c.thinning = cfg.get_int("chain.thinning", c.thinning);
  if (cfg.contains("chain.seed")) {
    const auto& s = cfg.at("chain.seed");
    if (!s.is_number_integer() || s.get<long long>() < 0)
      throw ConfigError("chain.seed must be a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  c.recenter_every = cfg.get_int("chain.recenter_every", c.recenter_every);
  c.record_acceptance = cfg.get_bool("chain.record_acceptance", c.record_acceptance);
  c.start = parse_start_mode(cfg.get_string("chain.start", to_string(c.start)));
  c.pilot_iterations = cfg.get_int("chain.pilot_iterations", c.pilot_iterations);
  c.dim = cfg.get_int("model.dim", c.dim);

  auto& s = c.scan;
  s.strategy = parse_strategy(cfg.get_string("scan.strategy", to_string(s.strategy)));
  if (cfg.contains("scan.q0")) s.q0 = cfg.get_double("scan.q0", 1.0);
  s.u = cfg.get_int("scan.u", s.u);
  s.c = cfg.get_double("scan.c", s.c);
  s.epsilon = cfg.get_double("scan.epsilon", s.epsilon);
  s.n_blocks = cfg.get_int("scan.K", s.n_blocks);
  s.partition_file = cfg.get_string("scan.partition_file", s.partition_file);
  s.damping = parse_damping(cfg.get_string("scan.damping", to_string(s.damping)));
  s.sub_iterations = cfg.get_int("scan.V", s.sub_iterations);

  auto& a = c.amh;
  a.variant = parse_amh_variant(cfg.get_string("amh.variant", to_string(a.variant)));
  a.psi = cfg.get_double("amh.psi", a.psi);
  a.beta = cfg.get_double("amh.beta", a.beta);
  a.v = cfg.get_int("amh.v", a.v);
  a.delta0 = cfg.get_double("amh.delta0", a.delta0);
  a.target = cfg.get_double("amh.target", a.target);

  auto& p = rc.prior;
  p.sigma2 = cfg.get_double("prior.sigma2", p.sigma2);
  p.sigma2_eps = cfg.get_double("prior.sigma2_eps", p.sigma2_eps);
  p.alpha_prior_mean = cfg.get_double("prior.alpha_mean", p.alpha_prior_mean);
  p.alpha_prior_var = cfg.get_double("prior.alpha_var", p.alpha_prior_var);
  p.distance = parse_distance(cfg.get_string("prior.distance", to_string(p.distance)));

  c.validate();
  p.validate();
  return rc;
}

const std::set<std::string>& dgp_config_keys() {
  static const std::set<std::string> keys = {"dgp.preset", "dgp.nodes",      "dgp.seed",
                                             "dgp.radius", "dgp.sigma2_eps", "dgp.alpha"};
  return keys;
}

DgpSpec build_dgp_spec(const ConfigMap& cfg) {
  for (const auto& [key, value] : cfg.values())
    if (key.rfind("dgp.", 0) == 0 && !dgp_config_keys().count(key))
      throw ConfigError("unknown configuration key " + key);
  DgpSpec spec = dgp_preset(cfg.get_string("dgp.preset", "circular-poisson"));
  spec.n_nodes = cfg.get_int("dgp.nodes", spec.n_nodes);
  if (cfg.contains("dgp.seed")) {
    const auto& s = cfg.at("dgp.seed");
    if (!s.is_number_integer() || s.get<long long>() < 0)
      throw ConfigError("dgp.seed must be a non-negative integer");
    spec.seed = s.get<std::uint64_t>();
  }
  spec.radius = cfg.get_double("dgp.radius", spec.radius);
  spec.sigma2_eps = cfg.get_double("dgp.sigma2_eps", spec.sigma2_eps);
  if (cfg.contains("dgp.alpha")) {
    const auto& a = cfg.at("dgp.alpha");
    if (a.is_number()) {
      spec.alpha = {a.get<double>()};
    } else if (a.is_array()) {
      spec.alpha.clear();
      for (const auto& v : a) {
        if (!v.is_number()) throw ConfigError("dgp.alpha entries must be numbers");
        spec.alpha.push_back(v.get<double>());
      }
    } else {
      throw ConfigError("dgp.alpha must be a number or an array");
    }
  }
  spec.validate();
  return spec;
}

json to_json(const RunConfig& rc) {
  const auto& c = rc.chain;
  json j;
  j["chain"] = {{"iterations", c.iterations},         {"burn_in", c.burn_in},
                {"thinning", c.thinning},             {"seed", c.seed},
                {"recenter_every", c.recenter_every}, {"record_acceptance", c.record_acceptance},
                {"start", to_string(c.start)},        {"pilot_iterations", c.pilot_iterations}};
  j["model"] = {{"dim", c.dim}};
  j["scan"] = {{"strategy", to_string(c.scan.strategy)},
               {"q0", c.scan.initial_q()},
               {"u", c.scan.u},
               {"c", c.scan.c},
               {"epsilon", c.scan.epsilon},
               {"K", c.scan.n_blocks},
               {"partition_file", c.scan.partition_file},
               {"damping", to_string(c.scan.damping)},
               {"V", c.scan.sub_iterations}};
  j["amh"] = {{"variant", to_string(c.amh.variant)}, {"psi", c.amh.psi},
              {"beta", c.amh.beta},                  {"v", c.amh.v},
              {"delta0", c.amh.delta0},              {"target", c.amh.target}};
  j["prior"] = {{"sigma2", rc.prior.sigma2},
                {"sigma2_eps", rc.prior.sigma2_eps},
                {"alpha_mean", rc.prior.alpha_prior_mean},
                {"alpha_var", rc.prior.alpha_prior_var},
                {"distance", to_string(rc.prior.distance)}};
  return j;
}

json to_json(const DgpSpec& spec) {
  json fam = json::array();
  for (const auto& f : spec.families) fam.push_back(to_string(f.kind));
  return {{"layout", spec.layout == Layout::Circle ? "circle" : "random_prior"},
          {"nodes", spec.n_nodes},
          {"dim", spec.dim},
          {"layers", spec.n_layers},
          {"times", spec.n_times},
          {"alpha", spec.alpha},
          {"families", fam},
          {"sigma2_eps", spec.sigma2_eps},
          {"radius", spec.radius},
          {"seed", spec.seed}};
}

}  // namespace mrscan
