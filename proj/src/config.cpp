#include "fnlab/config.hpp"

#include <fstream>
#include <sstream>

#include "fnlab/csv.hpp"

namespace fnlab {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"K", "5", "number of classes"},
      {"d", "1000", "patch dimension"},
      {"feature_norm", "1", "feature norm ||u_k|| (one value, or K values)"},
      {"shared_dim", "-1", "shared noise directions p (-1: d - 2K)"},
      {"shared_eig", "0.5", "shared noise eigenvalue"},
      {"gamma_ratio", "1", "target noise correlation ratio (sets the private eigenvalue)"},
      {"private_eig", "", "explicit private eigenvalues (overrides gamma_ratio)"},
      {"class_probs", "", "class probabilities (empty: uniform)"},
      {"noise_family", "gaussian", "gaussian or uniform"},
      {"noise_matrices", "", "file with explicit K x (d x d) noise transforms"},
      {"per_class", "100", "training samples per class (0: draw n labels from class_probs)"},
      {"n", "0", "training samples when per_class = 0"},
      {"m", "100", "neurons per class"},
      {"sigma0", "0.01", "initialization standard deviation"},
      {"eta", "0.05", "learning rate"},
      {"T", "500", "iteration budget"},
      {"epsilon", "0.1", "target training loss"},
      {"log_every", "1", "activation-set logging cadence"},
      {"L", "1", "long-tail threshold multiplier"},
      {"n_test", "1000", "test draws per class"},
      {"draw_cap", "1000000", "rejection-sampling draw cap per class"},
      {"longtail_eval", "1", "evaluate long-tailed accuracy"},
      {"c1", "1", "feature bound constant"},
      {"c2", "1", "noise bound constant"},
      {"C", "1", "condition constant"},
      {"delta", "0.1", "condition probability parameter"},
      {"seed", "0", "master seed"},
      {"workers", "1", "parallel sweep workers"},
      {"axis1", "feature_norm", "sweep axis 1: feature_norm or per_class"},
      {"axis1_values", "0.001,3.8", "sweep axis 1 values"},
      {"axis2", "gamma_ratio", "sweep axis 2: gamma_ratio or feature_norm"},
      {"axis2_values", "1,1400", "sweep axis 2 values"},
      {"replicates", "1", "seeds per sweep cell"},
      {"label_column", "0", "label column of external CSV input"},
      {"header", "0", "external CSV input has a header row"},
      {"standardize", "0", "standardize external features"},
      {"fractions", "0.1", "removal fractions (nested, one ranking)"},
      {"sides", "high,low", "removal sides"},
  };
  return keys;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void unknown_key(const std::string& key) {
  std::string msg = "unknown config key '" + key + "'; valid keys:";
  for (const auto& k : config_keys()) msg += std::string(" ") + k.name;
  throw ConfigError(msg);
}

}  // namespace

Config::Config() {
  for (const auto& k : config_keys()) values_[k.name] = k.default_value;
}

void Config::set(const std::string& key, const std::string& value) {
  const std::string k = trim(key);
  if (!values_.count(k)) unknown_key(k);
  values_[k] = trim(value);
}

void Config::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

void Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::string line;
  long ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(ln) + ": expected key = value");
    set(t.substr(0, eq), t.substr(eq + 1));
  }
}

const std::string& Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) unknown_key(key);
  return it->second;
}

double Config::get_double(const std::string& key) const {
  try {
    return csv::parse_double(get(key), 0, 0);
  } catch (const ParseError&) {
    throw ConfigError("config key '" + key + "' must be a number, got '" + get(key) + "'");
  }
}

long Config::get_long(const std::string& key) const {
  try {
    return csv::parse_long(get(key), 0, 0);
  } catch (const ParseError&) {
    throw ConfigError("config key '" + key + "' must be an integer, got '" + get(key) + "'");
  }
}

std::uint64_t Config::get_u64(const std::string& key) const {
  const std::string& v = get(key);
  try {
    std::size_t used = 0;
    const auto out = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' must be a non-negative integer, got '" + v + "'");
  }
}

bool Config::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no" || v.empty()) return false;
  throw ConfigError("config key '" + key + "' must be a boolean, got '" + v + "'");
}

std::vector<std::string> Config::get_strings(const std::string& key) const {
  std::vector<std::string> out;
  const std::string& v = get(key);
  if (trim(v).empty()) return out;
  for (auto cell : csv::split(v)) out.push_back(trim(std::string(cell)));
  return out;
}

std::vector<double> Config::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : get_strings(key)) {
    try {
      out.push_back(csv::parse_double(s, 0, 0));
    } catch (const ParseError&) {
      throw ConfigError("config key '" + key + "' must be a list of numbers, got '" + get(key) + "'");
    }
  }
  return out;
}

std::vector<std::string> Config::header(const std::string& command) const {
  std::string resolved;
  for (const auto& [k, v] : values_) {
    if (k == "workers") continue;  // never affects results
    if (!resolved.empty()) resolved += ';';
    resolved += k + "=" + v;
  }
  return {std::string("tool_version=") + kToolVersion, "command=" + command, "resolved_config=" + resolved};
}

namespace {

std::vector<double> per_class(const Config& cfg, const std::string& key, int K) {
  auto v = cfg.get_doubles(key);
  if (v.size() == 1) v.assign(static_cast<std::size_t>(K), v.front());
  if (v.size() != static_cast<std::size_t>(K))
    throw ConfigError("config key '" + key + "' needs 1 or K=" + std::to_string(K) + " values");
  return v;
}

}  // namespace

DistributionSpec distribution_spec(const Config& cfg) {
  DistributionSpec spec;
  spec.num_classes = cfg.get_int("K");
  spec.dim = cfg.get_int("d");
  if (spec.num_classes < 1) throw ConfigError("K must be >= 1");
  spec.shared_dim = cfg.get_int("shared_dim");
  spec.shared_eig = cfg.get_double("shared_eig");
  spec.feature_norms = per_class(cfg, "feature_norm", spec.num_classes);
  spec.noise_family = parse_noise_family(cfg.get("noise_family"));
  spec.seed = cfg.get_u64("seed");
  if (cfg.get_strings("class_probs").empty())
    spec.class_probs.assign(static_cast<std::size_t>(spec.num_classes), 1.0 / spec.num_classes);
  else
    spec.class_probs = per_class(cfg, "class_probs", spec.num_classes);
  if (!cfg.get_strings("private_eig").empty()) {
    spec.private_eigs = per_class(cfg, "private_eig", spec.num_classes);
  } else {
    const double ratio = cfg.get_double("gamma_ratio");
    const int p = spec.resolved_shared_dim();
    const double g = ratio == 1.0 ? 0.0 : gamma_for_target_ratio(ratio, p, spec.shared_eig);
    spec.private_eigs.assign(static_cast<std::size_t>(spec.num_classes), g);
  }
  spec.validate();
  return spec;
}

RunSettings run_settings(const Config& cfg) {
  RunSettings s;
  s.spec = distribution_spec(cfg);
  const int per = cfg.get_int("per_class");
  if (per < 1) throw ConfigError("experiments need per_class >= 1");
  s.class_counts.assign(static_cast<std::size_t>(s.spec.num_classes), per);
  s.width = cfg.get_int("m");
  s.init_sigma = cfg.get_double("sigma0");
  s.train.eta = cfg.get_double("eta");
  s.train.max_iters = cfg.get_int("T");
  s.train.target_loss = cfg.get_double("epsilon");
  s.train.log_every = cfg.get_int("log_every");
  s.train.record_history = false;
  s.train.validate();
  s.longtail.L = cfg.get_double("L");
  s.longtail.validate();
  s.n_test = cfg.get_int("n_test");
  s.draw_cap = cfg.get_long("draw_cap");
  s.eval_longtail = cfg.get_bool("longtail_eval");
  s.seed = cfg.get_u64("seed");
  s.noise_matrices = cfg.get("noise_matrices");
  if (s.n_test < 1) throw ConfigError("n_test must be >= 1");
  return s;
}

std::vector<RemovalSide> removal_sides(const Config& cfg) {
  std::vector<RemovalSide> out;
  for (const auto& s : cfg.get_strings("sides")) {
    if (s == "high")
      out.push_back(RemovalSide::High);
    else if (s == "low")
      out.push_back(RemovalSide::Low);
    else
      throw ConfigError("sides entries must be 'high' or 'low', got '" + s + "'");
  }
  if (out.empty()) throw ConfigError("sides must name at least one side");
  return out;
}

}  // namespace fnlab
