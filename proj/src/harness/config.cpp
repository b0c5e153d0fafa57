#include "clfm/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace clfm::harness {

namespace {

using Table = std::map<std::string, std::string>;

Table common_defaults() {
  return {
      {"experiment.id", "gp_reconstruction"},
      {"experiment.seed", "1"},
      {"experiment.output_dir", "out"},
      {"experiment.eval_seed", "0"},  // 0: derive from the training seed
      {"experiment.n_eval_samples", "1000"},
      {"experiment.eval_grid", "100"},
      {"data.n_samples", "1000"},
      {"data.sensors", "3"},
      {"data.resolution", "1024"},
      {"data.nx2", "4"},
      {"data.nx3", "4"},
      {"data.n_freq", "64"},
      {"data.f_max", "3.0"},
      {"data.sensor_columns", "2"},
      {"network.latent_dim", "4"},
      {"network.width_p", "64"},
      {"network.encoder_layers", "3"},
      {"network.encoder_width", "128"},
      {"network.branch_kind", "mlp"},
      {"network.branch_layers", "2"},
      {"network.branch_width", "128"},
      {"network.trunk_layers", "2"},
      {"network.trunk_width", "128"},
      {"vae.batch_size", "256"},
      {"vae.learning_rate", "0.001"},
      {"vae.epochs", "2000"},
      {"vae.lambda_kl", "1e-6"},
      {"vae.lambda_r", "0.1"},
      {"vae.lambda_f", "0"},
      {"vae.keep_best", "true"},
      {"constraint.kind", "covariance"},
      {"constraint.collocation", "50"},
      {"constraint.h", "0"},  // 0: 1e-3 x domain length
      {"constraint.boundary", "true"},
      {"constraint.coherence_target", "coh"},  // or coh_squared
      {"flow.batch_size", "128"},
      {"flow.learning_rate", "0.001"},
      {"flow.epochs", "500"},
      {"flow.noise", "0.01"},
      {"flow.sample_z0", "false"},
      {"flow.layers", "3"},
      {"flow.width", "128"},
      {"flow.steps", "100"},
  };
}

Table experiment_defaults(const std::string& id) {
  Table t = common_defaults();
  t["experiment.id"] = id;
  if (id == "poisson_inference") {
    t["data.n_samples"] = "100";
    t["data.sensors"] = "25";
    t["vae.lambda_r"] = "0";
    t["vae.lambda_f"] = "0.001";
    t["vae.epochs"] = "4000";
    t["constraint.kind"] = "poisson";
    t["flow.epochs"] = "1000";
  } else if (id == "wind_verification") {
    t["data.n_samples"] = "2000";
    t["constraint.kind"] = "none";
    t["vae.lambda_r"] = "0";
    t["vae.epochs"] = "0";
    t["flow.epochs"] = "0";
  } else if (id == "wind_desk") {
    t["data.n_samples"] = "200";
    t["network.latent_dim"] = "16";
    t["network.branch_kind"] = "residual";
    t["network.trunk_layers"] = "3";
    t["vae.batch_size"] = "128";
    t["vae.learning_rate"] = "0.0005";
    t["vae.epochs"] = "200";
    t["vae.lambda_kl"] = "1e-7";
    t["vae.lambda_r"] = "0.01";
    t["constraint.kind"] = "coherence";
    t["constraint.collocation"] = "4";
    t["flow.epochs"] = "200";
    t["experiment.n_eval_samples"] = "200";
  }
  return t;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

const std::vector<std::string>& Config::experiment_ids() {
  static const std::vector<std::string> ids{"gp_reconstruction", "poisson_inference",
                                            "wind_verification", "wind_desk"};
  return ids;
}

Config Config::defaults(const std::string& experiment_id) {
  const auto& ids = experiment_ids();
  if (std::find(ids.begin(), ids.end(), experiment_id) == ids.end()) {
    throw ConfigError("unknown experiment id '" + experiment_id + "'");
  }
  Config c;
  c.experiment_ = experiment_id;
  c.values_ = experiment_defaults(experiment_id);
  return c;
}

Config Config::parse(std::istream& in, const std::string& origin) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  std::vector<std::pair<std::string, std::string>> entries;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigError(origin + ": key '" + section + "' outside any section");
    }
    for (const auto& [key, value] : body) {
      entries.emplace_back(section + "." + key, trim(value.get_value<std::string>()));
    }
  }
  std::string id = "gp_reconstruction";
  for (const auto& [k, v] : entries) {
    if (k == "experiment.id") id = v;
  }
  Config c = defaults(id);
  for (const auto& [k, v] : entries) c.set(k, v);
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse(in, path);
}

void Config::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  if (key == "experiment.id" && value != experiment_) {
    throw ConfigError("experiment.id cannot be overridden");
  }
  it->second = value;
}

std::string Config::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
  return it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string s = get_string(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': '" + s + "' is not a number");
  }
}

int Config::get_int(const std::string& key) const {
  const std::string s = get_string(key);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("config key '" + key + "': '" + s + "' is not an integer");
  }
  return v;
}

std::uint64_t Config::get_seed(const std::string& key) const {
  const std::string s = get_string(key);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("config key '" + key + "': '" + s + "' is not a seed");
  }
  return v;
}

bool Config::get_bool(const std::string& key) const {
  const std::string s = get_string(key);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("config key '" + key + "': '" + s + "' is not a boolean");
}

std::string Config::to_ini() const {
  std::ostringstream os;
  std::string section;
  for (const auto& [k, v] : values_) {
    const auto dot = k.find('.');
    const std::string s = k.substr(0, dot);
    if (s != section) {
      if (!section.empty()) os << '\n';
      os << '[' << s << "]\n";
      section = s;
    }
    os << k.substr(dot + 1) << " = " << v << '\n';
  }
  return os.str();
}

}  // namespace clfm::harness
