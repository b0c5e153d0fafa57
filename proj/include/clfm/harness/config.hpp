#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "clfm/harness/errors.hpp"

namespace clfm::harness {

/// Sectioned key/value configuration ("section.key" -> text). Every key has a
/// default that depends on experiment.id; files may only set known keys.
class Config {
 public:
  static const std::vector<std::string>& experiment_ids();

  /// Defaults for one experiment.
  static Config defaults(const std::string& experiment_id);
  /// INI text: [section] blocks with key = value lines.
  static Config parse(std::istream& in, const std::string& origin = "<config>");
  static Config load(const std::string& path);

  /// Overrides one key ("section.key"); throws ConfigError for unknown keys.
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::uint64_t get_seed(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  const std::string& experiment() const { return experiment_; }
  /// All resolved values, sorted by key.
  const std::map<std::string, std::string>& values() const { return values_; }
  /// INI rendering of every resolved value.
  std::string to_ini() const;

 private:
  std::string experiment_;
  std::map<std::string, std::string> values_;
};

}  // namespace clfm::harness
