#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace clfm::harness {

/// Field observations at a fixed set of coordinates.
///
/// CSV layout: a block of "# key=value" header lines (format, experiment,
/// seed, code version, then every config value as "config.<key>"), a column
/// line "sample_id,x0,..,x{d-1},<channel>..", then one row per
/// (sample, coordinate) with samples outer and coordinates inner.
struct Dataset {
  std::map<std::string, std::string> header;
  Eigen::MatrixXd coords;                 // M x d
  std::vector<std::string> channels;      // e.g. {"u"}
  std::vector<Eigen::MatrixXd> values;    // one N x M matrix per channel

  Eigen::Index samples() const { return values.empty() ? 0 : values.front().rows(); }
  /// Channels side by side, N x (M * channels).
  Eigen::MatrixXd observations() const;
};

void write_dataset(const std::string& path, const Dataset& data);
Dataset read_dataset(const std::string& path);

/// CLFM_VERSION as captured at build time.
std::string code_version();

}  // namespace clfm::harness
