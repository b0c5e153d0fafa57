#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "json.hpp"

#include "clfm/ad/graph.hpp"
#include "clfm/harness/errors.hpp"
#include "clfm/nets/mlp.hpp"

namespace clfm::harness {

inline constexpr int kCheckpointFormat = 1;

/// Text checkpoint: a header line, one JSON document, and a trailing
/// "sha256 <hex>" line over the JSON text. Parameter blobs are row-major
/// little-endian doubles in base 16.
struct Checkpoint {
  int format = kCheckpointFormat;
  std::string code_version;
  std::uint64_t seed = 0;
  std::string config_digest;
  nlohmann::json architecture;
  nlohmann::json config;
  nlohmann::json extra;  // free-form (e.g. encoder standardization)
  std::map<std::string, ad::Matrix> parameters;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
/// Throws DigestError on truncation or corruption, CheckpointMismatch on a
/// format version other than kCheckpointFormat.
Checkpoint load_checkpoint(const std::string& path);

/// Rejects a checkpoint whose architecture echo differs from `expected`.
void require_architecture(const Checkpoint& ckpt, const nlohmann::json& expected);

std::string encode_matrix(const ad::Matrix& m);
ad::Matrix decode_matrix(const std::string& hex, Eigen::Index rows, Eigen::Index cols);

/// Copies named parameters into a checkpoint / back into live leaves.
void store_parameters(Checkpoint& ckpt, const nets::ParamList& params);
void restore_parameters(const Checkpoint& ckpt, const nets::ParamList& params);

}  // namespace clfm::harness
