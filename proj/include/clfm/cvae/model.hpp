#pragma once

#include <random>
#include <string>
#include <vector>

#include "clfm/cvae/measurement.hpp"
#include "clfm/nets/encoder.hpp"

namespace clfm::cvae {

/// Encoder plus one DeepONet decoder per field. Field 0 is the observed
/// field u; any further decoders model hidden fields (v) that only enter
/// through physics constraints.
struct VaeModel {
  nets::Encoder encoder;
  std::vector<nets::DeepOnet> decoders;
  std::vector<std::string> field_names;
  MeasurementOperator measurement;
  nets::DomainBox box;

  static VaeModel build(const nets::EncoderSpec& enc, const nets::DecoderSpec& dec,
                        const nets::DomainBox& box, const MeasurementOperator& measurement,
                        const std::vector<std::string>& fields, std::mt19937_64& rng);

  int latent_dim() const { return encoder.latent_dim(); }
  /// Every trainable leaf with a stable dotted name.
  nets::ParamList parameters() const;
  /// Decodes every field at `coords` for latent rows `z`.
  std::vector<Matrix> decode_all(const Matrix& z, const Matrix& coords) const;
};

}  // namespace clfm::cvae
