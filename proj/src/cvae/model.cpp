#include "clfm/cvae/model.hpp"

#include <stdexcept>

namespace clfm::cvae {

VaeModel VaeModel::build(const nets::EncoderSpec& enc, const nets::DecoderSpec& dec,
                         const nets::DomainBox& box, const MeasurementOperator& measurement,
                         const std::vector<std::string>& fields, std::mt19937_64& rng) {
  if (fields.empty()) throw std::invalid_argument("VaeModel: no fields");
  if (enc.latent_dim != dec.latent_dim) {
    throw std::invalid_argument("VaeModel: encoder and decoder latent sizes differ");
  }
  if (enc.input_dim != measurement.observation_size()) {
    throw std::invalid_argument("VaeModel: encoder input does not match the observation size");
  }
  VaeModel m;
  m.encoder = nets::Encoder(enc, rng);
  for (std::size_t i = 0; i < fields.size(); ++i) m.decoders.emplace_back(dec, box, rng);
  m.field_names = fields;
  m.measurement = measurement;
  m.box = box;
  return m;
}

nets::ParamList VaeModel::parameters() const {
  nets::ParamList out;
  encoder.collect(out, "encoder");
  for (std::size_t i = 0; i < decoders.size(); ++i) {
    decoders[i].collect(out, "decoder." + field_names[i]);
  }
  return out;
}

std::vector<Matrix> VaeModel::decode_all(const Matrix& z, const Matrix& coords) const {
  std::vector<Matrix> out;
  for (const auto& d : decoders) out.push_back(d.decode(z, coords));
  return out;
}

}  // namespace clfm::cvae
