#include "clfm/nets/encoder.hpp"

#include <stdexcept>

namespace clfm::nets {

Encoder::Encoder(const EncoderSpec& spec, std::mt19937_64& rng)
    : spec_(spec),
      net_(MlpSpec{spec.input_dim, std::vector<int>(spec.layers, spec.width), 2 * spec.latent_dim,
                   Activation::gelu},
           rng),
      shift_(ad::RowVector::Zero(spec.input_dim)),
      scale_(ad::RowVector::Ones(spec.input_dim)) {}

void Encoder::set_standardization(const ad::RowVector& shift, const ad::RowVector& scale) {
  if (shift.size() != spec_.input_dim || scale.size() != spec_.input_dim) {
    throw ad::ShapeError("encoder", "standardization size does not match input dimension");
  }
  if ((scale.array() <= 0.0).any()) {
    throw std::invalid_argument("encoder: standardization scale must be positive");
  }
  shift_ = shift;
  scale_ = scale;
}

Posterior Encoder::encode(const Var& y) const {
  if (y.cols() != spec_.input_dim) {
    throw ad::ShapeError("encode", "observation has " + std::to_string(y.cols()) +
                                       " entries, encoder expects " +
                                       std::to_string(spec_.input_dim));
  }
  if (!y.value().allFinite()) throw std::domain_error("encode: non-finite observation");
  Matrix standardized =
      ((y.value().rowwise() - shift_).array().rowwise() / scale_.array()).matrix();
  Var h = net_.forward(Var::constant(std::move(standardized)));
  const int d = spec_.latent_dim;
  Posterior post;
  post.mean = ad::slice_cols(h, 0, d);
  post.logvar = ad::clamp(ad::slice_cols(h, d, d), kLogvarMin, kLogvarMax);
  post.stddev = ad::exp(ad::scale(post.logvar, 0.5));
  return post;
}

void Encoder::collect(ParamList& out, const std::string& prefix) const {
  net_.collect(out, prefix);
}

}  // namespace clfm::nets
