#pragma once

#include "clfm/nets/mlp.hpp"

namespace clfm::nets {

struct EncoderSpec {
  int input_dim = 1;  // m * n flattened observation
  int latent_dim = 4;
  int layers = 3;
  int width = 128;
};

/// Diagonal Gaussian posterior q(z | y).
struct Posterior {
  Var mean;     // B x d_z
  Var logvar;   // B x d_z, clamped to [-10, 10]
  Var stddev;   // exp(0.5 logvar)
};

/// MLP encoder y -> (mean, logvar). Inputs pass through a fixed per-feature
/// standardization (identity until `set_standardization` is called).
class Encoder {
 public:
  static constexpr double kLogvarMin = -10.0;
  static constexpr double kLogvarMax = 10.0;

  Encoder() = default;
  Encoder(const EncoderSpec& spec, std::mt19937_64& rng);

  Posterior encode(const Var& y) const;
  Posterior encode(const Matrix& y) const { return encode(Var::constant(y)); }

  void set_standardization(const ad::RowVector& shift, const ad::RowVector& scale);
  const ad::RowVector& shift() const { return shift_; }
  const ad::RowVector& scale() const { return scale_; }

  void collect(ParamList& out, const std::string& prefix) const;
  int input_dim() const { return spec_.input_dim; }
  int latent_dim() const { return spec_.latent_dim; }
  const EncoderSpec& spec() const { return spec_; }
  Mlp& network() { return net_; }

 private:
  EncoderSpec spec_;
  Mlp net_;
  ad::RowVector shift_;
  ad::RowVector scale_;
};

}  // namespace clfm::nets
