#include "clfm/nets/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace clfm::nets {

std::vector<Var> vars_of(const ParamList& params) {
  std::vector<Var> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p.var);
  return out;
}

Activation parse_activation(const std::string& name) {
  if (name == "gelu") return Activation::gelu;
  if (name == "silu") return Activation::silu;
  if (name == "tanh") return Activation::tanh;
  if (name == "identity") return Activation::identity;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::gelu: return "gelu";
    case Activation::silu: return "silu";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
  }
  return "?";
}

Var activate(const Var& x, Activation a) {
  switch (a) {
    case Activation::gelu: return ad::gelu(x);
    case Activation::silu: return ad::silu(x);
    case Activation::tanh: return ad::tanh(x);
    case Activation::identity: return x;
  }
  return x;
}

Matrix glorot_uniform(int fan_in, int fan_out, std::mt19937_64& rng) {
  if (fan_in < 1 || fan_out < 1) {
    throw std::invalid_argument("glorot_uniform: layer widths must be positive");
  }
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix w(fan_in, fan_out);
  // Fill row-major so the draw order does not depend on Eigen's storage order.
  for (int i = 0; i < fan_in; ++i) {
    for (int j = 0; j < fan_out; ++j) w(i, j) = dist(rng);
  }
  return w;
}

Linear Linear::glorot(int in, int out, std::mt19937_64& rng) {
  return Linear{Var::parameter(glorot_uniform(in, out, rng)),
                Var::parameter(Matrix::Zero(1, out))};
}

Mlp::Mlp(const MlpSpec& spec, std::mt19937_64& rng) : spec_(spec) {
  int prev = spec.input;
  for (int width : spec.hidden) {
    layers_.push_back(Linear::glorot(prev, width, rng));
    prev = width;
  }
  layers_.push_back(Linear::glorot(prev, spec.output, rng));
}

Var Mlp::forward(const Var& x) const {
  if (x.cols() != spec_.input) {
    throw ad::ShapeError("mlp", "expected " + std::to_string(spec_.input) +
                                    " input features, got " + std::to_string(x.cols()));
  }
  Var h = x;
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) h = activate(layers_[i](h), spec_.activation);
  return layers_.back()(h);
}

void Mlp::collect(ParamList& out, const std::string& prefix) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    out.push_back({prefix + ".layer" + std::to_string(i) + ".weight", layers_[i].weight});
    out.push_back({prefix + ".layer" + std::to_string(i) + ".bias", layers_[i].bias});
  }
}

ResidualMlp::ResidualMlp(const ResidualMlpSpec& spec, std::mt19937_64& rng) : spec_(spec) {
  input_ = Linear::glorot(spec.input, spec.width, rng);
  for (int b = 0; b < spec.blocks; ++b) {
    Block block;
    block.norm_gain = Var::parameter(Matrix::Ones(1, spec.width));
    block.norm_shift = Var::parameter(Matrix::Zero(1, spec.width));
    block.first = Linear::glorot(spec.width, spec.width, rng);
    block.second = Linear::glorot(spec.width, spec.width, rng);
    blocks_.push_back(std::move(block));
  }
  head_ = Linear::glorot(spec.width, spec.output, rng);
}

Var ResidualMlp::forward(const Var& x) const {
  if (x.cols() != spec_.input) {
    throw ad::ShapeError("residual_mlp", "expected " + std::to_string(spec_.input) +
                                             " input features, got " + std::to_string(x.cols()));
  }
  Var h = input_(x);
  for (const auto& b : blocks_) {
    Var inner = b.second(ad::silu(b.first(ad::layer_norm(h, b.norm_gain, b.norm_shift))));
    h = ad::add(h, inner);
  }
  return head_(h);
}

void ResidualMlp::collect(ParamList& out, const std::string& prefix) const {
  out.push_back({prefix + ".input.weight", input_.weight});
  out.push_back({prefix + ".input.bias", input_.bias});
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const std::string p = prefix + ".block" + std::to_string(i);
    out.push_back({p + ".norm.gain", blocks_[i].norm_gain});
    out.push_back({p + ".norm.shift", blocks_[i].norm_shift});
    out.push_back({p + ".first.weight", blocks_[i].first.weight});
    out.push_back({p + ".first.bias", blocks_[i].first.bias});
    out.push_back({p + ".second.weight", blocks_[i].second.weight});
    out.push_back({p + ".second.bias", blocks_[i].second.bias});
  }
  out.push_back({prefix + ".head.weight", head_.weight});
  out.push_back({prefix + ".head.bias", head_.bias});
}

Var FeatureNet::forward(const Var& x) const {
  return std::visit([&](const auto& n) { return n.forward(x); }, net_);
}

void FeatureNet::collect(ParamList& out, const std::string& prefix) const {
  std::visit([&](const auto& n) { n.collect(out, prefix); }, net_);
}

int FeatureNet::input_dim() const {
  return std::visit([](const auto& n) { return n.input_dim(); }, net_);
}

int FeatureNet::output_dim() const {
  return std::visit([](const auto& n) { return n.output_dim(); }, net_);
}

}  // namespace clfm::nets
