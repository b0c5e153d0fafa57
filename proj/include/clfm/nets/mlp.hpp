#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "clfm/ad/graph.hpp"

namespace clfm::nets {

using ad::Matrix;
using ad::Var;

struct NamedParam {
  std::string name;
  Var var;
};
using ParamList = std::vector<NamedParam>;

std::vector<Var> vars_of(const ParamList& params);

enum class Activation { gelu, silu, tanh, identity };

Activation parse_activation(const std::string& name);
std::string to_string(Activation a);
Var activate(const Var& x, Activation a);

/// Glorot/Xavier uniform: entries ~ U(-b, b), b = sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(int fan_in, int fan_out, std::mt19937_64& rng);

/// Affine layer x W + b with W (in x out) and b (1 x out).
struct Linear {
  Var weight;
  Var bias;

  static Linear glorot(int in, int out, std::mt19937_64& rng);
  Var operator()(const Var& x) const { return ad::add(ad::matmul(x, weight), bias); }
  int input_dim() const { return static_cast<int>(weight.rows()); }
  int output_dim() const { return static_cast<int>(weight.cols()); }
};

struct MlpSpec {
  int input = 1;
  std::vector<int> hidden;
  int output = 1;
  Activation activation = Activation::gelu;
};

/// Fully connected network; activation after every hidden layer, linear head.
class Mlp {
 public:
  Mlp() = default;
  Mlp(const MlpSpec& spec, std::mt19937_64& rng);

  Var forward(const Var& x) const;
  Matrix evaluate(const Matrix& x) const { return forward(Var::constant(x)).value(); }
  void collect(ParamList& out, const std::string& prefix) const;

  const MlpSpec& spec() const { return spec_; }
  int input_dim() const { return spec_.input; }
  int output_dim() const { return spec_.output; }
  std::vector<Linear>& layers() { return layers_; }
  const std::vector<Linear>& layers() const { return layers_; }

 private:
  MlpSpec spec_;
  std::vector<Linear> layers_;
};

struct ResidualMlpSpec {
  int input = 1;
  int width = 128;
  int blocks = 2;
  int output = 1;
};

/// Input projection, `blocks` pre-norm residual blocks
/// (x + W2 silu(W1 layernorm(x))), then a linear head.
class ResidualMlp {
 public:
  struct Block {
    Var norm_gain;
    Var norm_shift;
    Linear first;
    Linear second;
  };

  ResidualMlp() = default;
  ResidualMlp(const ResidualMlpSpec& spec, std::mt19937_64& rng);

  Var forward(const Var& x) const;
  void collect(ParamList& out, const std::string& prefix) const;

  const ResidualMlpSpec& spec() const { return spec_; }
  int input_dim() const { return spec_.input; }
  int output_dim() const { return spec_.output; }

 private:
  ResidualMlpSpec spec_;
  Linear input_;
  std::vector<Block> blocks_;
  Linear head_;
};

/// Either of the two feature-network flavours, used for DeepONet branches.
class FeatureNet {
 public:
  FeatureNet() = default;
  explicit FeatureNet(Mlp net) : net_(std::move(net)) {}
  explicit FeatureNet(ResidualMlp net) : net_(std::move(net)) {}

  Var forward(const Var& x) const;
  void collect(ParamList& out, const std::string& prefix) const;
  int input_dim() const;
  int output_dim() const;
  bool is_residual() const { return std::holds_alternative<ResidualMlp>(net_); }

 private:
  std::variant<Mlp, ResidualMlp> net_;
};

}  // namespace clfm::nets
