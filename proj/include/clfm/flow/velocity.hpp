#pragma once

#include <random>

#include "clfm/nets/mlp.hpp"

namespace clfm::flow {

using ad::Matrix;
using ad::Var;

struct VelocitySpec {
  int latent_dim = 4;
  int layers = 3;
  int width = 128;
};

/// nu(z, t): R^d x [0, 1] -> R^d, with t appended as the last input column.
class VelocityNet {
 public:
  VelocityNet() = default;
  VelocityNet(const VelocitySpec& spec, std::mt19937_64& rng);

  /// z: B x d, t: B x 1.
  Var forward(const Var& z, const Matrix& t) const;
  Matrix evaluate(const Matrix& z, double t) const;

  void collect(nets::ParamList& out, const std::string& prefix) const;
  int latent_dim() const { return spec_.latent_dim; }
  const VelocitySpec& spec() const { return spec_; }
  nets::Mlp& network() { return net_; }

 private:
  VelocitySpec spec_;
  nets::Mlp net_;
};

/// (1 - t) z0 + t z1; throws std::domain_error for t outside [0, 1].
Matrix interpolate(const Matrix& z0, const Matrix& z1, double t);
/// Row-wise version with one t per row (B x 1).
Matrix interpolate(const Matrix& z0, const Matrix& z1, const Eigen::VectorXd& t);

/// Batch mean of |z1 - z0 - nu(z_t, t)|^2 summed over latent dims.
Var flow_matching_loss(const VelocityNet& net, const Matrix& z0, const Matrix& z1,
                       const Eigen::VectorXd& t, const Matrix& noise);

}  // namespace clfm::flow
