#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "clfm/ad/adam.hpp"
#include "clfm/flow/velocity.hpp"

namespace clfm::flow {

struct FlowTrainConfig {
  int batch_size = 128;
  double learning_rate = 1e-3;
  int epochs = 500;
  double noise = 0.01;
  std::uint64_t seed = 0;
  /// Draw z0 from the posterior each step instead of using its mean.
  bool sample_z0 = false;

  void validate() const;
};

/// Random quantities of one flow step.
struct FlowDraws {
  Matrix z1;             // B x d, standard normal
  Eigen::VectorXd t;     // B, uniform on [0, 1]
  Matrix noise;          // B x d, N(0, noise^2)
};

FlowDraws draw_flow_step(Eigen::Index batch, int dim, double noise, std::mt19937_64& rng);

class FlowTrainer {
 public:
  FlowTrainer(VelocityNet& net, FlowTrainConfig config);

  double step(const Matrix& z0);
  double step(const Matrix& z0, const FlowDraws& draws);

  /// Trains on latent codes `mean` (N x d). When sampling z0, `stddev` supplies
  /// the posterior scale. Returns the mean loss per epoch; rows go to `csv`.
  std::vector<double> train(const Matrix& mean, const Matrix& stddev = Matrix(),
                            std::ostream* csv = nullptr);

 private:
  VelocityNet& net_;
  FlowTrainConfig config_;
  nets::ParamList params_;
  ad::Adam optimizer_;
  std::mt19937_64 rng_;
};

}  // namespace clfm::flow
