#pragma once

#include <vector>

#include "clfm/ad/graph.hpp"

namespace clfm::ad {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction over a fixed list of leaf parameters.
class Adam {
 public:
  Adam(std::vector<Var> params, AdamOptions options = {});

  /// Applies one update from the currently accumulated gradients.
  void step();
  void zero_grad();

  long steps_taken() const { return t_; }
  const AdamOptions& options() const { return options_; }

 private:
  std::vector<Var> params_;
  std::vector<Matrix> m_, v_;
  AdamOptions options_;
  long t_ = 0;
};

}  // namespace clfm::ad
