#include "clfm/flow/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <stdexcept>

#include "clfm/cvae/trainer.hpp"

namespace clfm::flow {

void FlowTrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("flow batch size must be positive");
  if (epochs < 0) throw std::invalid_argument("flow epochs must be nonnegative");
  if (noise < 0.0) throw std::invalid_argument("flow noise must be nonnegative");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("flow learning rate must be positive");
}

FlowDraws draw_flow_step(Eigen::Index batch, int dim, double noise, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  FlowDraws d;
  d.z1.resize(batch, dim);
  d.t.resize(batch);
  d.noise.resize(batch, dim);
  for (Eigen::Index i = 0; i < batch; ++i) {
    for (int k = 0; k < dim; ++k) d.z1(i, k) = normal(rng);
    d.t(i) = unit(rng);
    for (int k = 0; k < dim; ++k) d.noise(i, k) = noise * normal(rng);
  }
  return d;
}

FlowTrainer::FlowTrainer(VelocityNet& net, FlowTrainConfig config)
    : net_(net),
      config_(config),
      params_([&] {
        nets::ParamList p;
        net.collect(p, "velocity");
        return p;
      }()),
      optimizer_(nets::vars_of(params_), ad::AdamOptions{config.learning_rate, 0.9, 0.999, 1e-8}),
      rng_(config.seed) {
  config_.validate();
}

double FlowTrainer::step(const Matrix& z0, const FlowDraws& draws) {
  optimizer_.zero_grad();
  const Var loss = flow_matching_loss(net_, z0, draws.z1, draws.t, draws.noise);
  const double value = loss.item();
  if (!std::isfinite(value)) throw cvae::NumericalError("flow_matching", "non-finite loss");
  loss.backward();
  optimizer_.step();
  return value;
}

double FlowTrainer::step(const Matrix& z0) {
  return step(z0, draw_flow_step(z0.rows(), net_.latent_dim(), config_.noise, rng_));
}

std::vector<double> FlowTrainer::train(const Matrix& mean, const Matrix& stddev,
                                       std::ostream* csv) {
  if (mean.rows() < 1) throw std::invalid_argument("flow train: no latent codes");
  if (mean.cols() != net_.latent_dim()) {
    throw ad::ShapeError("flow train", "latent width does not match the velocity net");
  }
  if (config_.sample_z0 && (stddev.rows() != mean.rows() || stddev.cols() != mean.cols())) {
    throw ad::ShapeError("flow train", "posterior stddev missing or mis-shaped");
  }
  if (csv) *csv << "epoch,loss\n";
  const Eigen::Index n = mean.rows();
  const Eigen::Index bs = std::min<Eigen::Index>(config_.batch_size, n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::normal_distribution<double> normal;
  std::vector<double> history;
  Matrix z0;
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng_);
    double total = 0.0;
    int steps = 0;
    for (Eigen::Index start = 0; start < n; start += bs) {
      const Eigen::Index len = std::min(bs, n - start);
      z0.resize(len, mean.cols());
      for (Eigen::Index i = 0; i < len; ++i) {
        z0.row(i) = mean.row(order[start + i]);
        if (config_.sample_z0) {
          for (Eigen::Index k = 0; k < z0.cols(); ++k) {
            z0(i, k) += stddev(order[start + i], k) * normal(rng_);
          }
        }
      }
      total += step(z0);
      ++steps;
    }
    history.push_back(total / steps);
    if (csv) *csv << epoch << ',' << std::setprecision(17) << history.back() << '\n';
  }
  return history;
}

}  // namespace clfm::flow
