#include "clfm/cvae/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>

namespace clfm::cvae {

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch size must be positive");
  if (epochs < 0) throw std::invalid_argument("epochs must be nonnegative");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (weights.kl < 0.0 || weights.statistics < 0.0 || weights.physics < 0.0) {
    throw std::invalid_argument("loss weights must be nonnegative");
  }
}

void write_loss_header(std::ostream& os) {
  os << "epoch,reconstruction,kl,stat_residual,phys_residual,total\n";
}

void write_loss_row(std::ostream& os, const EpochRecord& r) {
  os << r.epoch << std::setprecision(17) << ',' << r.loss.reconstruction << ',' << r.loss.kl
     << ',' << r.loss.statistics_residual << ',' << r.loss.physics_residual << ','
     << r.loss.total << '\n';
}

void fit_standardization(nets::Encoder& encoder, const Matrix& data) {
  const ad::RowVector mean = data.colwise().mean();
  ad::RowVector sd = ((data.rowwise() - mean).array().square().colwise().sum() /
                      static_cast<double>(std::max<Eigen::Index>(1, data.rows())))
                         .sqrt();
  for (Eigen::Index i = 0; i < sd.size(); ++i) {
    if (sd(i) < 1e-8) sd(i) = 1.0;
  }
  encoder.set_standardization(mean, sd);
}

VaeTrainer::VaeTrainer(VaeModel& model, ConstraintSpec constraint, TrainConfig config)
    : model_(model),
      constraint_(std::move(constraint)),
      config_(config),
      params_(model.parameters()),
      optimizer_(nets::vars_of(params_),
                 ad::AdamOptions{config.learning_rate, config.beta1, config.beta2, 1e-8}),
      rng_(config.seed) {
  config_.validate();
}

namespace {

void check_finite(const VaeLossBreakdown& b) {
  if (!std::isfinite(b.reconstruction)) throw NumericalError("reconstruction", "non-finite loss");
  if (!std::isfinite(b.kl)) throw NumericalError("kl", "non-finite loss");
  if (!std::isfinite(b.statistics_residual)) {
    throw NumericalError("statistics_residual", "non-finite loss");
  }
  if (!std::isfinite(b.physics_residual)) {
    throw NumericalError("physics_residual", "non-finite loss");
  }
}

}  // namespace

VaeLossBreakdown VaeTrainer::step(const Matrix& batch, const StepDraws& draws) {
  optimizer_.zero_grad();
  VaeLoss loss = vae_loss(model_, batch, draws, constraint_, config_.weights);
  check_finite(loss.parts);
  loss.total.backward();
  for (const auto& p : params_) {
    if (!p.var.grad().allFinite()) throw NumericalError("gradient", "non-finite in " + p.name);
  }
  optimizer_.step();
  return loss.parts;
}

VaeLossBreakdown VaeTrainer::step(const Matrix& batch) {
  const StepDraws draws = draw_step(model_, constraint_, batch.rows(), rng_);
  return step(batch, draws);
}

std::vector<EpochRecord> VaeTrainer::train(const Matrix& data, std::ostream* csv) {
  if (data.rows() < 1) throw std::invalid_argument("train: empty dataset");
  if (data.cols() != model_.encoder.input_dim()) {
    throw ad::ShapeError("train", "dataset width does not match the encoder input");
  }
  fit_standardization(model_.encoder, data);
  if (csv) write_loss_header(*csv);

  const Eigen::Index n = data.rows();
  const Eigen::Index bs = std::min<Eigen::Index>(config_.batch_size, n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::vector<Matrix> best;
  best_epoch_ = -1;
  std::vector<EpochRecord> history;
  history.reserve(static_cast<std::size_t>(config_.epochs));

  Matrix batch;
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng_);
    VaeLossBreakdown sum;
    int steps = 0;
    for (Eigen::Index start = 0; start < n; start += bs) {
      const Eigen::Index len = std::min(bs, n - start);
      batch.resize(len, data.cols());
      for (Eigen::Index i = 0; i < len; ++i) batch.row(i) = data.row(order[start + i]);
      const VaeLossBreakdown b = step(batch);
      sum.reconstruction += b.reconstruction;
      sum.kl += b.kl;
      sum.statistics_residual += b.statistics_residual;
      sum.physics_residual += b.physics_residual;
      sum.total += b.total;
      ++steps;
    }
    EpochRecord rec{epoch, sum};
    rec.loss.weights = config_.weights;
    for (double* v : {&rec.loss.reconstruction, &rec.loss.kl, &rec.loss.statistics_residual,
                      &rec.loss.physics_residual, &rec.loss.total}) {
      *v /= steps;
    }
    if (csv) write_loss_row(*csv, rec);
    history.push_back(rec);
    // Parameters at the start of the epoch produced the first step's loss, but
    // the epoch mean is the criterion; keep the post-epoch parameters.
    if (config_.keep_best && (best_epoch_ < 0 || rec.loss.total < best_loss_)) {
      best_epoch_ = epoch;
      best_loss_ = rec.loss.total;
      best.clear();
      for (const auto& p : params_) best.push_back(p.var.value());
    }
  }
  if (config_.keep_best && best_epoch_ >= 0) {
    for (std::size_t i = 0; i < params_.size(); ++i) params_[i].var.mutable_value() = best[i];
  }
  return history;
}

}  // namespace clfm::cvae
