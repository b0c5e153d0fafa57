#pragma once

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "clfm/ad/adam.hpp"
#include "clfm/cvae/loss.hpp"

namespace clfm::cvae {

/// A loss or gradient became non-finite; `term` names the offending component.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& term, const std::string& detail)
      : std::runtime_error(term + ": " + detail), term_(term) {}
  const std::string& term() const { return term_; }

 private:
  std::string term_;
};

struct TrainConfig {
  int batch_size = 256;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  int epochs = 2000;
  LossWeights weights;
  std::uint64_t seed = 0;
  /// Restore the parameters of the epoch with the lowest mean total loss.
  bool keep_best = true;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  VaeLossBreakdown loss;  // mean over the epoch's steps
};

void write_loss_header(std::ostream& os);
void write_loss_row(std::ostream& os, const EpochRecord& r);

/// Joint Adam optimization of encoder and decoders on the constrained loss.
class VaeTrainer {
 public:
  VaeTrainer(VaeModel& model, ConstraintSpec constraint, TrainConfig config);

  /// One optimization step on `batch`; returns the loss before the update.
  VaeLossBreakdown step(const Matrix& batch);
  /// Same as step() with caller-provided draws.
  VaeLossBreakdown step(const Matrix& batch, const StepDraws& draws);

  /// Full training over the rows of `data` (N x observation size). The encoder
  /// standardization is fitted to `data` first. Rows go to `csv` if given.
  std::vector<EpochRecord> train(const Matrix& data, std::ostream* csv = nullptr);

  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }
  std::mt19937_64& rng() { return rng_; }

 private:
  VaeModel& model_;
  ConstraintSpec constraint_;
  TrainConfig config_;
  nets::ParamList params_;
  ad::Adam optimizer_;
  std::mt19937_64 rng_;
  int best_epoch_ = -1;
  double best_loss_ = 0.0;
};

/// Per-feature mean and standard deviation (floored at 1e-8 -> 1) of `data`.
void fit_standardization(nets::Encoder& encoder, const Matrix& data);

}  // namespace clfm::cvae
