#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace clfm::fieldgen {

/// V(x) = alpha + beta exp(g(x)), g a zero-mean unit-variance squared-exponential
/// GP represented by a truncated Karhunen-Loeve expansion on a fixed grid.
struct LognormalKlSpec {
  double alpha = 1.0;
  double beta = 0.1;
  double length = 1.0;
  int terms = 5;
};

class LognormalKlSampler {
 public:
  /// `grid` rows are points (any dimension).
  LognormalKlSampler(const LognormalKlSpec& spec, Eigen::MatrixXd grid);

  /// n x P samples of V.
  Eigen::MatrixXd sample(int n, std::uint64_t seed) const;

  /// Kept eigenvalues, nonincreasing.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  /// sum of kept eigenvalues / sum of all (clamped) eigenvalues.
  double retained_variance_fraction() const { return retained_; }

 private:
  LognormalKlSpec spec_;
  Eigen::MatrixXd grid_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd modes_;  // P x k, columns scaled by sqrt(lambda)
  double retained_ = 0.0;
};

}  // namespace clfm::fieldgen
