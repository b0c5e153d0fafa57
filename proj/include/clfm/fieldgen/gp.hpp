#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

namespace clfm::fieldgen {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Gaussian process with squared-exponential covariance on a box domain.
struct GpSpec {
  double variance = 0.5;
  double length_scale = 0.1;
  double domain_lo = 0.0;
  double domain_hi = 1.0;
  /// Mean as a function of one coordinate row; defaults to mu(x) = x_0.
  std::function<double(const Eigen::RowVectorXd&)> mean = [](const Eigen::RowVectorXd& x) {
    return x(0);
  };
};

struct JitteredCholesky {
  Matrix lower;
  double jitter = 0.0;  // absolute diagonal shift that made the factorization succeed
};

/// Cholesky of K + jitter * scale * I, starting at `initial` and escalating x10
/// up to `max_jitter`. Throws std::runtime_error if every attempt fails.
JitteredCholesky jittered_cholesky(const Matrix& k, double initial = 1e-8,
                                   double max_jitter = 1e-4, double scale = 1.0);

Matrix gp_kernel(const GpSpec& spec, const Matrix& coords);
Vector gp_mean(const GpSpec& spec, const Matrix& coords);

/// n samples of the GP at the rows of `coords`, returned as (n x P).
Matrix gp_sample(const GpSpec& spec, const Matrix& coords, int n, std::uint64_t seed);

}  // namespace clfm::fieldgen
