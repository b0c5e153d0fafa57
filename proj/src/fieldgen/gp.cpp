#include "clfm/fieldgen/gp.hpp"

#include <random>
#include <stdexcept>
#include <string>

#include "clfm/fieldgen/kernels.hpp"

namespace clfm::fieldgen {

JitteredCholesky jittered_cholesky(const Matrix& k, double initial, double max_jitter,
                                   double scale) {
  const Eigen::Index n = k.rows();
  for (double jitter = initial; jitter <= max_jitter * (1.0 + 1e-12); jitter *= 10.0) {
    Matrix shifted = k;
    shifted.diagonal().array() += jitter * scale;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() == Eigen::Success) {
      return {llt.matrixL(), jitter * scale};
    }
  }
  throw std::runtime_error("cholesky failed for " + std::to_string(n) + "x" + std::to_string(n) +
                           " matrix after jitter escalation to " + std::to_string(max_jitter));
}

Matrix gp_kernel(const GpSpec& spec, const Matrix& coords) {
  return squared_exponential_gram(coords, spec.variance, spec.length_scale);
}

Vector gp_mean(const GpSpec& spec, const Matrix& coords) {
  Vector mu(coords.rows());
  for (Eigen::Index i = 0; i < coords.rows(); ++i) mu(i) = spec.mean(coords.row(i));
  return mu;
}

Matrix gp_sample(const GpSpec& spec, const Matrix& coords, int n, std::uint64_t seed) {
  if (spec.variance <= 0.0 || spec.length_scale <= 0.0) {
    throw std::invalid_argument("gp_sample: variance and length scale must be positive");
  }
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < coords.rows(); ++j) {
      if ((coords.row(i) - coords.row(j)).squaredNorm() == 0.0) {
        throw std::invalid_argument("gp_sample: coordinates must be distinct");
      }
    }
  }
  const auto chol = jittered_cholesky(gp_kernel(spec, coords));
  const Vector mu = gp_mean(spec, coords);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix xi(coords.rows(), n);
  for (int s = 0; s < n; ++s) {
    for (Eigen::Index p = 0; p < coords.rows(); ++p) xi(p, s) = normal(rng);
  }
  Matrix out = (chol.lower * xi).transpose();
  out.rowwise() += mu.transpose();
  return out;
}

}  // namespace clfm::fieldgen
