#include "clfm/fieldgen/lognormal_kl.hpp"

#include <random>
#include <stdexcept>

#include "clfm/fieldgen/kernels.hpp"

namespace clfm::fieldgen {

LognormalKlSampler::LognormalKlSampler(const LognormalKlSpec& spec, Eigen::MatrixXd grid)
    : spec_(spec), grid_(std::move(grid)) {
  if (grid_.rows() == 0) throw std::invalid_argument("lognormal_kl: empty grid");
  if (spec.terms < 1 || spec.terms > grid_.rows()) {
    throw std::invalid_argument("lognormal_kl: term count must be in [1, grid size]");
  }
  const Eigen::MatrixXd k = squared_exponential_gram(grid_, 1.0, spec.length);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
  // Ascending order from Eigen; small negative round-off is clamped.
  const Eigen::VectorXd all = eig.eigenvalues().cwiseMax(0.0);
  const Eigen::Index p = grid_.rows();
  const int kept = spec.terms;
  eigenvalues_.resize(kept);
  modes_.resize(p, kept);
  for (int i = 0; i < kept; ++i) {
    const Eigen::Index src = p - 1 - i;
    eigenvalues_(i) = all(src);
    modes_.col(i) = eig.eigenvectors().col(src) * std::sqrt(all(src));
  }
  retained_ = eigenvalues_.sum() / all.sum();
}

Eigen::MatrixXd LognormalKlSampler::sample(int n, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd xi(modes_.cols(), n);
  for (int s = 0; s < n; ++s) {
    for (Eigen::Index i = 0; i < modes_.cols(); ++i) xi(i, s) = normal(rng);
  }
  const Eigen::MatrixXd g = (modes_ * xi).transpose();  // n x P
  return (spec_.alpha + spec_.beta * g.array().exp()).matrix();
}

}  // namespace clfm::fieldgen
