#include "clfm/flow/sampler.hpp"

#include <random>

namespace clfm::flow {

Matrix standard_normal(Eigen::Index n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix z(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) z(i, k) = normal(rng);
  }
  return z;
}

Matrix rk4_sample(const VelocityNet& net, Eigen::Index n, std::uint64_t seed, int steps) {
  const Matrix z1 = standard_normal(n, net.latent_dim(), seed);
  if (n == 0) return z1;
  return rk4_integrate([&](const Matrix& z, double t) { return net.evaluate(z, t); }, z1, 1.0,
                       0.0, steps);
}

namespace {

std::vector<Matrix> decode_or_empty(const cvae::VaeModel& model, const Matrix& z,
                                    const Matrix& coords) {
  if (z.rows() == 0) {
    return std::vector<Matrix>(model.decoders.size(), Matrix(0, coords.rows()));
  }
  return model.decode_all(z, coords);
}

}  // namespace

std::vector<Matrix> generate_fields(const VelocityNet& net, const cvae::VaeModel& model,
                                    Eigen::Index n, const Matrix& coords, std::uint64_t seed,
                                    int steps) {
  return decode_or_empty(model, rk4_sample(net, n, seed, steps), coords);
}

std::vector<Matrix> sample_vae_prior(const cvae::VaeModel& model, Eigen::Index n,
                                     const Matrix& coords, std::uint64_t seed) {
  return decode_or_empty(model, standard_normal(n, model.latent_dim(), seed), coords);
}

}  // namespace clfm::flow
