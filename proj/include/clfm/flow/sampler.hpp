#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "clfm/cvae/model.hpp"
#include "clfm/flow/velocity.hpp"

namespace clfm::flow {

/// Classical fixed-step RK4 for dz/dt = f(z, t) from t0 to t1 (t1 < t0 allowed).
/// `f` is called as f(const Matrix& z, double t) and returns a matrix shaped like z.
template <typename Field, typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> rk4_integrate(
    Field&& f, const Eigen::MatrixBase<Derived>& z_start, double t0, double t1, int steps) {
  if (steps < 1) throw std::invalid_argument("rk4: need at least one step");
  using M = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const double dt = (t1 - t0) / steps;
  M z = z_start;
  for (int k = 0; k < steps; ++k) {
    const double t = t0 + k * dt;
    const M k1 = f(z, t);
    const M k2 = f(M(z + 0.5 * dt * k1), t + 0.5 * dt);
    const M k3 = f(M(z + 0.5 * dt * k2), t + 0.5 * dt);
    const M k4 = f(M(z + dt * k3), t + dt);
    z += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!z.allFinite()) {
      throw std::overflow_error("rk4: state overflowed at step " + std::to_string(k));
    }
  }
  return z;
}

/// n standard normal rows of width d.
Matrix standard_normal(Eigen::Index n, int d, std::uint64_t seed);

/// Integrates the learned field from z1 ~ N(0, I) at t = 1 back to t = 0.
Matrix rk4_sample(const VelocityNet& net, Eigen::Index n, std::uint64_t seed, int steps = 100);

/// Samples latents with the flow and decodes every field at `coords`.
std::vector<Matrix> generate_fields(const VelocityNet& net, const cvae::VaeModel& model,
                                    Eigen::Index n, const Matrix& coords, std::uint64_t seed,
                                    int steps = 100);

/// Baseline: z ~ N(0, I) decoded directly.
std::vector<Matrix> sample_vae_prior(const cvae::VaeModel& model, Eigen::Index n,
                                     const Matrix& coords, std::uint64_t seed);

}  // namespace clfm::flow
