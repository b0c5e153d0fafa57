#pragma once

// Small models shared by the unit tests and the acceptance runner: batch of
// two, two latent dimensions, three collocation points.

#include <cmath>
#include <random>

#include "clfm/cvae/loss.hpp"
#include "clfm/fieldgen/gp.hpp"
#include "clfm/fieldgen/poisson.hpp"
#include "clfm/flow/velocity.hpp"

namespace clfm::testing {

struct TinyCase {
  cvae::VaeModel model;
  cvae::ConstraintSpec constraint;
  cvae::LossWeights weights;
  cvae::StepDraws draws;
  Eigen::MatrixXd y;
};

inline cvae::VaeModel tiny_model(const nets::DomainBox& box, int sensors,
                                 const std::vector<std::string>& fields, unsigned seed) {
  std::mt19937_64 rng(seed);
  const cvae::MeasurementOperator meas(
      cvae::uniform_sensors(box.lo(0), box.hi(0), sensors), box);
  nets::EncoderSpec enc{sensors, 2, 2, 8};
  nets::DecoderSpec dec;
  dec.latent_dim = 2;
  dec.width_p = 5;
  dec.branch_layers = 1;
  dec.branch_width = 8;
  dec.trunk_layers = 1;
  dec.trunk_width = 8;
  return cvae::VaeModel::build(enc, dec, box, meas, fields, rng);
}

/// Covariance-constrained GP reconstruction instance.
inline TinyCase tiny_covariance_case(unsigned seed = 3) {
  TinyCase t;
  t.model = tiny_model(nets::DomainBox::interval(0.0, 1.0), 3, {"u"}, seed);
  t.constraint.kind = cvae::ConstraintKind::covariance;
  t.constraint.collocation = 3;
  t.constraint.covariance_target = [](const Eigen::MatrixXd& x) {
    return fieldgen::gp_kernel(fieldgen::GpSpec{}, x);
  };
  t.weights = {1e-2, 0.5, 0.0};
  std::mt19937_64 rng(seed + 100);
  t.draws = cvae::draw_step(t.model, t.constraint, 2, rng);
  t.y = fieldgen::gp_sample(fieldgen::GpSpec{}, t.model.measurement.sensors, 2, seed + 200);
  return t;
}

/// Poisson-constrained inference instance with decoders for u and v.
inline TinyCase tiny_poisson_case(unsigned seed = 4) {
  TinyCase t;
  const double len = fieldgen::kPoissonLength;
  t.model = tiny_model(nets::DomainBox::interval(0.0, len), 3, {"u", "v"}, seed);
  t.constraint.kind = cvae::ConstraintKind::poisson;
  t.constraint.collocation = 3;
  t.constraint.h = 1e-3 * len;
  t.constraint.forcing = fieldgen::poisson_forcing;
  t.weights = {1e-2, 0.0, 0.3};
  std::mt19937_64 rng(seed + 100);
  t.draws = cvae::draw_step(t.model, t.constraint, 2, rng);
  t.y.resize(2, 3);
  for (int s = 0; s < 2; ++s) {
    const auto sol = fieldgen::poisson_solve(0.15 + 0.1 * s, 256);
    for (int k = 0; k < 3; ++k) t.y(s, k) = sol.u_at(t.model.measurement.sensors(k, 0));
  }
  return t;
}

/// Velocity net and four latent pairs for the flow-matching loss.
struct TinyFlow {
  flow::VelocityNet net;
  Eigen::MatrixXd z0, z1, noise;
  Eigen::VectorXd t;
};

inline TinyFlow tiny_flow_case(unsigned seed = 5) {
  std::mt19937_64 rng(seed);
  TinyFlow f;
  f.net = flow::VelocityNet(flow::VelocitySpec{2, 2, 8}, rng);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u;
  auto fill = [&](Eigen::MatrixXd& m) {
    m.resize(4, 2);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = n(rng);
  };
  fill(f.z0);
  fill(f.z1);
  fill(f.noise);
  f.noise *= 0.01;
  f.t.resize(4);
  for (Eigen::Index i = 0; i < 4; ++i) f.t(i) = u(rng);
  return f;
}

}  // namespace clfm::testing
