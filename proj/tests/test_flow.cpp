#include "doctest.h"

#include <cmath>
#include <numbers>

#include "clfm/ad/grad_check.hpp"
#include "clfm/flow/sampler.hpp"
#include "clfm/flow/trainer.hpp"
#include "tiny_model.hpp"

using namespace clfm;
using namespace clfm::flow;

TEST_CASE("linear interpolation path") {
  const Matrix z0 = (Matrix(1, 2) << 0.0, 2.0).finished();
  const Matrix z1 = (Matrix(1, 2) << 2.0, 0.0).finished();
  CHECK(interpolate(z0, z1, 0.0) == z0);
  CHECK(interpolate(z0, z1, 1.0) == z1);
  CHECK(interpolate(z0, z1, 0.5) == (Matrix(1, 2) << 1.0, 1.0).finished());
  CHECK_THROWS_AS(interpolate(z0, z1, 1.5), std::domain_error);
  CHECK_THROWS_AS(interpolate(z0, z1, -0.1), std::domain_error);
  const Eigen::VectorXd t = Eigen::VectorXd::Constant(1, 0.25);
  CHECK(interpolate(z0, z1, t).isApprox(interpolate(z0, z1, 0.25)));
}

TEST_CASE("flow matching loss vanishes for the exact velocity") {
  std::mt19937_64 rng(1);
  VelocityNet net(VelocitySpec{2, 2, 8}, rng);
  // Constant head: nu = (0.5, -1) everywhere.
  auto& head = net.network().layers().back();
  head.weight.mutable_value().setZero();
  head.bias.mutable_value() << 0.5, -1.0;
  Matrix z0 = Matrix::Random(6, 2);
  Matrix z1 = z0;
  z1.col(0).array() += 0.5;
  z1.col(1).array() -= 1.0;
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(6, 0.0, 1.0);
  CHECK(flow_matching_loss(net, z0, z1, t, Matrix::Zero(6, 2)).item() ==
        doctest::Approx(0.0).epsilon(1e-28));
}

TEST_CASE("flow matching loss gradients") {
  const auto f = testing::tiny_flow_case();
  CHECK(ad::grad_check([&] { return flow_matching_loss(f.net, f.z0, f.z1, f.t, f.noise); },
                       nets::vars_of([&] {
                         nets::ParamList p;
                         f.net.collect(p, "velocity");
                         return p;
                       }()),
                       1e-5) < 1e-5);
}

TEST_CASE("a flow step on a frozen seed is bit-reproducible") {
  auto run = [] {
    std::mt19937_64 rng(2);
    VelocityNet net(VelocitySpec{3, 2, 16}, rng);
    FlowTrainConfig cfg;
    cfg.seed = 11;
    FlowTrainer trainer(net, cfg);
    const Matrix z0 = Matrix::Constant(32, 3, 0.25);
    const double loss = trainer.step(z0);
    return std::make_pair(loss, net.evaluate(z0, 0.3));
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("independent Gaussian couplings reach the analytic loss floor") {
  // z0, z1 ~ N(0, I) independently. The best z_t-measurable velocity leaves
  // E[1 / ((1-t)^2 + t^2)] = pi/2 per dimension, i.e. d pi / 2 in total.
  const int d = 2;
  std::mt19937_64 rng(3);
  VelocityNet net(VelocitySpec{d, 2, 32}, rng);
  FlowTrainConfig cfg;
  cfg.seed = 4;
  cfg.epochs = 60;
  cfg.batch_size = 256;
  cfg.noise = 0.0;
  FlowTrainer trainer(net, cfg);
  const Matrix z0 = standard_normal(4096, d, 5);
  const auto losses = trainer.train(z0);
  double tail = 0.0;
  for (int e = 50; e < 60; ++e) tail += losses[e];
  tail /= 10.0;
  const double floor = d * std::numbers::pi / 2.0;
  CHECK(tail == doctest::Approx(floor).epsilon(0.05));
  CHECK(tail < 2.0 * d);  // strictly below E|z1 - z0|^2
}

TEST_CASE("RK4 integration") {
  SUBCASE("constant field is exact") {
    const Matrix c = (Matrix(1, 3) << 0.3, -1.2, 2.0).finished();
    const Matrix z1 = (Matrix(1, 3) << 1.0, 2.0, 3.0).finished();
    for (int steps : {1, 7, 100}) {
      const Matrix z0 = rk4_integrate([&](const Matrix&, double) { return c; }, z1, 1.0, 0.0,
                                      steps);
      CHECK(z0.isApprox(z1 - c, 1e-15));
    }
  }
  SUBCASE("linear field matches the exponential") {
    const Matrix z1 = (Matrix(2, 1) << 1.0, -0.4).finished();
    auto lin = [](const Matrix& z, double) { return z; };
    const Matrix z0 = rk4_integrate(lin, z1, 1.0, 0.0, 100);
    const Matrix exact = z1 * std::exp(-1.0);
    CHECK(((z0 - exact).array().abs() / exact.array().abs()).maxCoeff() < 1e-8);
  }
  SUBCASE("halving the step cuts the error by about 16") {
    const Matrix z1 = Matrix::Ones(1, 1);
    auto lin = [](const Matrix& z, double) { return z; };
    const double exact = std::exp(-1.0);
    const double e10 = std::abs(rk4_integrate(lin, z1, 1.0, 0.0, 10)(0, 0) - exact);
    const double e20 = std::abs(rk4_integrate(lin, z1, 1.0, 0.0, 20)(0, 0) - exact);
    CHECK(e10 / e20 == doctest::Approx(16.0).epsilon(0.05));
  }
  SUBCASE("overflow is reported") {
    auto blow = [](const Matrix& z, double) { return Matrix(z.array().square() * 1e300); };
    CHECK_THROWS_AS(rk4_integrate(blow, Matrix::Constant(1, 1, 1e10), 0.0, 1.0, 4),
                    std::overflow_error);
  }
}

TEST_CASE("sampling") {
  std::mt19937_64 rng(6);
  VelocityNet net(VelocitySpec{2, 2, 8}, rng);
  CHECK(rk4_sample(net, 0, 1).rows() == 0);
  CHECK(rk4_sample(net, 5, 7, 10) == rk4_sample(net, 5, 7, 10));
  CHECK(rk4_sample(net, 5, 7, 10) != rk4_sample(net, 5, 8, 10));

  const auto model = testing::tiny_model(nets::DomainBox::interval(0.0, 1.0), 3, {"u"}, 7);
  const Matrix grid = Eigen::VectorXd::LinSpaced(11, 0.0, 1.0);
  CHECK(generate_fields(net, model, 0, grid, 1)[0].rows() == 0);
  CHECK(sample_vae_prior(model, 0, grid, 1)[0].rows() == 0);
  CHECK(generate_fields(net, model, 4, grid, 3, 20)[0] ==
        generate_fields(net, model, 4, grid, 3, 20)[0]);
  const Matrix prior = sample_vae_prior(model, 4, grid, 3)[0];
  CHECK(prior == sample_vae_prior(model, 4, grid, 3)[0]);
  CHECK(prior.cols() == 11);
}

TEST_CASE("flow config validation") {
  FlowTrainConfig cfg;
  cfg.noise = -1.0;
  CHECK_THROWS(cfg.validate());
}
