#include "doctest.h"

#include <cmath>

#include "clfm/nets/deeponet.hpp"
#include "clfm/nets/encoder.hpp"
#include "clfm/nets/mlp.hpp"

using namespace clfm::nets;
using clfm::ad::Var;

namespace {

// Single affine layer with zero weights: a constant map.
Mlp constant_net(int in, double value, std::mt19937_64& rng) {
  Mlp net(MlpSpec{in, {}, 1, Activation::gelu}, rng);
  net.layers()[0].weight.mutable_value().setZero();
  net.layers()[0].bias.mutable_value().setConstant(value);
  return net;
}

DeepOnet random_decoder(unsigned seed) {
  std::mt19937_64 rng(seed);
  DecoderSpec spec;
  spec.latent_dim = 3;
  spec.width_p = 16;
  spec.branch_width = 32;
  spec.trunk_width = 32;
  return DeepOnet(spec, DomainBox::interval(0.0, 1.0), rng);
}

}  // namespace

TEST_CASE("p = 1 decoder is a scalar product") {
  std::mt19937_64 rng(1);
  DeepOnet dec(FeatureNet(constant_net(2, 2.0, rng)), constant_net(1, 3.0, rng),
               DomainBox::interval(0.0, 1.0));
  const Matrix out = dec.decode(Matrix::Zero(1, 2), Matrix::Constant(1, 1, 0.4));
  CHECK(out(0, 0) == 6.0);
}

TEST_CASE("decoding is pointwise in the coordinates") {
  const DeepOnet dec = random_decoder(2);
  const Matrix z = Matrix::Random(4, 3);
  const Matrix a = (Matrix(2, 1) << 0.1, 0.7).finished();
  const Matrix b = (Matrix(3, 1) << 0.0, 0.35, 1.0).finished();
  Matrix both(5, 1);
  both << a, b;
  const Matrix joint = dec.decode(z, both);
  CHECK(joint.leftCols(2).isApprox(dec.decode(z, a), 1e-14));
  CHECK(joint.rightCols(3).isApprox(dec.decode(z, b), 1e-14));
}

TEST_CASE("decoder output shrinks its adjacent jumps as the grid refines") {
  const DeepOnet dec = random_decoder(3);
  const Matrix z = Matrix::Random(1, 3);
  auto max_jump = [&](double dx) {
    const auto n = static_cast<Eigen::Index>(std::lround(1.0 / dx)) + 1;
    const Matrix grid = Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);
    const Eigen::RowVectorXd u = dec.decode(z, grid).row(0);
    return (u.tail(n - 1) - u.head(n - 1)).cwiseAbs().maxCoeff();
  };
  const double coarse = max_jump(1e-2);
  const double fine = max_jump(1e-3);
  // Lipschitz output: the jump scales with the spacing.
  CHECK(fine < 0.2 * coarse);
  CHECK(fine > 0.0);
}

TEST_CASE("decode is linear in the branch features") {
  const DeepOnet dec = random_decoder(4);
  const Matrix z = Matrix::Random(3, 3);
  const Matrix x = Eigen::VectorXd::LinSpaced(7, 0.0, 1.0);
  const Var branch = dec.branch_features(Var::constant(z));
  const Matrix once = dec.decode_features(branch, x).value();
  const Matrix scaled = dec.decode_features(clfm::ad::scale(branch, -2.5), x).value();
  CHECK(scaled.isApprox(-2.5 * once, 1e-13));
  CHECK(once.isApprox(dec.decode(z, x), 1e-14));
}

TEST_CASE("decoder rejects a latent of the wrong width") {
  const DeepOnet dec = random_decoder(5);
  CHECK_THROWS_AS(dec.decode(Matrix::Zero(2, 4), Matrix::Zero(1, 1)), clfm::ad::ShapeError);
}

TEST_CASE("trunk coordinates map onto [-1, 1]") {
  DomainBox box;
  box.lo = Eigen::Vector2d(0.0, 1.0);
  box.hi = Eigen::Vector2d(100.0, 101.0);
  const Matrix pts = (Matrix(3, 2) << 0, 1, 50, 51, 100, 101).finished();
  const Matrix n = box.normalize(pts);
  CHECK(n.col(0).isApprox(Eigen::Vector3d(-1, 0, 1)));
  CHECK(n.col(1).isApprox(Eigen::Vector3d(-1, 0, 1)));
}

TEST_CASE("encoder log-variance head") {
  std::mt19937_64 rng(6);
  Encoder enc(EncoderSpec{3, 2, 2, 16}, rng);
  Linear& head = enc.network().layers().back();
  head.weight.mutable_value().setZero();
  const Matrix y = Matrix::Random(1, 3);

  SUBCASE("zero output gives unit deviation") {
    head.bias.mutable_value().setZero();
    CHECK(enc.encode(y).stddev.value().isApprox(Matrix::Ones(1, 2)));
  }
  SUBCASE("-30 is clamped to -10, giving exp(-5)") {
    head.bias.mutable_value() << 0.0, 0.0, -30.0, -30.0;
    const Matrix s = enc.encode(y).stddev.value();
    CHECK(s(0, 0) == doctest::Approx(std::exp(-5.0)).epsilon(1e-14));
    CHECK(s(0, 1) == doctest::Approx(std::exp(-5.0)).epsilon(1e-14));
  }
}

TEST_CASE("encoder is deterministic and its deviation stays in range") {
  std::mt19937_64 rng(7);
  Encoder enc(EncoderSpec{5, 3, 3, 32}, rng);
  // Blow up the head so the raw log-variance spans far beyond the clamp.
  enc.network().layers().back().weight.mutable_value() *= 1e3;
  const Matrix y = 10.0 * Matrix::Random(64, 5);
  Matrix twice(2, 5);
  twice << y.row(0), y.row(0);
  const Posterior p = enc.encode(twice);
  CHECK(p.mean.value().row(0) == p.mean.value().row(1));
  CHECK(p.stddev.value().row(0) == p.stddev.value().row(1));
  const Matrix s = enc.encode(y).stddev.value();
  CHECK(s.minCoeff() >= std::exp(-5.0));
  CHECK(s.maxCoeff() <= std::exp(5.0));
  CHECK_THROWS_AS(enc.encode(Matrix::Constant(1, 5, std::nan(""))), std::domain_error);
}

TEST_CASE("initialization") {
  SUBCASE("same seed gives identical parameters") {
    std::mt19937_64 a(7), b(7);
    Mlp x(MlpSpec{3, {16, 16}, 2}, a), y(MlpSpec{3, {16, 16}, 2}, b);
    ParamList px, py;
    x.collect(px, "net");
    y.collect(py, "net");
    REQUIRE(px.size() == py.size());
    for (std::size_t i = 0; i < px.size(); ++i) {
      CHECK(px[i].name == py[i].name);
      CHECK(px[i].var.value() == py[i].var.value());
    }
  }
  SUBCASE("1 -> 1 layer is bounded by sqrt(3)") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 1000; ++i) {
      const Linear l = Linear::glorot(1, 1, rng);
      CHECK(std::abs(l.weight.value()(0, 0)) <= std::sqrt(3.0));
      CHECK(l.bias.value()(0, 0) == 0.0);
    }
  }
  SUBCASE("width-128 weight variance near 2 / (fan_in + fan_out)") {
    std::mt19937_64 rng(9);
    const Matrix w = glorot_uniform(128, 128, rng);
    const double mean = w.mean();
    const double var = (w.array() - mean).square().sum() / static_cast<double>(w.size() - 1);
    CHECK(std::abs(var / (2.0 / 256.0) - 1.0) < 0.2);
  }
}

TEST_CASE("residual branch has the requested shape") {
  std::mt19937_64 rng(10);
  DecoderSpec spec;
  spec.latent_dim = 4;
  spec.width_p = 8;
  spec.branch_kind = BranchKind::residual;
  spec.branch_width = 16;
  DeepOnet dec(spec, DomainBox::interval(0.0, 1.0), rng);
  const Matrix out = dec.decode(Matrix::Random(5, 4), Matrix::Random(9, 1).cwiseAbs());
  CHECK(out.rows() == 5);
  CHECK(out.cols() == 9);
  CHECK(out.allFinite());
}
