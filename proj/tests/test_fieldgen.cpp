#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "clfm/constraints/welch.hpp"
#include "clfm/fieldgen/fft.hpp"
#include "clfm/fieldgen/gp.hpp"
#include "clfm/fieldgen/kernels.hpp"
#include "clfm/fieldgen/lognormal_kl.hpp"
#include "clfm/fieldgen/poisson.hpp"
#include "clfm/fieldgen/srm.hpp"
#include "clfm/fieldgen/wind.hpp"

using namespace clfm::fieldgen;

namespace {

Matrix column_covariance(const Matrix& x) {
  const Matrix c = x.rowwise() - x.colwise().mean();
  return c.transpose() * c / static_cast<double>(x.rows() - 1);
}

}  // namespace

TEST_CASE("GP kernel and sampler") {
  const GpSpec spec;
  const Matrix grid = linspace_column(0.0, 1.0, 20);
  const Matrix k = gp_kernel(spec, grid);

  SUBCASE("diagonal is the variance") {
    for (Eigen::Index i = 0; i < k.rows(); ++i) CHECK(k(i, i) == 0.5);
    CHECK(k.isApprox(k.transpose()));
  }
  SUBCASE("Cholesky with jitter reproduces the Gram matrix") {
    const Matrix dense = gp_kernel(spec, linspace_column(0.0, 1.0, 200));
    const JitteredCholesky c = jittered_cholesky(dense);
    const Matrix rebuilt = c.lower * c.lower.transpose();
    const Matrix expected = dense + c.jitter * Matrix::Identity(200, 200);
    CHECK((rebuilt - expected).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("hopeless matrices are rejected") {
    const Matrix bad = -Matrix::Identity(3, 3);
    CHECK_THROWS_AS(jittered_cholesky(bad), std::runtime_error);
  }
  SUBCASE("single coordinate is N(0.3, 0.5)") {
    const Matrix x = Matrix::Constant(1, 1, 0.3);
    const int n = 10000;
    const Matrix s = gp_sample(spec, x, n, 1);
    const double mean = s.mean();
    const double var = (s.array() - mean).square().sum() / (n - 1);
    CHECK(std::abs(mean - 0.3) < 3.0 * std::sqrt(0.5 / n));
    // Var of the sample variance of a Gaussian: 2 sigma^4 / (n - 1).
    CHECK(std::abs(var - 0.5) < 3.0 * std::sqrt(2.0 * 0.25 / (n - 1)));
  }
  SUBCASE("empirical covariance on a 20-point grid") {
    const Matrix s = gp_sample(spec, grid, 5000, 2);
    CHECK((column_covariance(s) - k).cwiseAbs().maxCoeff() < 0.05);
    CHECK((s.colwise().mean().transpose() - gp_mean(spec, grid)).cwiseAbs().maxCoeff() < 0.05);
  }
  SUBCASE("seeded draws are reproducible") {
    CHECK(gp_sample(spec, grid, 3, 9) == gp_sample(spec, grid, 3, 9));
  }
}

TEST_CASE("poisson solver") {
  SUBCASE("eps = 0 gives sin x") {
    const PoissonSolution s = poisson_solve(0.0, 1024);
    CHECK((s.u - s.x.array().sin().matrix()).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("boundary values are exactly zero") {
    for (double eps : {0.0, 0.2, 0.35}) {
      const PoissonSolution s = poisson_solve(eps, 1024);
      CHECK(s.u(0) == 0.0);
      CHECK(s.u(s.u.size() - 1) == 0.0);
    }
  }
  SUBCASE("eps = 0.2 satisfies the PDE at interior nodes") {
    const int res = 1024;
    const PoissonSolution s = poisson_solve(0.2, res);
    const double h = kPoissonLength / res;
    double worst = 0.0;
    for (int i = 1; i < res; ++i) {
      // Conservative stencil: [v_{i+1/2}(u_{i+1}-u_i) - v_{i-1/2}(u_i-u_{i-1})] / h^2.
      const double vp = poisson_coefficient(0.2, s.x(i) + h / 2);
      const double vm = poisson_coefficient(0.2, s.x(i) - h / 2);
      const double lhs = (vp * (s.u(i + 1) - s.u(i)) - vm * (s.u(i) - s.u(i - 1))) / (h * h);
      worst = std::max(worst, std::abs(lhs + poisson_forcing(s.x(i))));
    }
    CHECK(worst < 1e-4);
  }
  SUBCASE("interior error shrinks at second order") {
    auto err = [](int res) {
      const PoissonSolution s = poisson_solve(0.0, res);
      return (s.u - s.x.array().sin().matrix()).cwiseAbs().maxCoeff();
    };
    CHECK(err(128) / err(256) == doctest::Approx(4.0).epsilon(0.1));
  }
  SUBCASE("coefficient draws stay positive") {
    std::mt19937_64 rng(3);
    PoissonSpec spec;
    spec.eps_mean = -0.05;
    spec.eps_std = 0.1;
    for (int i = 0; i < 500; ++i) {
      const double eps = sample_poisson_eps(spec, rng);
      CHECK(poisson_coefficient(eps, kPoissonLength) > 0.0);
    }
  }
}

TEST_CASE("wind statistics") {
  const WindSpec w;
  SUBCASE("log-law mean profile") {
    CHECK(wind_mean(w, w.roughness * 1.000001) == doctest::Approx(0.0));
    CHECK_THROWS_AS(wind_mean(w, w.roughness), std::domain_error);
    CHECK(wind_mean(w, w.roughness * std::exp(1.0)) == doctest::Approx(4.5));
    CHECK(wind_mean(w, 100.0) == doctest::Approx(4.5 * std::log(100.0 / 0.015)));
    CHECK(wind_mean(w, 100.0) == doctest::Approx(39.62).epsilon(1e-3));
    CHECK_THROWS_AS(wind_mean(w, 0.01), std::domain_error);
  }
  SUBCASE("turbulence variance") {
    CHECK(turbulence_variance(w) ==
          doctest::Approx((6.0 - 1.1 * std::atan(std::log(0.015) + 1.75)) * 3.24));
    CHECK(turbulence_variance(w) == doctest::Approx(23.66).epsilon(1e-3));
  }
  SUBCASE("auto-spectrum") {
    const double z = 20.0;
    const double ratio = integral_length(w, z) / wind_mean(w, z);
    CHECK(auto_spectrum(w, z, 0.0) ==
          doctest::Approx(turbulence_variance(w) * w.lambda1 * ratio));
    // The normalized spectrum integrates to the variance: substitute
    // n = tan(theta) to reach the algebraic tail.
    const int steps = 200000;
    double integral = 0.0;
    for (int i = 0; i < steps; ++i) {
      const double th = (i + 0.5) * (M_PI / 2) / steps;
      const double n = std::tan(th);
      integral += auto_spectrum(w, z, n) / (std::cos(th) * std::cos(th)) * (M_PI / 2) / steps;
    }
    CHECK(std::abs(integral / turbulence_variance(w) - 1.0) < 0.05);
    CHECK(auto_spectrum(w, z, 2.5) >= 0.0);
  }
  SUBCASE("coherence target") {
    const Eigen::RowVector2d a(10.0, 10.0), b(10.0, 20.0), c(90.0, 90.0);
    CHECK(coherence_target(w, a, a, 1.3) == 1.0);
    CHECK(coherence_target(w, a, b, 0.0) == 1.0);
    const double mu = 0.5 * (wind_mean(w, 10.0) + wind_mean(w, 20.0));
    CHECK(coherence_target(w, a, b, 0.5) == doctest::Approx(std::exp(-0.5 * 0.5 * 10.0 / mu)));
    CHECK(coherence_target(w, a, c, 3.0) < 1e-3);
    CHECK(coherence_target(w, a, b, 0.7) == coherence_target(w, b, a, 0.7));
  }
  SUBCASE("cross-spectral matrix") {
    const Eigen::RowVector2d a(30.0, 40.0), far(0.0, 100.0);
    CHECK(cpsd(w, a, a, 0.4) == doctest::Approx(auto_spectrum(w, 40.0, 0.4)));
    CHECK(cpsd(w, a, far, 3.0) < 1e-3 * auto_spectrum(w, 40.0, 3.0));
    const Matrix pts = (Matrix(3, 2) << 0.0, 10.0, 50.0, 10.0, 100.0, 10.0).finished();
    const Matrix s = cpsd_matrix(w, pts, 0.5);
    CHECK(s.isApprox(s.transpose()));
    CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(s).eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("spectral representation sampler") {
  WindSpec w;  // 4 x 4 grid, 64 frequencies
  const Matrix pts = w.grid();
  const SrmSampler srm(w, pts);
  const int n = 2000;
  const Matrix x = srm.sample_turbulence(n, 11);
  const Eigen::Index nt = w.n_time();
  REQUIRE(x.cols() == pts.rows() * nt);

  SUBCASE("zero mean at every point") {
    // Average over samples at one time step; phases are independent per sample.
    for (Eigen::Index p = 0; p < pts.rows(); ++p) {
      const Eigen::VectorXd v = x.col(p * nt);
      const double sd = std::sqrt((v.array() - v.mean()).square().sum() / (n - 1));
      CHECK(std::abs(v.mean()) < 3.0 * sd / std::sqrt(n));
    }
  }
  SUBCASE("point variance matches the discrete spectral sum") {
    for (Eigen::Index p = 0; p < pts.rows(); ++p) {
      const Matrix block = x.middleCols(p * nt, nt);
      const double var = block.array().square().mean();
      CHECK(std::abs(var / srm.spectral_variance(p) - 1.0) < 0.1);
    }
  }
  SUBCASE("Welch coherence matches the squared target") {
    // Magnitude-squared coherence of an SRM pair with coherence Coh is Coh^2.
    const auto plan = clfm::constraints::make_welch_plan(nt);
    const Eigen::VectorXd f = plan.frequencies(w.dt());
    const Eigen::Index i = 0, j = 1;  // vertical neighbours
    const Eigen::VectorXd g = clfm::constraints::welch_coherence(
        x.middleCols(i * nt, nt), x.middleCols(j * nt, nt), plan);
    double mse = 0.0;
    for (Eigen::Index k = 0; k < f.size(); ++k) {
      mse += std::pow(g(k) - std::pow(coherence_target(w, pts.row(i), pts.row(j), f(k)), 2), 2);
    }
    CHECK(mse / static_cast<double>(f.size()) < 0.005);
  }
  SUBCASE("deterministic in the seed") {
    CHECK(srm.sample_turbulence(3, 5) == srm.sample_turbulence(3, 5));
    CHECK(srm.sample_turbulence(3, 5) != srm.sample_turbulence(3, 6));
  }
  SUBCASE("mean profile is added on top") {
    const Matrix u = srm.sample_wind(2, 11);
    const Matrix t = srm.sample_turbulence(2, 11);
    CHECK((u - t).row(0).isApprox(srm.mean_row()));
  }
}

TEST_CASE("lognormal field from a truncated KL expansion") {
  const Matrix grid = grid_2d(0.0, 1.0, 10, 0.0, 1.0, 10);
  SUBCASE("beta = 0 is constant") {
    LognormalKlSampler s(LognormalKlSpec{1.0, 0.0, 1.0, 5}, grid);
    CHECK((s.sample(4, 1).array() == 1.0).all());
  }
  SUBCASE("pointwise median is alpha + beta") {
    LognormalKlSampler s(LognormalKlSpec{}, grid);
    Matrix v = s.sample(10000, 2);
    for (Eigen::Index p : {0, 45, 99}) {
      Eigen::VectorXd col = v.col(p);
      std::sort(col.data(), col.data() + col.size());
      const double median = 0.5 * (col(4999) + col(5000));
      CHECK(median == doctest::Approx(1.1).epsilon(0.01));
    }
  }
  SUBCASE("five terms keep nearly all the variance") {
    LognormalKlSampler s(LognormalKlSpec{}, grid);
    CHECK(s.retained_variance_fraction() >= 0.99);
    const auto& ev = s.eigenvalues();
    REQUIRE(ev.size() == 5);
    for (Eigen::Index i = 1; i < ev.size(); ++i) CHECK(ev(i) <= ev(i - 1));
  }
}

TEST_CASE("FFT conventions") {
  SUBCASE("constant series") {
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(8, 1.5);
    const auto X = fft(x);
    CHECK(X(0).real() == doctest::Approx(12.0));
    for (int k = 1; k < 8; ++k) CHECK(std::abs(X(k)) < 1e-12);
  }
  SUBCASE("single cosine") {
    const int n = 32, k0 = 5;
    Eigen::VectorXd x(n);
    for (int t = 0; t < n; ++t) x(t) = std::cos(2 * M_PI * k0 * t / n);
    const auto X = fft(x);
    for (int k = 0; k < n; ++k) {
      if (k == k0 || k == n - k0) {
        CHECK(std::abs(X(k)) == doctest::Approx(n / 2.0));
      } else {
        CHECK(std::abs(X(k)) < 1e-10);
      }
    }
  }
  SUBCASE("Parseval and round trip") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd;
    Eigen::VectorXd x(256);
    for (auto& v : x) v = nd(rng);
    const auto X = fft(x);
    CHECK(std::abs(x.squaredNorm() - X.squaredNorm() / 256.0) < 1e-10 * x.squaredNorm());
    const ComplexVector<double> back = ifft(X);
    CHECK((back.real() - x).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("non-power-of-two length") {
    CHECK_THROWS_AS(fft(Eigen::VectorXd::Ones(12)), std::invalid_argument);
  }
}
