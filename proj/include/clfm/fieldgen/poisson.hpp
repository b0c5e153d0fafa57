#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

namespace clfm::fieldgen {

/// (v u')' = -sin x on [0, pi], u(0) = u(pi) = 0, v(x) = 1 + eps x^2,
/// eps ~ N(eps_mean, eps_std^2).
struct PoissonSpec {
  double eps_mean = 0.2;
  double eps_std = 0.05;
  int resolution = 1024;
};

inline constexpr double kPoissonLength = std::numbers::pi;

inline double poisson_forcing(double x) { return std::sin(x); }
inline double poisson_coefficient(double eps, double x) { return 1.0 + eps * x * x; }

struct PoissonSolution {
  double eps = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd u;
  Eigen::VectorXd v;

  /// Linear interpolation of u between grid nodes.
  double u_at(double xq) const;
  double v_at(double xq) const { return poisson_coefficient(eps, xq); }
};

/// Quadrature solve: v u' = A - (1 - cos x), u(x) = int_0^x (A - 1 + cos s) / v(s) ds,
/// with A fixed by u(pi) = 0. Cumulative trapezoid on `resolution` intervals.
PoissonSolution poisson_solve(double eps, int resolution);

/// Draws eps, rejecting values that make v non-positive on [0, pi].
double sample_poisson_eps(const PoissonSpec& spec, std::mt19937_64& rng);

}  // namespace clfm::fieldgen
