#include "clfm/fieldgen/poisson.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace clfm::fieldgen {

double PoissonSolution::u_at(double xq) const {
  const Eigen::Index n = x.size() - 1;
  const double h = kPoissonLength / static_cast<double>(n);
  if (xq <= 0.0) return u(0);
  if (xq >= kPoissonLength) return u(n);
  const auto i = std::min<Eigen::Index>(static_cast<Eigen::Index>(xq / h), n - 1);
  const double w = (xq - x(i)) / h;
  return (1.0 - w) * u(i) + w * u(i + 1);
}

PoissonSolution poisson_solve(double eps, int resolution) {
  if (resolution < 64) {
    throw std::invalid_argument("poisson_solve: resolution must be >= 64, got " +
                                std::to_string(resolution));
  }
  PoissonSolution sol;
  sol.eps = eps;
  sol.x = Eigen::VectorXd::LinSpaced(resolution + 1, 0.0, kPoissonLength);
  sol.v = sol.x.unaryExpr([eps](double xi) { return poisson_coefficient(eps, xi); });
  if ((sol.v.array() <= 0.0).any()) {
    throw std::domain_error("poisson_solve: coefficient v is non-positive on the grid");
  }
  const double h = kPoissonLength / resolution;
  const Eigen::VectorXd inv_v = sol.v.cwiseInverse();
  const Eigen::VectorXd g = (1.0 - sol.x.array().cos()).matrix().cwiseProduct(inv_v);
  auto trapezoid = [h](const Eigen::VectorXd& f) {
    return h * (f.sum() - 0.5 * (f(0) + f(f.size() - 1)));
  };
  const double a = trapezoid(g) / trapezoid(inv_v);
  const Eigen::VectorXd integrand =
      ((a - 1.0 + sol.x.array().cos()) * inv_v.array()).matrix();
  sol.u.resize(resolution + 1);
  sol.u(0) = 0.0;
  for (int i = 1; i <= resolution; ++i) {
    sol.u(i) = sol.u(i - 1) + 0.5 * h * (integrand(i - 1) + integrand(i));
  }
  sol.u(resolution) = 0.0;  // equal to quadrature roundoff; pin the boundary value
  return sol;
}

double sample_poisson_eps(const PoissonSpec& spec, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(spec.eps_mean, spec.eps_std);
  // v = 1 + eps x^2 > 0 on [0, pi] iff eps > -1 / pi^2.
  const double floor = -1.0 / (kPoissonLength * kPoissonLength);
  for (;;) {
    const double eps = dist(rng);
    if (eps > floor) return eps;
  }
}

}  // namespace clfm::fieldgen
