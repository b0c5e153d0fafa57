#include "clfm/fieldgen/wind.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "clfm/fieldgen/fft.hpp"
#include "clfm/fieldgen/kernels.hpp"

namespace clfm::fieldgen {

Eigen::MatrixXd WindSpec::grid() const {
  return grid_2d(0.0, width, nx2, min_height, height, nx3);
}

Eigen::VectorXd WindSpec::frequencies() const {
  Eigen::VectorXd n(n_freq);
  for (int l = 0; l < n_freq; ++l) n(l) = (l + 0.5) * df();
  return n;
}

Eigen::VectorXd WindSpec::times() const {
  Eigen::VectorXd t(n_time());
  for (int k = 0; k < n_time(); ++k) t(k) = k * dt();
  return t;
}

void WindSpec::validate() const {
  if (min_height <= roughness) {
    throw std::invalid_argument("wind: minimum height must exceed the roughness length");
  }
  if (!is_power_of_two(n_freq)) {
    throw std::invalid_argument("wind: n_freq must be a power of two, got " +
                                std::to_string(n_freq));
  }
  if (nx2 < 1 || nx3 < 1 || f_max <= 0.0) throw std::invalid_argument("wind: empty grid");
}

double wind_mean(const WindSpec& spec, double x3) {
  if (x3 <= spec.roughness) {
    throw std::domain_error("wind_mean: height " + std::to_string(x3) +
                            " is not above the roughness length");
  }
  return 2.5 * spec.shear_velocity * std::log(x3 / spec.roughness);
}

double turbulence_variance(const WindSpec& spec) {
  const double u = spec.shear_velocity;
  return (6.0 - 1.1 * std::atan(std::log(spec.roughness) + 1.75)) * u * u;
}

double integral_length(const WindSpec& spec, double x3) {
  return 300.0 * std::pow(x3 / 200.0, 0.67 + 0.05 * std::log(spec.roughness));
}

double auto_spectrum(const WindSpec& spec, double x3, double n) {
  const double ratio = integral_length(spec, x3) / wind_mean(spec, x3);
  return turbulence_variance(spec) * spec.lambda1 * ratio /
         std::pow(1.0 + 1.5 * spec.lambda1 * n * ratio, 5.0 / 3.0);
}

double coherence_target(const WindSpec& spec, const Eigen::RowVector2d& a,
                        const Eigen::RowVector2d& b, double n) {
  const double d2 = spec.decay[1] * (a(0) - b(0));
  const double d3 = spec.decay[2] * (a(1) - b(1));
  const double dist = std::hypot(d2, d3);
  if (dist == 0.0 || n == 0.0) return 1.0;
  const double mean_speed = 0.5 * (wind_mean(spec, a(1)) + wind_mean(spec, b(1)));
  if (mean_speed <= 0.0) throw std::domain_error("coherence_target: non-positive mean speed");
  return std::exp(-n * dist / mean_speed);
}

double cpsd(const WindSpec& spec, const Eigen::RowVector2d& a, const Eigen::RowVector2d& b,
            double n) {
  return std::sqrt(auto_spectrum(spec, a(1), n) * auto_spectrum(spec, b(1), n)) *
         coherence_target(spec, a, b, n);
}

Eigen::MatrixXd cpsd_matrix(const WindSpec& spec, const Eigen::MatrixXd& points, double n) {
  const Eigen::Index p = points.rows();
  Eigen::MatrixXd s(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i; j < p; ++j) {
      s(i, j) = s(j, i) = cpsd(spec, points.row(i), points.row(j), n);
    }
  }
  return s;
}

}  // namespace clfm::fieldgen
