#pragma once

#include <array>

#include <Eigen/Dense>

namespace clfm::fieldgen {

/// Along-wind turbulence on a vertical (x2, x3) plane over time.
/// Spatial points are rows (x2, x3); heights in metres, frequencies in Hz.
struct WindSpec {
  double shear_velocity = 1.8;  // u*
  double roughness = 0.015;     // z0
  std::array<double, 3> decay{3.0, 3.0, 0.5};  // per-axis coherence decay (x1, x2, x3)
  double lambda1 = 6.868;
  double width = 100.0;       // x2 in [0, width]
  double height = 100.0;      // x3 in [min_height, height]
  double min_height = 1.0;
  int nx2 = 4;
  int nx3 = 4;
  int n_freq = 64;            // power of two
  double f_max = 3.0;

  double df() const { return f_max / n_freq; }
  int n_time() const { return 2 * n_freq; }
  double duration() const { return 1.0 / df(); }
  double dt() const { return duration() / n_time(); }
  /// (nx2 * nx3) x 2 grid of (x2, x3); x3 varies fastest.
  Eigen::MatrixXd grid() const;
  /// Simulation frequencies at bin midpoints (l + 1/2) df.
  Eigen::VectorXd frequencies() const;
  Eigen::VectorXd times() const;
  void validate() const;
};

/// Log-law mean speed 2.5 u* ln(x3 / z0).
double wind_mean(const WindSpec& spec, double x3);
/// sigma_1^2 = [6 - 1.1 atan(ln z0 + 1.75)] u*^2.
double turbulence_variance(const WindSpec& spec);
/// L_1 = 300 (x3 / 200)^(0.67 + 0.05 ln z0).
double integral_length(const WindSpec& spec, double x3);
/// One-sided auto-spectrum S11(x3; n) = sigma^2 lambda1 (L/mu) / (1 + 1.5 lambda1 n L/mu)^(5/3).
double auto_spectrum(const WindSpec& spec, double x3, double n);
/// exp(-n |c . (x - x')| / (0.5 (mu(x) + mu(x')))) for rows (x2, x3).
double coherence_target(const WindSpec& spec, const Eigen::RowVector2d& a,
                        const Eigen::RowVector2d& b, double n);
double cpsd(const WindSpec& spec, const Eigen::RowVector2d& a, const Eigen::RowVector2d& b,
            double n);
/// P x P cross-spectral matrix at frequency n for the rows of `points`.
Eigen::MatrixXd cpsd_matrix(const WindSpec& spec, const Eigen::MatrixXd& points, double n);

}  // namespace clfm::fieldgen
