#pragma once

#include <cstdint>
#include <vector>

#include "clfm/fieldgen/wind.hpp"

namespace clfm::fieldgen {

/// Spectral-representation sampler for the zero-mean turbulence W at a fixed
/// set of points. For each frequency n_l the CPSD matrix is factored
/// (H_l H_l^T = S(n_l), Cholesky when positive definite) and
///   W_j(t) = sum_l sum_m H_l(j, m) sqrt(2 dn) cos(2 pi n_l t + phi_{m l}),
/// with independent phases phi ~ U(0, 2 pi). This is the usual two-sided
/// angular-frequency form 2 |H| sqrt(d omega) cos(...) rewritten for a one-sided
/// spectrum in Hz, so Var W_j = sum_l S11(x_j; n_l) dn.
class SrmSampler {
 public:
  SrmSampler(const WindSpec& spec, Eigen::MatrixXd points);

  /// n x (P * N_t); column p * N_t + k holds point p at time step k.
  Eigen::MatrixXd sample_turbulence(int n, std::uint64_t seed) const;
  /// Turbulence plus the log-law mean profile.
  Eigen::MatrixXd sample_wind(int n, std::uint64_t seed) const;

  /// Discrete variance the sampler reproduces at point p: sum_l S11 dn.
  double spectral_variance(Eigen::Index p) const;
  Eigen::RowVectorXd mean_row() const;

  const WindSpec& spec() const { return spec_; }
  const Eigen::MatrixXd& points() const { return points_; }
  Eigen::Index n_points() const { return points_.rows(); }
  /// Frequencies whose CPSD matrix needed negative eigenvalues clipped.
  int clipped_bins() const { return clipped_; }

 private:
  WindSpec spec_;
  Eigen::MatrixXd points_;
  std::vector<Eigen::MatrixXd> factors_;  // per frequency, P x P lower
  Eigen::MatrixXd cos_table_;             // N_f x N_t
  Eigen::MatrixXd sin_table_;
  int clipped_ = 0;
};

}  // namespace clfm::fieldgen
