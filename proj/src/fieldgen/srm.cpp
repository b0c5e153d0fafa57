#include "clfm/fieldgen/srm.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "clfm/fieldgen/gp.hpp"

namespace clfm::fieldgen {

namespace {

// H with H H^T = S. Cholesky (with relative jitter) where S is numerically
// positive definite; otherwise the factor of S with negative eigenvalues
// clipped to zero. With heterogeneous spectra the coherence model is not
// guaranteed PSD at the lowest frequencies.
Eigen::MatrixXd factor_cpsd(const Eigen::MatrixXd& s, int& clipped) {
  const double scale = s.diagonal().mean();
  try {
    return jittered_cholesky(s, 1e-12, 1e-4, scale).lower;
  } catch (const std::runtime_error&) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
    ++clipped;
    return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }
}

}  // namespace

SrmSampler::SrmSampler(const WindSpec& spec, Eigen::MatrixXd points)
    : spec_(spec), points_(std::move(points)) {
  spec_.validate();
  const Eigen::VectorXd freqs = spec_.frequencies();
  const Eigen::VectorXd t = spec_.times();
  factors_.reserve(freqs.size());
  for (Eigen::Index l = 0; l < freqs.size(); ++l) {
    const Eigen::MatrixXd s = cpsd_matrix(spec_, points_, freqs(l));
    factors_.push_back(factor_cpsd(s, clipped_));
  }
  cos_table_.resize(freqs.size(), t.size());
  sin_table_.resize(freqs.size(), t.size());
  for (Eigen::Index l = 0; l < freqs.size(); ++l) {
    for (Eigen::Index k = 0; k < t.size(); ++k) {
      const double phase = 2.0 * std::numbers::pi * freqs(l) * t(k);
      cos_table_(l, k) = std::cos(phase);
      sin_table_(l, k) = std::sin(phase);
    }
  }
}

Eigen::MatrixXd SrmSampler::sample_turbulence(int n, std::uint64_t seed) const {
  const Eigen::Index p = points_.rows();
  const Eigen::Index nf = cos_table_.rows();
  const Eigen::Index nt = cos_table_.cols();
  const double amp = std::sqrt(2.0 * spec_.df());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  Eigen::MatrixXd out(n, p * nt);
  Eigen::MatrixXd cphi(p, nf), sphi(p, nf), a(p, nf), b(p, nf);
  for (int s = 0; s < n; ++s) {
    for (Eigen::Index m = 0; m < p; ++m) {
      for (Eigen::Index l = 0; l < nf; ++l) {
        const double phi = phase(rng);
        cphi(m, l) = std::cos(phi);
        sphi(m, l) = std::sin(phi);
      }
    }
    // cos(w t + phi) = cos(w t) cos(phi) - sin(w t) sin(phi)
    for (Eigen::Index l = 0; l < nf; ++l) {
      a.col(l).noalias() = factors_[l] * cphi.col(l);
      b.col(l).noalias() = factors_[l] * sphi.col(l);
    }
    const Eigen::MatrixXd w = amp * (a * cos_table_ - b * sin_table_);  // P x N_t
    for (Eigen::Index j = 0; j < p; ++j) out.row(s).segment(j * nt, nt) = w.row(j);
  }
  return out;
}

Eigen::RowVectorXd SrmSampler::mean_row() const {
  const Eigen::Index nt = cos_table_.cols();
  Eigen::RowVectorXd mu(points_.rows() * nt);
  for (Eigen::Index j = 0; j < points_.rows(); ++j) {
    mu.segment(j * nt, nt).setConstant(wind_mean(spec_, points_(j, 1)));
  }
  return mu;
}

Eigen::MatrixXd SrmSampler::sample_wind(int n, std::uint64_t seed) const {
  Eigen::MatrixXd w = sample_turbulence(n, seed);
  w.rowwise() += mean_row();
  return w;
}

double SrmSampler::spectral_variance(Eigen::Index p) const {
  double total = 0.0;
  for (double f : spec_.frequencies()) total += auto_spectrum(spec_, points_(p, 1), f);
  return total * spec_.df();
}

}  // namespace clfm::fieldgen
