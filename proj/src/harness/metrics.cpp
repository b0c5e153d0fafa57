#include "clfm/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace clfm::harness {

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j;
  j["mean_mse"] = mean_mse;
  j["covariance_mse"] = covariance_mse;
  j["variance_mse"] = variance_mse;
  j["mean_rel_l2"] = mean_rel_l2;
  j["variance_rel_l2"] = variance_rel_l2;
  if (coherence_mse) j["coherence_mse"] = *coherence_mse;
  j["n_generated"] = n_generated;
  j["n_truth"] = n_truth;
  j["grid_points"] = grid_points;
  return j;
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& x) {
  if (x.rows() < 2) throw std::invalid_argument("sample_covariance: need at least 2 samples");
  const Eigen::MatrixXd d = x.rowwise() - x.colwise().mean();
  return (d.transpose() * d) / static_cast<double>(x.rows() - 1);
}

double relative_l2(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double denom = b.norm();
  if (denom == 0.0) throw std::domain_error("relative_l2: reference has zero norm");
  return (a - b).norm() / denom;
}

MetricsReport compute_metrics(const Eigen::MatrixXd& generated, const Eigen::MatrixXd& truth) {
  if (generated.rows() < 2 || truth.rows() < 2) {
    throw std::invalid_argument("compute_metrics: need at least 2 samples on each side");
  }
  if (generated.cols() != truth.cols() || generated.cols() < 1) {
    throw std::invalid_argument("compute_metrics: grids differ or are empty");
  }
  MetricsReport r;
  const Eigen::VectorXd mg = generated.colwise().mean().transpose();
  const Eigen::VectorXd mt = truth.colwise().mean().transpose();
  const Eigen::MatrixXd cg = sample_covariance(generated);
  const Eigen::MatrixXd ct = sample_covariance(truth);
  const Eigen::VectorXd vg = cg.diagonal();
  const Eigen::VectorXd vt = ct.diagonal();
  r.mean_mse = (mg - mt).squaredNorm() / static_cast<double>(mg.size());
  r.covariance_mse = (cg - ct).squaredNorm() / static_cast<double>(cg.size());
  r.variance_mse = (vg - vt).squaredNorm() / static_cast<double>(vg.size());
  r.mean_rel_l2 = relative_l2(mg, mt);
  r.variance_rel_l2 = relative_l2(vg, vt);
  r.n_generated = generated.rows();
  r.n_truth = truth.rows();
  r.grid_points = generated.cols();
  return r;
}

double quantile(Eigen::VectorXd values, double p) {
  if (values.size() == 0) throw std::invalid_argument("quantile: no values");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("quantile: p outside [0, 1]");
  std::sort(values.data(), values.data() + values.size());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<Eigen::Index>(std::floor(pos));
  const auto hi = std::min<Eigen::Index>(lo + 1, values.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * values(lo) + w * values(hi);
}

double interval_overlap(std::pair<double, double> a, std::pair<double, double> b) {
  const double len = b.second - b.first;
  if (!(len > 0.0)) throw std::invalid_argument("interval_overlap: empty reference interval");
  const double inter = std::min(a.second, b.second) - std::max(a.first, b.first);
  return std::max(0.0, inter) / len;
}

}  // namespace clfm::harness
