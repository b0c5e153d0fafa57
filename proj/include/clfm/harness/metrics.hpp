#pragma once

#include <optional>
#include <utility>

#include "json.hpp"

#include <Eigen/Dense>

namespace clfm::harness {

/// Sample statistics of generated fields against ground-truth draws on a grid.
struct MetricsReport {
  double mean_mse = 0.0;
  double covariance_mse = 0.0;
  double variance_mse = 0.0;
  double mean_rel_l2 = 0.0;
  double variance_rel_l2 = 0.0;
  std::optional<double> coherence_mse;
  Eigen::Index n_generated = 0;
  Eigen::Index n_truth = 0;
  Eigen::Index grid_points = 0;

  nlohmann::json to_json() const;
};

/// Unbiased (1 / (n - 1)) covariance of the columns of x (n x P).
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& x);

/// `generated` and `truth` are (samples x grid points); both need >= 2 rows.
MetricsReport compute_metrics(const Eigen::MatrixXd& generated, const Eigen::MatrixXd& truth);

/// Linear-interpolation quantile (p in [0, 1]) of the values.
double quantile(Eigen::VectorXd values, double p);

/// Length of the intersection of [a.first, a.second] and [b.first, b.second]
/// as a fraction of the length of b.
double interval_overlap(std::pair<double, double> a, std::pair<double, double> b);

/// Relative L2 distance |a - b| / |b|.
double relative_l2(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace clfm::harness
