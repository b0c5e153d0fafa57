#pragma once

#include <functional>

#include "clfm/ad/graph.hpp"

namespace clfm::constraints {

using ad::Matrix;
using ad::Var;

/// A batch of fields queried at coordinates: (P x 1) -> (B x P).
using FieldFn = std::function<Var(const Matrix& coords)>;

struct PoissonResidualOptions {
  double lo = 0.0;
  double hi = 0.0;
  double h = 0.0;
  bool boundary = true;
  std::function<double(double)> forcing;
};

struct PoissonResidual {
  Var interior;  // mean r^2 over samples and points
  Var boundary;  // mean over samples of u(lo)^2 + u(hi)^2 (zero when disabled)
  Var total;
};

/// r = v' u' + v u'' + f at each collocation point, with central differences
/// on {x - h, x, x + h}. Points closer than h to either end are moved inward.
PoissonResidual poisson_physics_residual(const FieldFn& u, const FieldFn& v,
                                         const Eigen::VectorXd& points,
                                         const PoissonResidualOptions& options);

/// Collocation points after the inward shift applied by the residual.
Eigen::VectorXd shift_inward(const Eigen::VectorXd& points, double lo, double hi, double h);

}  // namespace clfm::constraints
