#pragma once

#include <functional>
#include <vector>

#include "clfm/nets/deeponet.hpp"

namespace clfm::cvae {

using ad::Matrix;
using ad::Var;

/// Point evaluation of selected fields at m sensor coordinates.
/// Observations are laid out field-major: [field a at all sensors | field b ...].
struct MeasurementOperator {
  Matrix sensors;              // m x d_x
  std::vector<int> fields{0};  // indices into the model's decoder list

  MeasurementOperator() = default;
  MeasurementOperator(Matrix sensors, nets::DomainBox box, std::vector<int> fields = {0});

  Eigen::Index count() const { return sensors.rows(); }
  Eigen::Index observation_size() const {
    return sensors.rows() * static_cast<Eigen::Index>(fields.size());
  }

  Var apply(const std::vector<nets::DeepOnet>& decoders, const Var& z) const;
  /// Same, with decoding delegated: decode(field, coords) -> B x coords.rows().
  Var apply(const std::function<Var(int, const Matrix&)>& decode, std::size_t n_fields) const;
};

/// m equally spaced points on [lo, hi] including both ends; the midpoint when m = 1.
Matrix uniform_sensors(double lo, double hi, int m);

}  // namespace clfm::cvae
