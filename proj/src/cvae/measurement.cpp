#include "clfm/cvae/measurement.hpp"

#include <stdexcept>
#include <string>

#include "clfm/fieldgen/kernels.hpp"

namespace clfm::cvae {

MeasurementOperator::MeasurementOperator(Matrix s, nets::DomainBox box, std::vector<int> f)
    : sensors(std::move(s)), fields(std::move(f)) {
  if (sensors.rows() < 1) throw std::invalid_argument("measurement: need at least one sensor");
  if (fields.empty()) throw std::invalid_argument("measurement: no observed fields");
  for (Eigen::Index i = 0; i < sensors.rows(); ++i) {
    if (!box.contains(sensors.row(i), 1e-12)) {
      throw std::invalid_argument("measurement: sensor " + std::to_string(i) +
                                  " lies outside the domain");
    }
  }
}

Var MeasurementOperator::apply(const std::vector<nets::DeepOnet>& decoders, const Var& z) const {
  return apply([&](int f, const Matrix& x) { return decoders[f].decode(z, x); },
               decoders.size());
}

Var MeasurementOperator::apply(const std::function<Var(int, const Matrix&)>& decode,
                               std::size_t n_fields) const {
  std::vector<Var> parts;
  for (int f : fields) {
    if (f < 0 || f >= static_cast<int>(n_fields)) {
      throw std::invalid_argument("measurement: field index " + std::to_string(f) +
                                  " has no decoder");
    }
    parts.push_back(decode(f, sensors));
  }
  return parts.size() == 1 ? parts.front() : ad::concat_cols(parts);
}

Matrix uniform_sensors(double lo, double hi, int m) {
  if (m < 1) throw std::invalid_argument("uniform_sensors: m must be positive");
  if (m == 1) return Matrix::Constant(1, 1, 0.5 * (lo + hi));
  return fieldgen::linspace_column(lo, hi, m);
}

}  // namespace clfm::cvae
