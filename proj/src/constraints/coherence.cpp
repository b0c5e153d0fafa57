#include "clfm/constraints/coherence.hpp"

#include <stdexcept>
#include <string>

namespace clfm::constraints {

using Eigen::Index;

PairSet distinct_pairs(int c) {
  PairSet p;
  for (int i = 0; i < c; ++i) {
    for (int j = i + 1; j < c; ++j) {
      p.first.push_back(i);
      p.second.push_back(j);
    }
  }
  return p;
}

Var coherence_residual(const Var& series, Index points, const PairSet& pairs,
                       const Matrix& target, const WelchPlan& plan) {
  const Index n = plan.series_length;
  if (points < 1 || series.cols() != points * n) {
    throw ad::ShapeError("coherence_residual",
                         "expected " + std::to_string(points) + " series of length " +
                             std::to_string(n) + ", got " + std::to_string(series.cols()) +
                             " columns");
  }
  if (pairs.size() == 0) throw std::invalid_argument("coherence_residual: no pairs");
  if (target.rows() != static_cast<Index>(pairs.size()) || target.cols() != plan.bins()) {
    throw ad::ShapeError("coherence_residual", "target must be pairs x bins");
  }

  std::vector<PointSpectra> spectra(static_cast<std::size_t>(points));
  std::vector<bool> ready(static_cast<std::size_t>(points), false);
  auto get = [&](Index c) -> const PointSpectra& {
    if (c < 0 || c >= points) throw std::invalid_argument("coherence_residual: bad pair index");
    if (!ready[c]) {
      spectra[c] = segment_spectra(ad::slice_cols(series, c * n, n), plan);
      ready[c] = true;
    }
    return spectra[c];
  };

  std::vector<Var> rows;
  rows.reserve(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    rows.push_back(coherence_from_spectra(get(pairs.first[k]), get(pairs.second[k])));
  }
  const Var gamma = ad::concat_rows(rows);
  return ad::mean(ad::square(ad::sub(gamma, Var::constant(target))));
}

}  // namespace clfm::constraints
