#include "clfm/constraints/welch.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "clfm/fieldgen/fft.hpp"

namespace clfm::constraints {

using Eigen::Index;

Eigen::VectorXd WelchPlan::frequencies(double dt) const {
  Eigen::VectorXd f(bins());
  for (Index k = 0; k < bins(); ++k) f(k) = static_cast<double>(k + 1) / (segment * dt);
  return f;
}

std::vector<Index> WelchPlan::starts() const {
  std::vector<Index> s;
  for (Index k = 0; k < segments; ++k) s.push_back(k * step);
  return s;
}

Index default_segment_length(Index n) {
  Index l = 1;
  while (2 * l <= n / 4) l *= 2;
  return l;
}

Eigen::RowVectorXd hann_window(Index n) {
  Eigen::RowVectorXd w(n);
  for (Index i = 0; i < n; ++i) {
    w(i) = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  }
  return w;
}

WelchPlan make_welch_plan(Index series_length, Index segment, double overlap) {
  if (overlap < 0.0 || overlap >= 1.0) {
    throw std::invalid_argument("welch: overlap must be in [0, 1)");
  }
  WelchPlan plan;
  plan.series_length = series_length;
  plan.segment = segment > 0 ? segment : default_segment_length(series_length);
  fieldgen::require_power_of_two(plan.segment, "welch segment");
  if (plan.segment < 4) throw std::invalid_argument("welch: segment shorter than 4 samples");
  plan.step = std::max<Index>(1, static_cast<Index>(std::floor(plan.segment * (1.0 - overlap))));
  plan.segments =
      series_length < plan.segment ? 0 : (series_length - plan.segment) / plan.step + 1;
  if (plan.segments < 2) {
    throw std::invalid_argument("welch: series of length " + std::to_string(series_length) +
                                " gives fewer than 2 segments of " +
                                std::to_string(plan.segment));
  }
  plan.window = hann_window(plan.segment);
  return plan;
}

Eigen::MatrixXcd welch_segments(const Matrix& x, const WelchPlan& plan) {
  if (x.cols() != plan.series_length) {
    throw std::invalid_argument("welch: series length " + std::to_string(x.cols()) +
                                " does not match the plan");
  }
  const Index nb = plan.bins();
  Eigen::MatrixXcd out(x.rows() * plan.segments, nb);
  Eigen::VectorXd seg(plan.segment);
  Index row = 0;
  for (Index r = 0; r < x.rows(); ++r) {
    for (Index s : plan.starts()) {
      seg = x.row(r).segment(s, plan.segment).transpose();
      seg.array() -= seg.mean();
      seg.array() *= plan.window.transpose().array();
      const auto f = fieldgen::fft(seg);
      out.row(row++) = f.segment(1, nb).transpose();
    }
  }
  return out;
}

Eigen::VectorXd coherence_from_segments(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("welch: segment spectra shapes differ");
  }
  const Eigen::RowVectorXd paa = a.cwiseAbs2().colwise().sum();
  const Eigen::RowVectorXd pbb = b.cwiseAbs2().colwise().sum();
  const Eigen::RowVectorXcd cross = a.conjugate().cwiseProduct(b).colwise().sum();
  return (cross.cwiseAbs2().array() / (paa.array() * pbb.array())).transpose();
}

Eigen::VectorXd welch_coherence(const Matrix& x, const Matrix& y, const WelchPlan& plan) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw std::invalid_argument("welch_coherence: series shapes differ");
  }
  return coherence_from_segments(welch_segments(x, plan), welch_segments(y, plan));
}

PointSpectra segment_spectra(const Var& x, const WelchPlan& plan) {
  if (x.cols() != plan.series_length) {
    throw ad::ShapeError("segment_spectra", "series length " + std::to_string(x.cols()) +
                                                " does not match plan " +
                                                std::to_string(plan.series_length));
  }
  std::vector<Var> segs;
  for (Index s : plan.starts()) {
    const Var seg = ad::slice_cols(x, s, plan.segment);
    segs.push_back(ad::sub(seg, ad::mean_cols(seg)));
  }
  const Var windowed = ad::mul(ad::concat_rows(segs), Var::constant(plan.window));
  const Var spec = ad::rfft_rows(windowed);
  const Index half = plan.segment / 2 + 1;
  return {ad::slice_cols(spec, 1, plan.bins()), ad::slice_cols(spec, half + 1, plan.bins())};
}

Var coherence_from_spectra(const PointSpectra& a, const PointSpectra& b) {
  // conj(A) B = (ar br + ai bi) + i (ar bi - ai br); common scale factors cancel.
  const Var paa = ad::sum_rows(ad::add(ad::square(a.re), ad::square(a.im)));
  const Var pbb = ad::sum_rows(ad::add(ad::square(b.re), ad::square(b.im)));
  const Var cr = ad::sum_rows(ad::add(ad::mul(a.re, b.re), ad::mul(a.im, b.im)));
  const Var ci = ad::sum_rows(ad::sub(ad::mul(a.re, b.im), ad::mul(a.im, b.re)));
  return ad::div(ad::add(ad::square(cr), ad::square(ci)), ad::mul(paa, pbb));
}

Var welch_coherence(const Var& x, const Var& y, const WelchPlan& plan) {
  if (x.rows() != y.rows()) throw ad::ShapeError("welch_coherence", "batch sizes differ");
  return coherence_from_spectra(segment_spectra(x, plan), segment_spectra(y, plan));
}

}  // namespace clfm::constraints
