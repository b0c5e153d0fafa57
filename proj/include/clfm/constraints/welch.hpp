#pragma once

#include <vector>

#include "clfm/ad/graph.hpp"

namespace clfm::constraints {

using ad::Matrix;
using ad::Var;

/// Segmenting for Welch averages: Hann window, per-segment mean removal.
/// Retained bins are 1 .. L/2 - 1; the DC and Nyquist bins carry no phase
/// information for real series and are dropped.
struct WelchPlan {
  Eigen::Index series_length = 0;
  Eigen::Index segment = 0;
  Eigen::Index step = 0;
  Eigen::Index segments = 0;
  Eigen::RowVectorXd window;

  Eigen::Index bins() const { return segment / 2 - 1; }
  /// Frequencies (Hz) of the retained bins for sample spacing dt.
  Eigen::VectorXd frequencies(double dt) const;
  std::vector<Eigen::Index> starts() const;
};

/// Largest power of two not exceeding n / 4.
Eigen::Index default_segment_length(Eigen::Index n);

/// `segment` = 0 selects the default. Throws std::invalid_argument for fewer
/// than two segments, a non-power-of-two segment, or overlap outside [0, 1).
WelchPlan make_welch_plan(Eigen::Index series_length, Eigen::Index segment = 0,
                          double overlap = 0.5);

Eigen::RowVectorXd hann_window(Eigen::Index n);

/// Magnitude-squared coherence between x and y, both B x N; spectra are
/// averaged over segments and over the B rows before forming the ratio.
Eigen::VectorXd welch_coherence(const Matrix& x, const Matrix& y, const WelchPlan& plan);

/// Retained-bin spectra of every windowed segment of every row, (B * segments) x bins.
Eigen::MatrixXcd welch_segments(const Matrix& x, const WelchPlan& plan);
/// Coherence from two outputs of welch_segments.
Eigen::VectorXd coherence_from_segments(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

/// Averaged auto and cross spectra of one point, kept on the graph.
struct PointSpectra {
  Var re;  // (segments * B) x bins
  Var im;
};

/// Windowed segment spectra of the series in `x` (B x N).
PointSpectra segment_spectra(const Var& x, const WelchPlan& plan);

/// Coherence between two points from their segment spectra, 1 x bins.
Var coherence_from_spectra(const PointSpectra& a, const PointSpectra& b);

/// Graph version of welch_coherence (returns 1 x bins).
Var welch_coherence(const Var& x, const Var& y, const WelchPlan& plan);

}  // namespace clfm::constraints
