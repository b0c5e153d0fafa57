#pragma once

#include "clfm/constraints/statistical.hpp"
#include "clfm/constraints/welch.hpp"

namespace clfm::constraints {

/// Squared mismatch between Welch coherence and a target, averaged over pairs
/// and retained frequency bins.
///
/// `series` is B x (C * N): point c occupies columns [c N, (c + 1) N).
/// `target` is K x bins, one row per pair in `pairs`.
Var coherence_residual(const Var& series, Eigen::Index points, const PairSet& pairs,
                       const Matrix& target, const WelchPlan& plan);

/// Distinct pairs only (i < j); the diagonal has coherence 1 by construction.
PairSet distinct_pairs(int c);

}  // namespace clfm::constraints
