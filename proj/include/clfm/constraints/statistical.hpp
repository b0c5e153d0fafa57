#pragma once

#include <random>
#include <utility>
#include <vector>

#include "clfm/ad/graph.hpp"

namespace clfm::constraints {

using ad::Matrix;
using ad::Var;

/// Unordered collocation pairs (i <= j) at which second moments are compared.
struct PairSet {
  std::vector<Eigen::Index> first;
  std::vector<Eigen::Index> second;

  std::size_t size() const { return first.size(); }
};

inline constexpr int kAllPairsLimit = 16;
inline constexpr int kRandomPairBudget = 128;

/// Every pair including the diagonal, C (C + 1) / 2 of them.
PairSet all_pairs(int c);
/// All pairs when c <= 16, otherwise 128 random unordered pairs (with replacement).
PairSet select_pairs(int c, std::mt19937_64& rng);

/// Batch-centred covariance (1/B normalization) at each pair; `u` is B x C. Returns K x 1.
Var pair_covariance(const Var& u, const PairSet& pairs);

/// mean over pairs of (C_hat - target)^2. `target` is the C x C model covariance.
Var covariance_residual(const Var& u, const Matrix& target, const PairSet& pairs);

/// As covariance_residual but comparing correlations. Pairs whose empirical or
/// target standard deviation falls below 1e-8 are skipped; throws
/// std::domain_error if nothing is left.
Var correlation_residual(const Var& u, const Matrix& target, const PairSet& pairs);

}  // namespace clfm::constraints
