#include "clfm/constraints/statistical.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace clfm::constraints {

using Eigen::Index;

namespace {

void require_batch(const Var& u, const char* where) {
  if (u.rows() < 2) {
    throw std::invalid_argument(std::string(where) + ": need a batch of at least 2, got " +
                                std::to_string(u.rows()));
  }
}

void require_pairs(const PairSet& pairs, Index c, const char* where) {
  if (pairs.size() == 0) throw std::invalid_argument(std::string(where) + ": empty pair set");
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (pairs.first[k] >= c || pairs.second[k] >= c) {
      throw std::invalid_argument(std::string(where) + ": pair index outside " +
                                  std::to_string(c) + " collocation points");
    }
  }
}

Matrix pair_values(const Matrix& m, const PairSet& pairs) {
  Matrix out(static_cast<Index>(pairs.size()), 1);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    out(static_cast<Index>(k), 0) = m(pairs.first[k], pairs.second[k]);
  }
  return out;
}

}  // namespace

PairSet all_pairs(int c) {
  PairSet p;
  for (int i = 0; i < c; ++i) {
    for (int j = i; j < c; ++j) {
      p.first.push_back(i);
      p.second.push_back(j);
    }
  }
  return p;
}

PairSet select_pairs(int c, std::mt19937_64& rng) {
  if (c < 1) throw std::invalid_argument("select_pairs: need at least one collocation point");
  if (c <= kAllPairsLimit) return all_pairs(c);
  std::uniform_int_distribution<Index> pick(0, c - 1);
  PairSet p;
  for (int k = 0; k < kRandomPairBudget; ++k) {
    Index i = pick(rng);
    Index j = pick(rng);
    if (i > j) std::swap(i, j);
    p.first.push_back(i);
    p.second.push_back(j);
  }
  return p;
}

Var pair_covariance(const Var& u, const PairSet& pairs) {
  require_batch(u, "pair_covariance");
  require_pairs(pairs, u.cols(), "pair_covariance");
  const Var centred = ad::transpose(ad::sub(u, ad::mean_rows(u)));  // C x B
  const Var a = ad::gather_rows(centred, pairs.first);
  const Var b = ad::gather_rows(centred, pairs.second);
  return ad::mean_cols(ad::mul(a, b));
}

Var covariance_residual(const Var& u, const Matrix& target, const PairSet& pairs) {
  const Var c_hat = pair_covariance(u, pairs);
  const Var t = Var::constant(pair_values(target, pairs));
  return ad::mean(ad::square(ad::sub(c_hat, t)));
}

Var correlation_residual(const Var& u, const Matrix& target, const PairSet& pairs) {
  require_batch(u, "correlation_residual");
  require_pairs(pairs, u.cols(), "correlation_residual");
  constexpr double kFloor = 1e-8;

  const Matrix centred = u.value().rowwise() - u.value().colwise().mean();
  const Eigen::RowVectorXd sd =
      (centred.array().square().colwise().sum() / static_cast<double>(u.rows())).sqrt();
  PairSet kept;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const Index i = pairs.first[k], j = pairs.second[k];
    if (sd(i) < kFloor || sd(j) < kFloor) continue;
    if (std::sqrt(target(i, i)) < kFloor || std::sqrt(target(j, j)) < kFloor) continue;
    kept.first.push_back(i);
    kept.second.push_back(j);
  }
  if (kept.size() == 0) {
    throw std::domain_error("correlation_residual: every pair has a degenerate variance");
  }

  const Var c_hat = pair_covariance(u, kept);
  const Var var = ad::transpose(ad::mean_rows(
      ad::square(ad::sub(u, ad::mean_rows(u)))));  // C x 1
  const Var denom = ad::sqrt(ad::mul(ad::gather_rows(var, kept.first),
                                     ad::gather_rows(var, kept.second)));
  Matrix rho(static_cast<Index>(kept.size()), 1);
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const Index i = kept.first[k], j = kept.second[k];
    rho(static_cast<Index>(k), 0) = target(i, j) / std::sqrt(target(i, i) * target(j, j));
  }
  return ad::mean(ad::square(ad::sub(ad::div(c_hat, denom), Var::constant(rho))));
}

}  // namespace clfm::constraints
