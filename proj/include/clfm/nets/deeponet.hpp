#pragma once

#include "clfm/nets/mlp.hpp"

namespace clfm::nets {

/// Axis-aligned coordinate box; coordinates are mapped affinely to [-1, 1]
/// per axis before entering a trunk network.
struct DomainBox {
  ad::Vector lo;
  ad::Vector hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Eigen::Ref<const ad::RowVector>& x, double tol = 0.0) const;
  /// Maps each row of `coords` (P x d) into [-1, 1]^d.
  Matrix normalize(const Matrix& coords) const;

  static DomainBox interval(double lo, double hi);
};

enum class BranchKind { mlp, residual };

struct DecoderSpec {
  int latent_dim = 4;
  int coord_dim = 1;
  int width_p = 64;
  BranchKind branch_kind = BranchKind::mlp;
  int branch_layers = 2;
  int branch_width = 128;
  int trunk_layers = 2;
  int trunk_width = 128;
};

/// DeepONet function decoder: D(z, x) = sum_k branch_k(z) trunk_k(x).
/// One instance models one output channel of one field.
class DeepOnet {
 public:
  DeepOnet() = default;
  DeepOnet(const DecoderSpec& spec, DomainBox box, std::mt19937_64& rng);
  DeepOnet(FeatureNet branch, Mlp trunk, DomainBox box);

  /// z: (B x latent_dim), coords: (P x coord_dim) -> (B x P).
  Var decode(const Var& z, const Matrix& coords) const;
  Matrix decode(const Matrix& z, const Matrix& coords) const;

  /// Decode from precomputed branch features, so one branch pass can serve
  /// several coordinate sets.
  Var decode_features(const Var& branch, const Matrix& coords) const;

  Var branch_features(const Var& z) const;             // B x p
  Var trunk_features(const Matrix& coords) const;      // P x p

  void collect(ParamList& out, const std::string& prefix) const;

  int latent_dim() const { return branch_.input_dim(); }
  int coord_dim() const { return trunk_.input_dim(); }
  int width() const { return branch_.output_dim(); }
  const DomainBox& box() const { return box_; }

 private:
  FeatureNet branch_;
  Mlp trunk_;
  DomainBox box_;
};

}  // namespace clfm::nets
