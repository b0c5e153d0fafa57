#include "clfm/nets/deeponet.hpp"

#include <stdexcept>

namespace clfm::nets {

bool DomainBox::contains(const Eigen::Ref<const ad::RowVector>& x, double tol) const {
  if (x.size() != lo.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) < lo(i) - tol || x(i) > hi(i) + tol) return false;
  }
  return true;
}

Matrix DomainBox::normalize(const Matrix& coords) const {
  if (coords.cols() != lo.size()) {
    throw ad::ShapeError("normalize", "coordinates have " + std::to_string(coords.cols()) +
                                          " columns, domain has " + std::to_string(lo.size()));
  }
  const ad::RowVector center = (0.5 * (lo + hi)).transpose();
  const ad::RowVector half = (0.5 * (hi - lo)).transpose();
  return ((coords.rowwise() - center).array().rowwise() / half.array()).matrix();
}

DomainBox DomainBox::interval(double a, double b) {
  DomainBox box;
  box.lo = ad::Vector::Constant(1, a);
  box.hi = ad::Vector::Constant(1, b);
  return box;
}

namespace {

FeatureNet make_branch(const DecoderSpec& spec, std::mt19937_64& rng) {
  if (spec.branch_kind == BranchKind::residual) {
    return FeatureNet(ResidualMlp(
        ResidualMlpSpec{spec.latent_dim, spec.branch_width, spec.branch_layers, spec.width_p},
        rng));
  }
  MlpSpec ms{spec.latent_dim, std::vector<int>(spec.branch_layers, spec.branch_width),
             spec.width_p, Activation::gelu};
  return FeatureNet(Mlp(ms, rng));
}

}  // namespace

DeepOnet::DeepOnet(const DecoderSpec& spec, DomainBox box, std::mt19937_64& rng)
    : box_(std::move(box)) {
  if (box_.dim() != spec.coord_dim) {
    throw std::invalid_argument("DeepOnet: domain dimension does not match coord_dim");
  }
  branch_ = make_branch(spec, rng);
  trunk_ = Mlp(MlpSpec{spec.coord_dim, std::vector<int>(spec.trunk_layers, spec.trunk_width),
                       spec.width_p, Activation::gelu},
               rng);
}

DeepOnet::DeepOnet(FeatureNet branch, Mlp trunk, DomainBox box)
    : branch_(std::move(branch)), trunk_(std::move(trunk)), box_(std::move(box)) {
  if (branch_.output_dim() != trunk_.output_dim()) {
    throw ad::ShapeError("deeponet", "branch width " + std::to_string(branch_.output_dim()) +
                                         " != trunk width " + std::to_string(trunk_.output_dim()));
  }
}

Var DeepOnet::branch_features(const Var& z) const {
  if (z.cols() != latent_dim()) {
    throw ad::ShapeError("decode", "latent has " + std::to_string(z.cols()) +
                                       " columns, decoder expects " +
                                       std::to_string(latent_dim()));
  }
  return branch_.forward(z);
}

Var DeepOnet::trunk_features(const Matrix& coords) const {
  return trunk_.forward(Var::constant(box_.normalize(coords)));
}

Var DeepOnet::decode(const Var& z, const Matrix& coords) const {
  return decode_features(branch_features(z), coords);
}

Var DeepOnet::decode_features(const Var& branch, const Matrix& coords) const {
  return ad::matmul(branch, ad::transpose(trunk_features(coords)));
}

Matrix DeepOnet::decode(const Matrix& z, const Matrix& coords) const {
  return decode(Var::constant(z), coords).value();
}

void DeepOnet::collect(ParamList& out, const std::string& prefix) const {
  branch_.collect(out, prefix + ".branch");
  trunk_.collect(out, prefix + ".trunk");
}

}  // namespace clfm::nets
