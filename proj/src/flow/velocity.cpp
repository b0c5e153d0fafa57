#include "clfm/flow/velocity.hpp"

#include <stdexcept>
#include <string>

namespace clfm::flow {

VelocityNet::VelocityNet(const VelocitySpec& spec, std::mt19937_64& rng)
    : spec_(spec),
      net_(nets::MlpSpec{spec.latent_dim + 1, std::vector<int>(spec.layers, spec.width),
                         spec.latent_dim, nets::Activation::gelu},
           rng) {}

Var VelocityNet::forward(const Var& z, const Matrix& t) const {
  if (z.cols() != spec_.latent_dim || t.rows() != z.rows() || t.cols() != 1) {
    throw ad::ShapeError("velocity", "expected z (B x " + std::to_string(spec_.latent_dim) +
                                         ") and t (B x 1)");
  }
  return net_.forward(ad::concat_cols({z, Var::constant(t)}));
}

Matrix VelocityNet::evaluate(const Matrix& z, double t) const {
  return forward(Var::constant(z), Matrix::Constant(z.rows(), 1, t)).value();
}

void VelocityNet::collect(nets::ParamList& out, const std::string& prefix) const {
  net_.collect(out, prefix);
}

Matrix interpolate(const Matrix& z0, const Matrix& z1, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::domain_error("interpolate: t = " + std::to_string(t) + " outside [0, 1]");
  }
  if (z0.rows() != z1.rows() || z0.cols() != z1.cols()) {
    throw ad::ShapeError("interpolate", "endpoint shapes differ");
  }
  if (t == 0.0) return z0;
  if (t == 1.0) return z1;
  return (1.0 - t) * z0 + t * z1;
}

Matrix interpolate(const Matrix& z0, const Matrix& z1, const Eigen::VectorXd& t) {
  if (z0.rows() != z1.rows() || z0.cols() != z1.cols() || t.size() != z0.rows()) {
    throw ad::ShapeError("interpolate", "endpoint or time shapes differ");
  }
  Matrix out(z0.rows(), z0.cols());
  for (Eigen::Index i = 0; i < z0.rows(); ++i) {
    if (!(t(i) >= 0.0 && t(i) <= 1.0)) {
      throw std::domain_error("interpolate: t = " + std::to_string(t(i)) + " outside [0, 1]");
    }
    out.row(i) = (1.0 - t(i)) * z0.row(i) + t(i) * z1.row(i);
  }
  return out;
}

Var flow_matching_loss(const VelocityNet& net, const Matrix& z0, const Matrix& z1,
                       const Eigen::VectorXd& t, const Matrix& noise) {
  Matrix zt = interpolate(z0, z1, t);
  if (noise.size() != 0) {
    if (noise.rows() != zt.rows() || noise.cols() != zt.cols()) {
      throw ad::ShapeError("flow_matching_loss", "noise shape differs from the latent batch");
    }
    zt += noise;
  }
  const Var v = net.forward(Var::constant(zt), t);
  const Var diff = ad::sub(Var::constant(z1 - z0), v);
  return ad::scale(ad::sum(ad::square(diff)), 1.0 / static_cast<double>(z0.rows()));
}

}  // namespace clfm::flow
