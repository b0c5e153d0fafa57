#include "clfm/constraints/poisson.hpp"

#include <stdexcept>

namespace clfm::constraints {

using Eigen::Index;

Eigen::VectorXd shift_inward(const Eigen::VectorXd& points, double lo, double hi, double h) {
  Eigen::VectorXd x = points;
  for (Index i = 0; i < x.size(); ++i) {
    if (x(i) < lo + h) x(i) = lo + h;
    if (x(i) > hi - h) x(i) = hi - h;
  }
  return x;
}

PoissonResidual poisson_physics_residual(const FieldFn& u, const FieldFn& v,
                                         const Eigen::VectorXd& points,
                                         const PoissonResidualOptions& options) {
  const double h = options.h;
  if (!(h > 0.0)) throw std::invalid_argument("poisson residual: step h must be positive");
  if (options.hi - options.lo <= 2.0 * h) {
    throw std::invalid_argument("poisson residual: domain shorter than the stencil");
  }
  if (points.size() == 0) throw std::invalid_argument("poisson residual: no collocation points");
  if (!options.forcing) throw std::invalid_argument("poisson residual: forcing not set");

  const Eigen::VectorXd x = shift_inward(points, options.lo, options.hi, h);
  const Index c = x.size();
  Matrix stencil(3 * c, 1);
  stencil.col(0) << (x.array() - h).matrix(), x, (x.array() + h).matrix();

  const Var uu = u(stencil);
  const Var vv = v(stencil);
  const Var um = ad::slice_cols(uu, 0, c), u0 = ad::slice_cols(uu, c, c),
            up = ad::slice_cols(uu, 2 * c, c);
  const Var vm = ad::slice_cols(vv, 0, c), v0 = ad::slice_cols(vv, c, c),
            vp = ad::slice_cols(vv, 2 * c, c);

  const Var du = ad::scale(ad::sub(up, um), 1.0 / (2.0 * h));
  const Var dv = ad::scale(ad::sub(vp, vm), 1.0 / (2.0 * h));
  const Var d2u = ad::scale(ad::add(ad::sub(up, ad::scale(u0, 2.0)), um), 1.0 / (h * h));

  Matrix f(1, c);
  for (Index i = 0; i < c; ++i) f(0, i) = options.forcing(x(i));
  const Var r = ad::add(ad::add(ad::mul(dv, du), ad::mul(v0, d2u)), Var::constant(f));

  PoissonResidual out;
  out.interior = ad::mean(ad::square(r));
  if (options.boundary) {
    Matrix ends(2, 1);
    ends << options.lo, options.hi;
    const Var ub = u(ends);
    out.boundary = ad::scale(ad::sum(ad::square(ub)), 1.0 / static_cast<double>(ub.rows()));
  } else {
    out.boundary = Var::scalar(0.0);
  }
  out.total = ad::add(out.interior, out.boundary);
  return out;
}

}  // namespace clfm::constraints
