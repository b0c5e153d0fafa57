#include "clfm/ad/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace clfm::ad {

double grad_check(const std::function<Var()>& f, std::vector<Var> params, double h) {
  for (auto& p : params) p.zero_grad();
  Var root = f();
  root.backward();
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (auto& p : params) analytic.push_back(p.grad());
  for (auto& p : params) p.zero_grad();

  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& value = params[i].mutable_value();
    for (Eigen::Index k = 0; k < value.size(); ++k) {
      const double saved = value(k);
      value(k) = saved + h;
      const double plus = f().item();
      value(k) = saved - h;
      const double minus = f().item();
      value(k) = saved;
      const double fd = (plus - minus) / (2.0 * h);
      const double err = std::abs(analytic[i](k) - fd) / (std::abs(fd) + 1e-12);
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace clfm::ad
