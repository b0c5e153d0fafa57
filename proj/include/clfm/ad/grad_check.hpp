#pragma once

#include <functional>
#include <vector>

#include "clfm/ad/graph.hpp"

namespace clfm::ad {

/// Compares reverse-mode gradients of a scalar function against central
/// differences with step `h`, perturbing every entry of every parameter.
///
/// Returns max |analytic - fd| / (|fd| + 1e-12) over all entries. The function
/// must be a deterministic function of the parameter values. Parameter grads
/// are reset before and after the check.
double grad_check(const std::function<Var()>& f, std::vector<Var> params, double h = 1e-5);

}  // namespace clfm::ad
