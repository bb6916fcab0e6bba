#pragma once

#include <functional>

#include "mhparse/tensor.hpp"

namespace mhparse {

// A scalar function of a flat parameter vector together with its analytic
// gradient, the two things grad_check compares.
struct ScalarFunction {
  std::function<double(const Tensor&)> value;
  std::function<Tensor(const Tensor&)> gradient;
};

// Max over parameters of |analytic - central difference| / max(1, |central
// difference|). eps must lie in [1e-6, 1e-3]. Throws evaluation_error when
// the function produces a non-finite value at a probe point.
double grad_check(const ScalarFunction& f, const Tensor& params, double eps);

}  // namespace mhparse
