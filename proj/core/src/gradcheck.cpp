#include "mhparse/gradcheck.hpp"

#include <cmath>

namespace mhparse {

double grad_check(const ScalarFunction& f, const Tensor& params, double eps) {
  if (eps < 1e-6 || eps > 1e-3) throw argument_error("grad_check: eps outside [1e-6, 1e-3]");
  const Tensor analytic = f.gradient(params);
  if (!analytic.same_shape(params)) throw argument_error("grad_check: gradient shape mismatch");

  Tensor probe = params;
  double worst = 0.0;
  for (int i = 0; i < params.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + eps;
    const double fp = f.value(probe);
    probe[i] = orig - eps;
    const double fm = f.value(probe);
    probe[i] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw evaluation_error("grad_check: non-finite function value at parameter " + std::to_string(i));
    const double numeric = (fp - fm) / (2.0 * eps);
    const double err = std::fabs(analytic[i] - numeric) / std::max(1.0, std::fabs(numeric));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace mhparse
