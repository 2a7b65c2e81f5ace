#pragma once

namespace wvm {

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);

// Quantile of Gamma(shape, scale) at probability prob, found by bisection on
// gamma_p to within 1e-10 in probability. hi_hint, when positive, seeds the
// upper bracket (it is grown automatically if too small).
double gamma_quantile(double shape, double scale, double prob, double hi_hint = -1.0);

}  // namespace wvm
