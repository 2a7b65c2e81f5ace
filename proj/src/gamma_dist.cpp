#include "wvm/gamma_dist.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace wvm {

namespace {

// Series expansion of P(a, x), converges fast for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double term = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a, x) = 1 - P(a, x), for x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0 || !std::isfinite(a) || !std::isfinite(x)) {
    throw std::invalid_argument("gamma_p requires a > 0, x >= 0");
  }
  if (x == 0.0) return 0.0;
  return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_cf(a, x);
}

double gamma_quantile(double shape, double scale, double prob, double hi_hint) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw std::invalid_argument("gamma_quantile requires shape, scale > 0");
  }
  if (!(prob >= 0.0) || !(prob < 1.0)) {
    throw std::invalid_argument("gamma_quantile requires prob in [0, 1)");
  }
  if (prob == 0.0) return 0.0;

  double hi = hi_hint > 0.0 ? hi_hint
                            : scale * (shape + 20.0 * std::sqrt(shape) + 20.0);
  for (int i = 0; i < 200 && gamma_p(shape, hi / scale) < prob; ++i) hi *= 2.0;

  double lo = 0.0;
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double pm = gamma_p(shape, mid / scale);
    if (std::abs(pm - prob) < 1e-10) return mid;
    (pm < prob ? lo : hi) = mid;
    if (hi - lo <= std::numeric_limits<double>::epsilon() * hi) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace wvm
