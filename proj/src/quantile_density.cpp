#include "wvm/quantile_density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wvm {

namespace {

constexpr double kMaxBandwidth = 0.49;

inline double epanechnikov(double u) {
  return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
}

}  // namespace

double QdEstimate::operator()(double t) const {
  const Eigen::Index n = sample.size();
  const double h = bandwidth;
  // Kernel centers sit at (i-1)/n for i = 2..n; only centers within h of t
  // contribute.
  const double lo = (t - h) * static_cast<double>(n) + 1.0;
  const double hi = (t + h) * static_cast<double>(n) + 1.0;
  Eigen::Index first = std::max<Eigen::Index>(2, static_cast<Eigen::Index>(std::ceil(lo)) - 1);
  Eigen::Index last = std::min<Eigen::Index>(n, static_cast<Eigen::Index>(std::floor(hi)) + 1);
  double acc = 0.0;
  for (Eigen::Index i = first; i <= last; ++i) {
    const double center = static_cast<double>(i - 1) / static_cast<double>(n);
    const double k = epanechnikov((t - center) / h);
    if (k > 0.0) acc += (sample[i - 1] - sample[i - 2]) * k;
  }
  return acc / h;
}

QdEstimate estimate_qd(const QuantileView& view, double bandwidth_scale, int grid_size) {
  const Eigen::Index n = view.size();
  if (n < 2) throw std::invalid_argument("quantile density needs at least 2 samples");
  if (!(bandwidth_scale > 0.0)) throw std::invalid_argument("bandwidth scale must be positive");
  if (grid_size < 2) throw std::invalid_argument("grid size must be >= 2");

  QdEstimate est;
  est.sample = view.sorted_values;
  est.bandwidth =
      std::min(bandwidth_scale * std::pow(static_cast<double>(n), -1.0 / 3.0), kMaxBandwidth);
  est.grid_values.resize(grid_size);
  for (int j = 0; j < grid_size; ++j) {
    est.grid_values[j] = est((j + 0.5) / static_cast<double>(grid_size));
  }
  return est;
}

double CombinedQd::operator()(double t) const {
  if (!parts.empty()) {
    double acc = 0.0;
    for (std::size_t e = 0; e < parts.size(); ++e) {
      acc += weights[static_cast<Eigen::Index>(e)] * parts[e](t);
    }
    return acc;
  }
  // Synthetic grid-only density: linear interpolation between midpoints,
  // flat extension past the first/last point.
  const Eigen::Index g = grid_values.size();
  const double pos = t * static_cast<double>(g) - 0.5;
  if (pos <= 0.0) return grid_values[0];
  if (pos >= static_cast<double>(g - 1)) return grid_values[g - 1];
  const Eigen::Index j = static_cast<Eigen::Index>(pos);
  const double frac = pos - static_cast<double>(j);
  return (1.0 - frac) * grid_values[j] + frac * grid_values[j + 1];
}

CombinedQd CombinedQd::from_grid(Eigen::VectorXd grid_values) {
  CombinedQd qd;
  qd.grid_values = std::move(grid_values);
  return qd;
}

CombinedQd combined_qd(std::vector<QdEstimate> estimates, const Weights& w) {
  if (estimates.empty() || static_cast<Eigen::Index>(estimates.size()) != w.w.size()) {
    throw std::invalid_argument("one estimate per environment required");
  }
  const Eigen::Index g = estimates.front().grid_values.size();
  CombinedQd qd;
  qd.weights = w.w;
  qd.grid_values = Eigen::VectorXd::Zero(g);
  for (std::size_t e = 0; e < estimates.size(); ++e) {
    if (estimates[e].grid_values.size() != g) {
      throw std::invalid_argument("estimates disagree on grid size");
    }
    qd.grid_values += w.w[static_cast<Eigen::Index>(e)] * estimates[e].grid_values;
  }
  qd.parts = std::move(estimates);
  return qd;
}

}  // namespace wvm
