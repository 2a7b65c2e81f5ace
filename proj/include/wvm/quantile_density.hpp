#pragma once

#include <vector>

#include "wvm/dataset.hpp"
#include "wvm/transport.hpp"

namespace wvm {

inline constexpr int kQdGridSize = 1024;

// Kernel estimate of the quantile density built from one environment's
// sorted residuals:
//   q(t) = sum_{i=2..n} (v_(i) - v_(i-1)) * K_h(t - (i-1)/n),
// with K the Epanechnikov kernel on [-1, 1] and h = min(scale * n^{-1/3}, 0.49).
struct QdEstimate {
  Eigen::VectorXd sample;       // sorted residuals
  double bandwidth = 0.0;
  Eigen::VectorXd grid_values;  // values at t_j = (j + 0.5) / G, j = 0..G-1

  // Exact kernel sum at any t in [0, 1].
  double operator()(double t) const;
};

QdEstimate estimate_qd(const QuantileView& view, double bandwidth_scale = 1.0,
                       int grid_size = kQdGridSize);

// Weighted average q = sum_e w_e q_e of the per-environment estimates.
struct CombinedQd {
  std::vector<QdEstimate> parts;
  Eigen::VectorXd weights;
  Eigen::VectorXd grid_values;

  double operator()(double t) const;

  // Synthetic density from explicit grid values (evaluation interpolates
  // linearly); used for constructed test inputs.
  static CombinedQd from_grid(Eigen::VectorXd grid_values);
};

CombinedQd combined_qd(std::vector<QdEstimate> estimates, const Weights& w);

}  // namespace wvm
