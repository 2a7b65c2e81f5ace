#pragma once

#include <random>
#include <vector>

#include "wvm/dataset.hpp"
#include "wvm/transport.hpp"

namespace test_util {

inline wvm::EnvironmentDataset make_dataset(const std::vector<Eigen::MatrixXd>& xs,
                                            const std::vector<Eigen::VectorXd>& ys) {
  wvm::EnvironmentDataset ds;
  ds.p = xs.empty() ? 0 : static_cast<int>(xs.front().cols());
  for (int j = 0; j < ds.p; ++j) ds.predictor_names.push_back("x" + std::to_string(j + 1));
  for (std::size_t e = 0; e < xs.size(); ++e) {
    wvm::EnvBlock block;
    block.env_id = static_cast<int>(e);
    block.source_label = static_cast<int>(e);
    block.x = xs[e];
    block.y = ys[e];
    ds.environments.push_back(std::move(block));
  }
  return ds;
}

inline wvm::EnvironmentDataset random_dataset(std::mt19937_64& rng, int n_env, int p,
                                              Eigen::Index n_lo, Eigen::Index n_hi) {
  std::uniform_int_distribution<Eigen::Index> size_dist(n_lo, n_hi);
  std::normal_distribution<double> normal;
  std::vector<Eigen::MatrixXd> xs;
  std::vector<Eigen::VectorXd> ys;
  for (int e = 0; e < n_env; ++e) {
    const Eigen::Index ne = size_dist(rng);
    Eigen::MatrixXd x(ne, p);
    Eigen::VectorXd y(ne);
    for (Eigen::Index i = 0; i < ne; ++i) {
      for (int j = 0; j < p; ++j) x(i, j) = normal(rng);
      y[i] = normal(rng);
    }
    xs.push_back(std::move(x));
    ys.push_back(std::move(y));
  }
  return make_dataset(xs, ys);
}

// Independent left-continuous quantile lookup for the brute-force oracles.
inline double oracle_quantile(const Eigen::VectorXd& sorted, double t) {
  const Eigen::Index n = sorted.size();
  Eigen::Index idx = static_cast<Eigen::Index>(std::ceil(t * static_cast<double>(n)));
  if (idx < 1) idx = 1;
  if (idx > n) idx = n;
  return sorted[idx - 1];
}

// Dense midpoint-grid integration of the explicit Wasserstein-variance
// integrand. The cell count must be a multiple of every sample size so the
// step discontinuities fall on cell boundaries.
inline double oracle_wasserstein_variance(const std::vector<wvm::QuantileView>& views,
                                          const Eigen::VectorXd& w, int cells) {
  const int n_env = static_cast<int>(views.size());
  double total = 0.0;
  for (int j = 0; j < cells; ++j) {
    const double t = (j + 0.5) / static_cast<double>(cells);
    double mean = 0.0;
    for (int e = 0; e < n_env; ++e) mean += w[e] * oracle_quantile(views[e].sorted_values, t);
    double acc = 0.0;
    for (int e = 0; e < n_env; ++e) {
      const double d = oracle_quantile(views[e].sorted_values, t) - mean;
      acc += w[e] * d * d;
    }
    total += acc;
  }
  return total / static_cast<double>(cells);
}

}  // namespace test_util
