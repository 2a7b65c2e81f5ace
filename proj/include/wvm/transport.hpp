#pragma once

#include <Eigen/Dense>
#include <vector>

#include "wvm/dataset.hpp"

namespace wvm {

// Per-environment sorted residuals exposing the left-continuous empirical
// quantile function F^{-1}(t) = v_(ceil(t * n)).
struct QuantileView {
  Eigen::VectorXd sorted_values;  // nondecreasing
  Eigen::Index size() const { return sorted_values.size(); }
};

QuantileView make_view(Eigen::VectorXd values);

// Empirical quantile at t in (0, 1]; throws std::domain_error outside.
double quantile_at(const QuantileView& view, double t);

// Merged step grid over the union of all environments' quantile levels
// {i/n_e}. Levels are merged and deduplicated in exact integer arithmetic;
// index(e, l) is the 0-based position of the order statistic environment e
// contributes at level l, i.e. ceil(level_l * n_e) - 1.
struct QuantileGrid {
  Eigen::VectorXd levels;  // strictly increasing, last element 1
  Eigen::VectorXd gaps;    // level_l - level_{l-1}, positive, sums to 1
  Eigen::Matrix<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic> index;  // E x L
  Eigen::Index size() const { return levels.size(); }
};

QuantileGrid make_quantile_grid(const std::vector<Eigen::Index>& env_sizes);

// Squared 2-Wasserstein distance between two empirical distributions,
// integrated exactly over the merged step grid. For equal sample sizes this
// is the mean of squared sorted-pair differences.
double w2_squared(const QuantileView& a, const QuantileView& b);

// Weighted average of the per-environment quantiles at each grid level:
// the quantile function of the Wasserstein barycenter.
Eigen::VectorXd barycenter_quantile(const std::vector<QuantileView>& views, const Weights& w,
                                    const QuantileGrid& grid);

// Empirical Wasserstein variance in closed form: the grid-weighted sum of
// weighted squared deviations of the per-environment quantiles from their
// weighted average. Zero exactly when all views agree on the grid.
double wasserstein_variance(const std::vector<QuantileView>& views, const Weights& w);
double wasserstein_variance(const std::vector<QuantileView>& views, const Weights& w,
                            const QuantileGrid& grid);

}  // namespace wvm
