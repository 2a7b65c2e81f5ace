#pragma once

#include <vector>

#include "wvm/dataset.hpp"
#include "wvm/transport.hpp"

namespace wvm {

// Linear predictor f(x) = beta' x + intercept with an exclusion mask;
// masked coordinates stay frozen at zero.
struct LinearModel {
  Eigen::VectorXd beta;
  double intercept = 0.0;
  std::vector<bool> mask;  // true = coordinate excluded

  static LinearModel zeros(int p);
  static LinearModel zeros(int p, std::vector<bool> mask);
};

// Objective value with its (super)gradient over the free coordinates,
// intercept component last.
struct ObjectiveEval {
  double value = 0.0;
  Eigen::VectorXd gradient;  // size = #free coordinates + 1
};

std::vector<int> free_coordinates(const std::vector<bool>& mask);

// Sorted residuals y - f(x) per environment.
std::vector<QuantileView> residuals(const LinearModel& m, const EnvironmentDataset& ds);

// Evaluation engine for the empirical Wasserstein variance of the residual
// distributions over the free coordinates of a mask. The merged grid and the
// per-environment free-column blocks are built once; value() is cheap enough
// for line-search probes, value_and_gradient() resolves each quantile level
// to its underlying observation by a stable argsort (ties break by original
// index) and reports the supergradient.
class WvObjective {
 public:
  WvObjective(const EnvironmentDataset& ds, const Weights& w, std::vector<bool> mask,
              QuantileGrid grid, bool use_intercept = true);
  WvObjective(const EnvironmentDataset& ds, const Weights& w, std::vector<bool> mask,
              bool use_intercept = true);

  // theta = free coefficients in index order, then the intercept slot (when
  // the intercept is part of the class).
  int dim() const { return n_free_ + (use_intercept_ ? 1 : 0); }
  const std::vector<int>& free() const { return free_; }

  double value(const Eigen::VectorXd& theta) const;
  double value_and_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const;
  LinearModel model_at(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd theta_at(const LinearModel& m) const;

 private:
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  void env_residuals(const Eigen::VectorXd& theta, int env, Eigen::VectorXd& out) const;

  int p_ = 0;
  int n_free_ = 0;
  bool use_intercept_ = true;
  std::vector<bool> mask_;
  std::vector<int> free_;
  Eigen::VectorXd weights_;
  QuantileGrid grid_;
  std::vector<Eigen::VectorXd> y_;
  std::vector<RowMajor> x_free_;
};

// One-shot evaluation of a model (the gradient covers the model's free
// coordinates plus the intercept).
ObjectiveEval evaluate(const LinearModel& m, const EnvironmentDataset& ds, const Weights& w);
ObjectiveEval evaluate(const LinearModel& m, const EnvironmentDataset& ds, const Weights& w,
                       const QuantileGrid& grid);

}  // namespace wvm
