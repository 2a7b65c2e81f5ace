#pragma once

#include <vector>

#include "wvm/dataset.hpp"

namespace wvm {

struct LassoPathResult {
  std::vector<int> entered_order;  // 0-based predictors by first activation on the path
  std::vector<int> selected;       // first k, padded by |marginal correlation| if needed
};

// Converged state at one lambda on the path, for diagnostics.
struct LassoPathStep {
  double lambda = 0.0;
  Eigen::VectorXd beta;
};

// Pooled Lasso screening: cyclic coordinate descent with soft-thresholding on
// standardized data over a geometric lambda path from lambda_max downward,
// stopping once k distinct predictors have entered. When trace is given,
// every converged path step is appended to it.
LassoPathResult lasso_preselect(const EnvironmentDataset& ds, int k,
                                std::vector<LassoPathStep>* trace = nullptr);

}  // namespace wvm
