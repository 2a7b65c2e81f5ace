#pragma once

#include <cstdint>

#include "wvm/objective.hpp"

namespace wvm {

struct OptimizerConfig {
  int memory = 50;           // L-BFGS history length
  int max_iters = 500;
  double grad_tol = 1e-8;    // applied as grad_tol * (1 + |value|)
  double value_tol = 1e-12;  // applied as value_tol * (1 + |value|)
  int n_restarts = 2;
  double restart_scale = 0.5;
  std::uint64_t seed = 0;
  bool use_intercept = true;
};

struct MinimizeResult {
  LinearModel model;
  double value = 0.0;
  int iters = 0;
  bool converged = false;
};

// Minimizes the empirical Wasserstein variance over the free coordinates of
// the mask (and the intercept, unless disabled). Starts from the pooled OLS
// solution plus n_restarts Gaussian perturbations of it and keeps the best
// final value. Throws NumericError if the objective turns non-finite.
MinimizeResult minimize(const EnvironmentDataset& ds, const Weights& w,
                        const std::vector<bool>& mask, const OptimizerConfig& cfg);

// Same, with extra caller-provided start points tried after the defaults.
MinimizeResult minimize(const EnvironmentDataset& ds, const Weights& w,
                        const std::vector<bool>& mask, const OptimizerConfig& cfg,
                        const std::vector<LinearModel>& extra_starts);

}  // namespace wvm
