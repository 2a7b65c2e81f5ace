#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "wvm/errors.hpp"

namespace wvm {

// One environment's block of observations.
struct EnvBlock {
  Eigen::MatrixXd x;  // n_e x p
  Eigen::VectorXd y;  // n_e
  int env_id = 0;     // dense index 0..E-1 after loading
  long long source_label = 0;  // label as it appeared in the input file
  Eigen::Index rows() const { return y.size(); }
};

// Multi-environment observations. Immutable after construction by convention;
// safe to share across parallel workers.
struct EnvironmentDataset {
  std::vector<EnvBlock> environments;
  int p = 0;
  std::vector<std::string> predictor_names;  // x1..xp unless loaded otherwise

  int env_count() const { return static_cast<int>(environments.size()); }
  Eigen::Index total_samples() const;
  std::vector<Eigen::Index> env_sizes() const;

  // Throws DegenerateDataError when E < 2 or any environment has n_e < 2,
  // std::invalid_argument on internal shape mismatches.
  void validate() const;
};

struct Weights {
  Eigen::VectorXd w;  // positive, sums to 1
};

EnvironmentDataset load_csv(const std::string& path);
void write_csv(const EnvironmentDataset& ds, const std::string& path);

// w_e = n_e / n, renormalized so the sum is exactly 1.
Weights proportional_weights(const EnvironmentDataset& ds);
Weights uniform_weights(const EnvironmentDataset& ds);

struct StandardizeTransform {
  Eigen::VectorXd mean;        // pooled per-predictor mean
  Eigen::VectorXd scale;       // pooled sample sd; 1 where the column is constant
  std::vector<bool> constant;  // zero pooled variance flag
};

// Centers and scales every predictor column with pooled statistics.
// Constant columns are centered only and flagged.
std::pair<EnvironmentDataset, StandardizeTransform> standardize(const EnvironmentDataset& ds);

// New dataset containing the given predictor columns (0-based), in order.
EnvironmentDataset select_predictors(const EnvironmentDataset& ds, const std::vector<int>& cols);

}  // namespace wvm
