#pragma once

#include <cstdint>
#include <vector>

#include "wvm/dataset.hpp"

namespace wvm {

// Two-sample Kolmogorov-Smirnov statistic sup|F_a - F_b| over sorted samples.
double ks_statistic(const Eigen::VectorXd& a_sorted, const Eigen::VectorXd& b_sorted);

// Asymptotic two-sample KS p-value with the sqrt(n_a n_b / (n_a + n_b))
// effective-size scaling.
double ks_two_sample(const Eigen::VectorXd& a_sorted, const Eigen::VectorXd& b_sorted);

struct IcpReport {
  std::vector<std::uint32_t> accepted_subsets;  // predictor bitmasks
  std::vector<int> intersection;                // 0-based predictors
  bool none_accepted = false;
  std::vector<double> subset_pvalues;     // indexed by bitmask, size 2^p
  std::vector<double> predictor_pvalues;  // p_k = max over subsets excluding k
  double elapsed_seconds = 0.0;
  std::uint64_t n_subsets_tested = 0;
};

// Exhaustive invariant causal prediction: for every subset S (including the
// empty set) regress y on x_S pooled, KS-test the residual distributions
// between every environment pair, Bonferroni-combine across pairs, and
// intersect the accepted subsets. Throws UsageError when p > max_p.
IcpReport run_icp(const EnvironmentDataset& ds, double alpha, int max_p = 20, int threads = 1);

}  // namespace wvm
