#include "wvm/preselect.hpp"

#include <algorithm>
#include <cmath>

namespace wvm {

namespace {

constexpr double kLambdaShrink = 0.9;
constexpr int kMaxPathSteps = 200;
constexpr int kMaxSweeps = 1000;
constexpr double kCoordTol = 1e-9;

inline double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

}  // namespace

LassoPathResult lasso_preselect(const EnvironmentDataset& ds, int k,
                                std::vector<LassoPathStep>* trace) {
  if (k < 1 || k > ds.p) throw std::invalid_argument("k must be in [1, p]");

  const auto [std_ds, tf] = standardize(ds);
  const Eigen::Index n = std_ds.total_samples();
  Eigen::MatrixXd x(n, ds.p);
  Eigen::VectorXd y(n);
  Eigen::Index row = 0;
  for (const auto& env : std_ds.environments) {
    x.middleRows(row, env.rows()) = env.x;
    y.segment(row, env.rows()) = env.y;
    row += env.rows();
  }
  y.array() -= y.mean();

  const double dn = static_cast<double>(n);
  const Eigen::VectorXd marginal = (x.transpose() * y) / dn;
  const Eigen::VectorXd col_ms = x.colwise().squaredNorm() / dn;
  const double lambda_max = marginal.cwiseAbs().maxCoeff();

  LassoPathResult result;
  std::vector<bool> entered(static_cast<std::size_t>(ds.p), false);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(ds.p);
  Eigen::VectorXd residual = y;

  if (lambda_max > 0.0) {
    double lambda = lambda_max;
    for (int step = 1; step <= kMaxPathSteps; ++step) {
      lambda *= kLambdaShrink;
      for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double max_change = 0.0;
        for (int j = 0; j < ds.p; ++j) {
          if (col_ms[j] == 0.0) continue;  // constant column
          const double old = beta[j];
          const double rho = x.col(j).dot(residual) / dn + col_ms[j] * old;
          const double next = soft_threshold(rho, lambda) / col_ms[j];
          if (next != old) {
            residual += x.col(j) * (old - next);
            beta[j] = next;
            max_change = std::max(max_change, std::abs(next - old));
          }
        }
        if (max_change < kCoordTol * (1.0 + beta.cwiseAbs().maxCoeff())) break;
      }
      if (trace != nullptr) trace->push_back({lambda, beta});
      for (int j = 0; j < ds.p; ++j) {
        if (beta[j] != 0.0 && !entered[static_cast<std::size_t>(j)]) {
          entered[static_cast<std::size_t>(j)] = true;
          result.entered_order.push_back(j);
        }
      }
      if (static_cast<int>(result.entered_order.size()) >= k) break;
    }
  }

  result.selected.assign(result.entered_order.begin(),
                         result.entered_order.begin() +
                             std::min<std::size_t>(result.entered_order.size(),
                                                   static_cast<std::size_t>(k)));
  if (static_cast<int>(result.selected.size()) < k) {
    // Path exhausted early: pad by |marginal correlation|.
    std::vector<int> rest;
    for (int j = 0; j < ds.p; ++j) {
      if (!entered[static_cast<std::size_t>(j)]) rest.push_back(j);
    }
    std::stable_sort(rest.begin(), rest.end(), [&](int a, int b) {
      return std::abs(marginal[a]) > std::abs(marginal[b]);
    });
    for (int j : rest) {
      if (static_cast<int>(result.selected.size()) >= k) break;
      result.selected.push_back(j);
    }
  }
  return result;
}

}  // namespace wvm
