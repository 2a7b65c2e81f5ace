#include "wvm/icp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "wvm/parallel.hpp"

namespace wvm {

double ks_statistic(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index na = a.size(), nb = b.size();
  if (na == 0 || nb == 0) throw std::invalid_argument("empty sample");
  Eigen::Index i = 0, j = 0;
  double d = 0.0;
  while (i < na && j < nb) {
    const double va = a[i], vb = b[j];
    if (va <= vb) ++i;
    if (vb <= va) ++j;
    const double diff = std::abs(static_cast<double>(i) / static_cast<double>(na) -
                                 static_cast<double>(j) / static_cast<double>(nb));
    d = std::max(d, diff);
  }
  return d;
}

namespace {

// Asymptotic Kolmogorov survival function Q(x) = 2 sum (-1)^{k-1} e^{-2 k^2 x^2}.
double kolmogorov_q(double x) {
  if (x < 1e-8) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * static_cast<double>(k) * static_cast<double>(k) * x * x);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

double ks_two_sample(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double d = ks_statistic(a, b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  return kolmogorov_q(std::sqrt(na * nb / (na + nb)) * d);
}

namespace {

// Pooled OLS residuals of y on the masked columns (plus intercept), split
// back by environment and sorted.
std::vector<Eigen::VectorXd> subset_residuals(const EnvironmentDataset& ds,
                                              std::uint32_t mask) {
  std::vector<int> cols;
  for (int j = 0; j < ds.p; ++j) {
    if (mask & (1u << j)) cols.push_back(j);
  }
  const int dim = static_cast<int>(cols.size()) + 1;
  const Eigen::Index n = ds.total_samples();
  Eigen::MatrixXd a(n, dim);
  Eigen::VectorXd y(n);
  Eigen::Index row = 0;
  for (const auto& env : ds.environments) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      a.col(static_cast<Eigen::Index>(j)).segment(row, env.rows()) = env.x.col(cols[j]);
    }
    a.col(dim - 1).segment(row, env.rows()).setOnes();
    y.segment(row, env.rows()) = env.y;
    row += env.rows();
  }
  const Eigen::VectorXd beta = a.completeOrthogonalDecomposition().solve(y);
  const Eigen::VectorXd r = y - a * beta;
  std::vector<Eigen::VectorXd> out;
  out.reserve(ds.environments.size());
  row = 0;
  for (const auto& env : ds.environments) {
    Eigen::VectorXd re = r.segment(row, env.rows());
    std::sort(re.data(), re.data() + re.size());
    out.push_back(std::move(re));
    row += env.rows();
  }
  return out;
}

}  // namespace

IcpReport run_icp(const EnvironmentDataset& ds, double alpha, int max_p, int threads) {
  ds.validate();
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw std::invalid_argument("alpha must be in (0, 1)");
  if (ds.p > max_p) {
    throw UsageError("p = " + std::to_string(ds.p) + " exceeds max_p = " +
                     std::to_string(max_p) + "; 2^p subset tests refused");
  }
  if (ds.p > 30) throw UsageError("p too large for exhaustive subset search");

  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t n_subsets = 1ull << ds.p;
  const int n_env = ds.env_count();
  const double n_pairs = static_cast<double>(n_env) * (n_env - 1) / 2.0;

  IcpReport report;
  report.n_subsets_tested = n_subsets;
  report.subset_pvalues.assign(n_subsets, 0.0);
  std::vector<char> accepted(n_subsets, 0);

  parallel_for(n_subsets, threads, [&](std::size_t mask) {
    const auto res = subset_residuals(ds, static_cast<std::uint32_t>(mask));
    double min_p = 1.0;
    for (int e1 = 0; e1 < n_env; ++e1) {
      for (int e2 = e1 + 1; e2 < n_env; ++e2) {
        min_p = std::min(min_p, ks_two_sample(res[e1], res[e2]));
      }
    }
    const double p_subset = std::min(1.0, n_pairs * min_p);
    report.subset_pvalues[mask] = p_subset;
    accepted[mask] = p_subset > alpha ? 1 : 0;
  });

  std::uint32_t intersection_mask = static_cast<std::uint32_t>((1ull << ds.p) - 1);
  bool any_accepted = false;
  for (std::uint64_t mask = 0; mask < n_subsets; ++mask) {
    if (!accepted[mask]) continue;
    any_accepted = true;
    intersection_mask &= static_cast<std::uint32_t>(mask);
    report.accepted_subsets.push_back(static_cast<std::uint32_t>(mask));
  }
  report.none_accepted = !any_accepted;
  if (any_accepted) {
    for (int j = 0; j < ds.p; ++j) {
      if (intersection_mask & (1u << j)) report.intersection.push_back(j);
    }
  }

  report.predictor_pvalues.assign(static_cast<std::size_t>(ds.p), 0.0);
  for (std::uint64_t mask = 0; mask < n_subsets; ++mask) {
    for (int j = 0; j < ds.p; ++j) {
      if (!(mask & (1ull << j))) {
        report.predictor_pvalues[j] =
            std::max(report.predictor_pvalues[j], report.subset_pvalues[mask]);
      }
    }
  }

  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace wvm
