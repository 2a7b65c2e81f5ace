#include "wvm/objective.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace wvm {

LinearModel LinearModel::zeros(int p) { return zeros(p, std::vector<bool>(p, false)); }

LinearModel LinearModel::zeros(int p, std::vector<bool> mask) {
  LinearModel m;
  m.beta = Eigen::VectorXd::Zero(p);
  m.mask = std::move(mask);
  if (static_cast<int>(m.mask.size()) != p) throw std::invalid_argument("mask length != p");
  return m;
}

std::vector<int> free_coordinates(const std::vector<bool>& mask) {
  std::vector<int> free;
  for (int j = 0; j < static_cast<int>(mask.size()); ++j) {
    if (!mask[j]) free.push_back(j);
  }
  return free;
}

namespace {

void check_model(const LinearModel& m, const EnvironmentDataset& ds) {
  if (m.beta.size() != ds.p || static_cast<int>(m.mask.size()) != ds.p) {
    throw std::invalid_argument("model dimension does not match dataset");
  }
  for (int j = 0; j < ds.p; ++j) {
    if (m.mask[j] && m.beta[j] != 0.0) {
      throw std::invalid_argument("masked coordinate has a nonzero coefficient");
    }
  }
}

}  // namespace

std::vector<QuantileView> residuals(const LinearModel& m, const EnvironmentDataset& ds) {
  check_model(m, ds);
  std::vector<QuantileView> views;
  views.reserve(ds.environments.size());
  for (const auto& env : ds.environments) {
    views.push_back(make_view(env.y - env.x * m.beta -
                              Eigen::VectorXd::Constant(env.rows(), m.intercept)));
  }
  return views;
}

WvObjective::WvObjective(const EnvironmentDataset& ds, const Weights& w, std::vector<bool> mask,
                         bool use_intercept)
    : WvObjective(ds, w, std::move(mask), QuantileGrid{}, use_intercept) {}

WvObjective::WvObjective(const EnvironmentDataset& ds, const Weights& w, std::vector<bool> mask,
                         QuantileGrid grid, bool use_intercept)
    : p_(ds.p),
      use_intercept_(use_intercept),
      mask_(std::move(mask)),
      weights_(w.w),
      grid_(std::move(grid)) {
  if (static_cast<int>(mask_.size()) != p_) throw std::invalid_argument("mask length != p");
  if (w.w.size() != ds.env_count()) throw std::invalid_argument("weights/environment mismatch");
  free_ = free_coordinates(mask_);
  n_free_ = static_cast<int>(free_.size());
  if (grid_.size() == 0) grid_ = make_quantile_grid(ds.env_sizes());
  for (const auto& env : ds.environments) {
    y_.push_back(env.y);
    RowMajor xf(env.rows(), n_free_);
    for (int j = 0; j < n_free_; ++j) xf.col(j) = env.x.col(free_[j]);
    x_free_.push_back(std::move(xf));
  }
}

void WvObjective::env_residuals(const Eigen::VectorXd& theta, int env,
                                Eigen::VectorXd& out) const {
  out = y_[static_cast<std::size_t>(env)];
  if (n_free_ > 0) out.noalias() -= x_free_[static_cast<std::size_t>(env)] * theta.head(n_free_);
  if (use_intercept_) out.array() -= theta[n_free_];
}

double WvObjective::value(const Eigen::VectorXd& theta) const {
  const int n_env = static_cast<int>(y_.size());
  std::vector<Eigen::VectorXd> sorted(static_cast<std::size_t>(n_env));
  for (int e = 0; e < n_env; ++e) {
    env_residuals(theta, e, sorted[static_cast<std::size_t>(e)]);
    Eigen::VectorXd& r = sorted[static_cast<std::size_t>(e)];
    std::sort(r.data(), r.data() + r.size());
  }
  double total = 0.0;
  for (Eigen::Index l = 0; l < grid_.size(); ++l) {
    double mean = 0.0;
    for (int e = 0; e < n_env; ++e) {
      mean += weights_[e] * sorted[static_cast<std::size_t>(e)][grid_.index(e, l)];
    }
    double acc = 0.0;
    for (int e = 0; e < n_env; ++e) {
      const double d = sorted[static_cast<std::size_t>(e)][grid_.index(e, l)] - mean;
      acc += weights_[e] * d * d;
    }
    total += grid_.gaps[l] * acc;
  }
  return total;
}

double WvObjective::value_and_gradient(const Eigen::VectorXd& theta,
                                       Eigen::VectorXd& grad) const {
  const int n_env = static_cast<int>(y_.size());
  std::vector<std::vector<std::pair<double, Eigen::Index>>> sorted(
      static_cast<std::size_t>(n_env));
  Eigen::VectorXd r;
  for (int e = 0; e < n_env; ++e) {
    env_residuals(theta, e, r);
    auto& s = sorted[static_cast<std::size_t>(e)];
    s.resize(static_cast<std::size_t>(r.size()));
    for (Eigen::Index i = 0; i < r.size(); ++i) s[static_cast<std::size_t>(i)] = {r[i], i};
    std::sort(s.begin(), s.end());  // ties break by original index
  }

  grad = Eigen::VectorXd::Zero(dim());
  double total = 0.0;
  std::vector<double> q(static_cast<std::size_t>(n_env));
  for (Eigen::Index l = 0; l < grid_.size(); ++l) {
    double mean = 0.0;
    for (int e = 0; e < n_env; ++e) {
      q[static_cast<std::size_t>(e)] =
          sorted[static_cast<std::size_t>(e)][static_cast<std::size_t>(grid_.index(e, l))].first;
      mean += weights_[e] * q[static_cast<std::size_t>(e)];
    }
    double acc = 0.0;
    for (int e = 0; e < n_env; ++e) {
      const double d = q[static_cast<std::size_t>(e)] - mean;
      acc += weights_[e] * d * d;
    }
    total += grid_.gaps[l] * acc;
    for (int e = 0; e < n_env; ++e) {
      const double coef = 2.0 * grid_.gaps[l] * weights_[e] * (mean - q[static_cast<std::size_t>(e)]);
      if (coef == 0.0) continue;
      const Eigen::Index row =
          sorted[static_cast<std::size_t>(e)][static_cast<std::size_t>(grid_.index(e, l))].second;
      if (n_free_ > 0) {
        grad.head(n_free_) += coef * x_free_[static_cast<std::size_t>(e)].row(row).transpose();
      }
      if (use_intercept_) grad[n_free_] += coef;
    }
  }
  return total;
}

LinearModel WvObjective::model_at(const Eigen::VectorXd& theta) const {
  LinearModel m = LinearModel::zeros(p_, mask_);
  for (int j = 0; j < n_free_; ++j) m.beta[free_[j]] = theta[j];
  m.intercept = use_intercept_ ? theta[n_free_] : 0.0;
  return m;
}

Eigen::VectorXd WvObjective::theta_at(const LinearModel& m) const {
  Eigen::VectorXd theta(dim());
  for (int j = 0; j < n_free_; ++j) theta[j] = m.beta[free_[j]];
  if (use_intercept_) theta[n_free_] = m.intercept;
  return theta;
}

ObjectiveEval evaluate(const LinearModel& m, const EnvironmentDataset& ds, const Weights& w) {
  check_model(m, ds);
  const WvObjective objective(ds, w, m.mask);
  ObjectiveEval out;
  out.value = objective.value_and_gradient(objective.theta_at(m), out.gradient);
  return out;
}

ObjectiveEval evaluate(const LinearModel& m, const EnvironmentDataset& ds, const Weights& w,
                       const QuantileGrid& grid) {
  check_model(m, ds);
  const WvObjective objective(ds, w, m.mask, grid);
  ObjectiveEval out;
  out.value = objective.value_and_gradient(objective.theta_at(m), out.gradient);
  return out;
}

}  // namespace wvm
