#include "wvm/optimizer.hpp"

#include <cmath>
#include <deque>

#include "wvm/rng.hpp"

namespace wvm {

namespace {

constexpr double kArmijoC1 = 1e-4;
constexpr int kMaxHalvings = 40;

struct LbfgsOutcome {
  Eigen::VectorXd x;
  double f = 0.0;
  int iters = 0;
  bool converged = false;
};

double checked_value(const WvObjective& objective, const Eigen::VectorXd& x) {
  const double f = objective.value(x);
  if (!std::isfinite(f)) throw NumericError("non-finite objective during minimization");
  return f;
}

double checked_value_grad(const WvObjective& objective, const Eigen::VectorXd& x,
                          Eigen::VectorXd& g) {
  const double f = objective.value_and_gradient(x, g);
  if (!std::isfinite(f) || !g.allFinite()) {
    throw NumericError("non-finite objective during minimization");
  }
  return f;
}

// L-BFGS with backtracking Armijo line search; probes evaluate the value
// only, the gradient is computed once at the accepted point. On line-search
// failure the history is reset and one steepest-descent attempt is made
// before giving up. At kinks the reported vector is a supergradient, which
// the update guard (skip when s'y is too small) tolerates.
LbfgsOutcome lbfgs_minimize(const WvObjective& objective, Eigen::VectorXd x0,
                            const OptimizerConfig& cfg) {
  LbfgsOutcome out;
  out.x = std::move(x0);
  const Eigen::Index dim = out.x.size();

  Eigen::VectorXd g(dim), g_new(dim);
  double f = checked_value_grad(objective, out.x, g);

  struct Pair {
    Eigen::VectorXd s, y;
    double rho;
  };
  std::deque<Pair> history;
  Eigen::VectorXd d(dim), x_new(dim);
  std::vector<double> alpha_buf;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    out.iters = iter;
    if (g.norm() <= cfg.grad_tol * (1.0 + std::abs(f))) {
      out.converged = true;
      break;
    }

    // Two-loop recursion.
    d = -g;
    alpha_buf.assign(history.size(), 0.0);
    for (int i = static_cast<int>(history.size()) - 1; i >= 0; --i) {
      alpha_buf[static_cast<std::size_t>(i)] = history[static_cast<std::size_t>(i)].rho *
                                               history[static_cast<std::size_t>(i)].s.dot(d);
      d -= alpha_buf[static_cast<std::size_t>(i)] * history[static_cast<std::size_t>(i)].y;
    }
    if (!history.empty()) {
      const Pair& last = history.back();
      d *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t i = 0; i < history.size(); ++i) {
      const double beta = history[i].rho * history[i].y.dot(d);
      d += (alpha_buf[i] - beta) * history[i].s;
    }
    if (d.dot(g) >= 0.0) {
      history.clear();
      d = -g;
    }

    double f_accepted = f;
    auto line_search = [&]() -> bool {
      const double slope = g.dot(d);
      double step = 1.0;
      for (int h = 0; h <= kMaxHalvings; ++h) {
        x_new = out.x + step * d;
        f_accepted = checked_value(objective, x_new);
        if (f_accepted <= f + kArmijoC1 * step * slope) return true;
        step *= 0.5;
      }
      return false;
    };

    if (!line_search()) {
      if (history.empty()) break;  // already a steepest-descent step, give up
      history.clear();
      d = -g;
      if (!line_search()) break;
    }
    checked_value_grad(objective, x_new, g_new);

    Pair pair;
    pair.s = x_new - out.x;
    pair.y = g_new - g;
    const double sy = pair.s.dot(pair.y);
    if (sy > 1e-10 * pair.s.norm() * pair.y.norm()) {
      pair.rho = 1.0 / sy;
      history.push_back(std::move(pair));
      if (static_cast<int>(history.size()) > cfg.memory) history.pop_front();
    }

    const double decrease = f - f_accepted;
    out.x = x_new;
    f = f_accepted;
    g = g_new;
    if (decrease >= 0.0 && decrease <= cfg.value_tol * (1.0 + std::abs(f))) {
      out.converged = true;
      ++out.iters;
      break;
    }
  }
  out.f = f;
  return out;
}

// Pooled least squares over the free columns plus the intercept column;
// rank-deficient designs get the minimum-norm solution.
Eigen::VectorXd pooled_ols(const EnvironmentDataset& ds, const std::vector<int>& free,
                           bool use_intercept) {
  const Eigen::Index n = ds.total_samples();
  const int nf = static_cast<int>(free.size());
  const int cols = nf + (use_intercept ? 1 : 0);
  if (cols == 0) return Eigen::VectorXd(0);
  Eigen::MatrixXd a(n, cols);
  Eigen::VectorXd y(n);
  Eigen::Index row = 0;
  for (const auto& env : ds.environments) {
    for (int j = 0; j < nf; ++j) a.col(j).segment(row, env.rows()) = env.x.col(free[j]);
    if (use_intercept) a.col(nf).segment(row, env.rows()).setOnes();
    y.segment(row, env.rows()) = env.y;
    row += env.rows();
  }
  return a.completeOrthogonalDecomposition().solve(y);
}

}  // namespace

MinimizeResult minimize(const EnvironmentDataset& ds, const Weights& w,
                        const std::vector<bool>& mask, const OptimizerConfig& cfg) {
  return minimize(ds, w, mask, cfg, {});
}

MinimizeResult minimize(const EnvironmentDataset& ds, const Weights& w,
                        const std::vector<bool>& mask, const OptimizerConfig& cfg,
                        const std::vector<LinearModel>& extra_starts) {
  if (static_cast<int>(mask.size()) != ds.p) throw std::invalid_argument("mask length != p");
  const WvObjective objective(ds, w, mask, cfg.use_intercept);

  if (objective.dim() == 0) {
    // Nothing to optimize: the model is pinned at zero.
    const Eigen::VectorXd empty(0);
    return MinimizeResult{objective.model_at(empty), checked_value(objective, empty), 0, true};
  }

  std::vector<Eigen::VectorXd> starts;
  starts.push_back(pooled_ols(ds, objective.free(), cfg.use_intercept));
  for (int r = 1; r <= cfg.n_restarts; ++r) {
    auto rng = make_rng(cfg.seed, "restart", static_cast<std::uint64_t>(r));
    std::normal_distribution<double> normal(0.0, cfg.restart_scale);
    Eigen::VectorXd theta = starts.front();
    for (Eigen::Index j = 0; j < theta.size(); ++j) theta[j] += normal(rng);
    starts.push_back(std::move(theta));
  }
  for (const LinearModel& m : extra_starts) starts.push_back(objective.theta_at(m));

  LbfgsOutcome best;
  bool have_best = false;
  for (const auto& start : starts) {
    LbfgsOutcome run = lbfgs_minimize(objective, start, cfg);
    if (!have_best || run.f < best.f) {
      best = std::move(run);
      have_best = true;
    }
  }

  MinimizeResult out;
  out.model = objective.model_at(best.x);
  out.value = best.f;
  out.iters = best.iters;
  out.converged = best.converged;
  return out;
}

}  // namespace wvm
