#include "wvm/thresholds.hpp"

#include <algorithm>
#include <cmath>

#include "wvm/gamma_dist.hpp"
#include "wvm/parallel.hpp"
#include "wvm/rng.hpp"

namespace wvm {

namespace {

// Statistics at or below this are optimizer dust from exactly fittable
// data, not a real reference law.
constexpr double kDegenerateFloor = 1e-20;

void fit_gamma(ThresholdEstimate& est) {
  if (est.m_hat <= kDegenerateFloor) {
    est.degenerate = true;
    est.m_hat = std::max(est.m_hat, 0.0);
    est.t_alpha = 0.0;
    return;
  }
  if (est.sigma2_hat <= est.m_hat * est.m_hat * 1e-24) {
    est.point_mass = true;
    est.t_alpha = est.m_hat;
    return;
  }
  est.shape = est.m_hat * est.m_hat / est.sigma2_hat;
  est.scale = est.sigma2_hat / est.m_hat;
  est.t_alpha = threshold_at(est, est.alpha);
}

}  // namespace

const char* threshold_method_name(ThresholdMethod m) {
  switch (m) {
    case ThresholdMethod::gamma: return "gamma";
    case ThresholdMethod::monte_carlo: return "mc";
    case ThresholdMethod::bootstrap: return "bootstrap";
  }
  return "?";
}

double threshold_at(const ThresholdEstimate& est, double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw std::invalid_argument("alpha must be in (0, 1)");
  if (est.degenerate) return 0.0;
  if (!est.mc_sample.empty()) {
    const auto n = static_cast<Eigen::Index>(est.mc_sample.size());
    Eigen::Index idx = static_cast<Eigen::Index>(
        std::ceil((1.0 - alpha) * static_cast<double>(n)));
    idx = std::clamp<Eigen::Index>(idx, 1, n);
    return est.mc_sample[static_cast<std::size_t>(idx - 1)];
  }
  if (est.point_mass) return est.m_hat;
  const double hi = est.m_hat + 20.0 * std::sqrt(est.sigma2_hat);
  return gamma_quantile(est.shape, est.scale, 1.0 - alpha, hi);
}

double BridgeCovariance::operator()(double s, double t) const {
  return (std::min(s, t) - s * t) * (*qd)(s) * (*qd)(t);
}

double BridgeCovariance::diag(double t) const {
  const double q = (*qd)(t);
  return t * (1.0 - t) * q * q;
}

ThresholdEstimate gamma_threshold(const CombinedQd& qd, int env_count, Eigen::Index n,
                                  double alpha) {
  if (env_count < 2) throw std::invalid_argument("need at least 2 environments");
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw std::invalid_argument("alpha must be in (0, 1)");
  const Eigen::Index g = qd.grid_values.size();
  if (g < 2) throw std::invalid_argument("quantile density grid too small");

  // Trapezoid weights over the grid t_j = (j + 0.5) / G.
  const double dt = 1.0 / static_cast<double>(g);
  Eigen::VectorXd t(g), q2(g), cw(g);
  for (Eigen::Index j = 0; j < g; ++j) {
    t[j] = (static_cast<double>(j) + 0.5) * dt;
    q2[j] = qd.grid_values[j] * qd.grid_values[j];
    cw[j] = (j == 0 || j == g - 1) ? 0.5 * dt : dt;
  }

  const double eprime = static_cast<double>(env_count - 1);
  const double dn = static_cast<double>(n);

  double diag_int = 0.0;
  for (Eigen::Index j = 0; j < g; ++j) diag_int += cw[j] * t[j] * (1.0 - t[j]) * q2[j];

  double sq_int = 0.0;
  for (Eigen::Index i = 0; i < g; ++i) {
    const double wi = cw[i] * q2[i];
    if (wi == 0.0) continue;
    double row = 0.0;
    for (Eigen::Index j = 0; j < g; ++j) {
      const double eta = std::min(t[i], t[j]) - t[i] * t[j];
      row += cw[j] * q2[j] * eta * eta;
    }
    sq_int += wi * row;
  }

  ThresholdEstimate est;
  est.method = ThresholdMethod::gamma;
  est.alpha = alpha;
  est.m_hat = eprime / dn * diag_int;
  est.sigma2_hat = 2.0 * eprime / (dn * dn) * sq_int;
  fit_gamma(est);
  return est;
}

ThresholdEstimate mc_threshold(const CombinedQd& qd, int env_count, Eigen::Index n, double alpha,
                               int n_paths, int grid_points, std::uint64_t seed, int threads) {
  if (env_count < 2) throw std::invalid_argument("need at least 2 environments");
  if (n_paths < 1000) throw std::invalid_argument("mc_threshold needs n_paths >= 1000");
  if (grid_points < 2) throw std::invalid_argument("grid_points must be >= 2");
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw std::invalid_argument("alpha must be in (0, 1)");

  const int g = grid_points;
  const double dt = 1.0 / static_cast<double>(g);
  // q^2 at the interior grid nodes j/G; the bridge is pinned to 0 at both ends
  // so endpoint terms vanish.
  Eigen::VectorXd q2(g - 1);
  for (int j = 1; j < g; ++j) {
    const double q = qd(static_cast<double>(j) * dt);
    q2[j - 1] = q * q;
  }

  std::vector<double> sample(static_cast<std::size_t>(n_paths));
  const double sqrt_dt = std::sqrt(dt);
  parallel_for(static_cast<std::size_t>(n_paths), threads, [&](std::size_t path) {
    auto rng = make_rng(seed, "mc-path", path);
    std::normal_distribution<double> normal;
    double stat = 0.0;
    for (int e = 0; e < env_count - 1; ++e) {
      // W(t) on the grid, then B(t) = W(t) - t W(1).
      double w = 0.0;
      Eigen::VectorXd walk(g - 1);
      for (int j = 1; j < g; ++j) {
        w += sqrt_dt * normal(rng);
        walk[j - 1] = w;
      }
      w += sqrt_dt * normal(rng);  // W(1)
      double integral = 0.0;
      for (int j = 1; j < g; ++j) {
        const double b = walk[j - 1] - static_cast<double>(j) * dt * w;
        integral += b * b * q2[j - 1];
      }
      stat += integral * dt;  // trapezoid with zero end points
    }
    sample[path] = stat / static_cast<double>(n);
  });

  ThresholdEstimate est;
  est.method = ThresholdMethod::monte_carlo;
  est.alpha = alpha;
  double mean = 0.0;
  for (double v : sample) mean += v;
  mean /= static_cast<double>(n_paths);
  double var = 0.0;
  for (double v : sample) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n_paths - 1);
  est.m_hat = mean;
  est.sigma2_hat = var;
  if (mean > kDegenerateFloor && var > 0.0) {
    est.shape = mean * mean / var;
    est.scale = var / mean;
  } else {
    est.degenerate = mean <= kDegenerateFloor;
  }
  std::sort(sample.begin(), sample.end());
  est.mc_sample = std::move(sample);
  est.t_alpha = est.degenerate ? 0.0 : threshold_at(est, alpha);
  return est;
}

ThresholdEstimate bootstrap_threshold(const EnvironmentDataset& ds, const Weights& w,
                                      const OptimizerConfig& cfg, double alpha, int B,
                                      std::uint64_t seed, int threads) {
  if (B < 2) throw std::invalid_argument("bootstrap needs B >= 2");
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw std::invalid_argument("alpha must be in (0, 1)");
  ds.validate();

  const std::vector<bool> full_mask(ds.p, false);
  std::vector<double> values(static_cast<std::size_t>(B), 0.0);
  parallel_for(static_cast<std::size_t>(B), threads, [&](std::size_t b) {
    auto rng = make_rng(seed, "bootstrap", b);
    EnvironmentDataset resampled;
    resampled.p = ds.p;
    resampled.predictor_names = ds.predictor_names;
    for (const auto& env : ds.environments) {
      std::uniform_int_distribution<Eigen::Index> pick(0, env.rows() - 1);
      EnvBlock block;
      block.env_id = env.env_id;
      block.source_label = env.source_label;
      block.x.resize(env.rows(), ds.p);
      block.y.resize(env.rows());
      for (Eigen::Index i = 0; i < env.rows(); ++i) {
        const Eigen::Index r = pick(rng);
        block.x.row(i) = env.x.row(r);
        block.y[i] = env.y[r];
      }
      resampled.environments.push_back(std::move(block));
    }
    OptimizerConfig rep_cfg = cfg;
    rep_cfg.seed = derive_seed(seed, "bootstrap-opt", b);
    values[b] = minimize(resampled, w, full_mask, rep_cfg).value;
  });

  ThresholdEstimate est;
  est.method = ThresholdMethod::bootstrap;
  est.alpha = alpha;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(B);
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(B - 1);
  est.m_hat = mean;
  est.sigma2_hat = var;
  fit_gamma(est);
  return est;
}

}  // namespace wvm
