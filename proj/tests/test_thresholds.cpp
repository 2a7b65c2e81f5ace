#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "wvm/gamma_dist.hpp"
#include "wvm/thresholds.hpp"

using namespace wvm;

namespace {

CombinedQd constant_qd(double c, int grid = kQdGridSize) {
  return CombinedQd::from_grid(Eigen::VectorXd::Constant(grid, c));
}

CombinedQd gaussian_sample_qd(std::uint64_t seed, int n_env, Eigen::Index n_e) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<QdEstimate> parts;
  for (int e = 0; e < n_env; ++e) {
    Eigen::VectorXd v(n_e);
    for (Eigen::Index i = 0; i < n_e; ++i) v[i] = normal(rng);
    parts.push_back(estimate_qd(make_view(std::move(v)), 1.0));
  }
  Weights w;
  w.w = Eigen::VectorXd::Constant(n_env, 1.0 / n_env);
  return combined_qd(std::move(parts), w);
}

}  // namespace

TEST_CASE("regularized incomplete gamma against closed forms") {
  for (double x : {0.1, 1.0, 2.5, 5.0}) {
    CHECK(gamma_p(1.0, x) == doctest::Approx(1.0 - std::exp(-x)).epsilon(1e-12));
    CHECK(gamma_p(0.5, x) == doctest::Approx(std::erf(std::sqrt(x))).epsilon(1e-12));
  }
  CHECK(gamma_p(3.0, 0.0) == 0.0);
}

TEST_CASE("gamma quantile inverts gamma_p and handles the exponential case") {
  for (double alpha : {0.5, 0.1, 0.01}) {
    const double q = gamma_quantile(1.0, 2.0, 1.0 - alpha);
    CHECK(q == doctest::Approx(2.0 * std::log(1.0 / alpha)).epsilon(1e-7));
  }
  const double q = gamma_quantile(3.7, 0.4, 0.9);
  CHECK(gamma_p(3.7, q / 0.4) == doctest::Approx(0.9).epsilon(1e-9));
}

TEST_CASE("gamma_threshold moments match the constant-density closed forms") {
  const double c = 2.0;
  const int n_env = 3;
  const Eigen::Index n = 1000;
  const ThresholdEstimate est = gamma_threshold(constant_qd(c), n_env, n, 0.1);
  const double e1 = static_cast<double>(n_env - 1);
  CHECK(est.m_hat == doctest::Approx(e1 * c * c / (6.0 * n)).epsilon(1e-3));
  CHECK(est.sigma2_hat == doctest::Approx(e1 * std::pow(c, 4) / (45.0 * n * n)).epsilon(1e-3));
  CHECK(est.shape == doctest::Approx(est.m_hat * est.m_hat / est.sigma2_hat));
  CHECK(est.scale == doctest::Approx(est.sigma2_hat / est.m_hat));
  CHECK(est.t_alpha > est.m_hat);
}

TEST_CASE("shape-one threshold reduces to the exponential quantile") {
  ThresholdEstimate est;
  est.method = ThresholdMethod::gamma;
  est.m_hat = 2.0;
  est.sigma2_hat = 4.0;  // shape = 1, scale = 2
  est.shape = 1.0;
  est.scale = 2.0;
  for (double alpha : {0.5, 0.1}) {
    CHECK(threshold_at(est, alpha) == doctest::Approx(2.0 * std::log(1.0 / alpha)).epsilon(1e-7));
  }
}

TEST_CASE("degenerate density yields threshold zero with a flag") {
  const ThresholdEstimate est = gamma_threshold(constant_qd(0.0), 3, 100, 0.1);
  CHECK(est.degenerate);
  CHECK(est.t_alpha == 0.0);
  const ThresholdEstimate mc = mc_threshold(constant_qd(0.0), 2, 100, 0.1, 1000, 64, 1);
  CHECK(mc.degenerate);
  CHECK(mc.t_alpha == 0.0);
}

TEST_CASE("gamma scaling: lambda^2 on the mean, lambda^4 on the variance") {
  const CombinedQd base = gaussian_sample_qd(4, 2, 400);
  const double lambda = 1.7;
  CombinedQd scaled = CombinedQd::from_grid(base.grid_values * lambda);
  CombinedQd plain = CombinedQd::from_grid(base.grid_values);
  const ThresholdEstimate a = gamma_threshold(plain, 3, 500, 0.1);
  const ThresholdEstimate b = gamma_threshold(scaled, 3, 500, 0.1);
  CHECK(b.m_hat == doctest::Approx(lambda * lambda * a.m_hat).epsilon(1e-9));
  CHECK(b.sigma2_hat == doctest::Approx(std::pow(lambda, 4) * a.sigma2_hat).epsilon(1e-9));
  CHECK(b.t_alpha == doctest::Approx(lambda * lambda * a.t_alpha).epsilon(1e-5));
}

TEST_CASE("monte carlo mean matches the moment formula for a flat density") {
  const Eigen::Index n = 100;
  const ThresholdEstimate est = mc_threshold(constant_qd(1.0), 2, n, 0.1, 10000, 1024, 99);
  const double expected = 1.0 / (6.0 * static_cast<double>(n));
  // Var of a single-path statistic is 2/90 / n^2.
  const double se = std::sqrt(2.0 / 90.0) / static_cast<double>(n) / std::sqrt(10000.0);
  CHECK(std::abs(est.m_hat - expected) < 3.0 * se);
}

TEST_CASE("monte carlo and gamma quantiles agree within 15% for a smooth density") {
  const CombinedQd qd = gaussian_sample_qd(21, 2, 500);
  const Eigen::Index n = 1000;
  for (double alpha : {0.5, 0.1}) {
    const ThresholdEstimate g = gamma_threshold(qd, 2, n, alpha);
    const ThresholdEstimate mc = mc_threshold(qd, 2, n, alpha, 20000, 512, 7);
    CHECK(std::abs(mc.t_alpha - g.t_alpha) / g.t_alpha < 0.15);
  }
}

TEST_CASE("thresholds are monotone in alpha for every method") {
  const CombinedQd qd = gaussian_sample_qd(33, 3, 300);
  const ThresholdEstimate g = gamma_threshold(qd, 3, 900, 0.5);
  const ThresholdEstimate mc = mc_threshold(qd, 3, 900, 0.5, 4000, 256, 5);
  for (const ThresholdEstimate* est : {&g, &mc}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double alpha : {0.01, 0.05, 0.1, 0.3, 0.5, 0.7, 0.9}) {
      const double t = threshold_at(*est, alpha);
      CHECK(t <= prev + 1e-15);
      prev = t;
    }
  }
}

TEST_CASE("monte carlo quantile is stable when doubling the paths") {
  const CombinedQd qd = gaussian_sample_qd(55, 2, 400);
  const Eigen::Index n = 800;
  const int paths = 4000;
  const ThresholdEstimate a = mc_threshold(qd, 2, n, 0.1, paths, 256, 11);
  const ThresholdEstimate b = mc_threshold(qd, 2, n, 0.1, 2 * paths, 256, 12);
  // Spacing-based standard error of the empirical 0.9-quantile.
  auto quantile_se = [](const std::vector<double>& sorted, double level) {
    const std::size_t n_s = sorted.size();
    const std::size_t j = static_cast<std::size_t>(level * static_cast<double>(n_s));
    const std::size_t k = static_cast<std::size_t>(std::sqrt(static_cast<double>(n_s)));
    const double density = 2.0 * static_cast<double>(k) / static_cast<double>(n_s) /
                           (sorted[std::min(j + k, n_s - 1)] - sorted[j - k]);
    return std::sqrt(level * (1.0 - level) / static_cast<double>(n_s)) / density;
  };
  const double se =
      std::hypot(quantile_se(a.mc_sample, 0.9), quantile_se(b.mc_sample, 0.9));
  CHECK(std::abs(a.t_alpha - b.t_alpha) < 3.0 * se);
}

TEST_CASE("bootstrap on an exactly fittable dataset is degenerate") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(6, 1);
  for (Eigen::Index i = 0; i < 6; ++i) x(i, 0) = normal(rng);
  const Eigen::VectorXd y = 2.0 * x.col(0);
  const auto ds = test_util::make_dataset({x, x}, {y, y});
  const ThresholdEstimate est =
      bootstrap_threshold(ds, proportional_weights(ds), OptimizerConfig{}, 0.1, 10, 5);
  CHECK(est.degenerate);
  CHECK(est.t_alpha == 0.0);
}

TEST_CASE("bootstrap is deterministic given the seed and positive on noisy data") {
  std::mt19937_64 rng(8);
  const auto ds = test_util::random_dataset(rng, 2, 2, 40, 40);
  const Weights w = proportional_weights(ds);
  const ThresholdEstimate a = bootstrap_threshold(ds, w, OptimizerConfig{}, 0.1, 12, 77);
  const ThresholdEstimate b = bootstrap_threshold(ds, w, OptimizerConfig{}, 0.1, 12, 77);
  CHECK(a.t_alpha == b.t_alpha);
  CHECK(a.m_hat == b.m_hat);
  CHECK(a.t_alpha > 0.0);
  // Parallel replicates derive per-index seeds: same result on two workers.
  const ThresholdEstimate c = bootstrap_threshold(ds, w, OptimizerConfig{}, 0.1, 12, 77, 2);
  CHECK(c.t_alpha == a.t_alpha);
}
