#pragma once

#include <cstdint>
#include <vector>

#include "wvm/optimizer.hpp"
#include "wvm/quantile_density.hpp"

namespace wvm {

enum class ThresholdMethod { gamma, monte_carlo, bootstrap };

const char* threshold_method_name(ThresholdMethod m);

struct ThresholdEstimate {
  ThresholdMethod method = ThresholdMethod::gamma;
  double m_hat = 0.0;       // mean of the reference law
  double sigma2_hat = 0.0;  // variance of the reference law
  double shape = 0.0;       // m^2 / sigma^2
  double scale = 0.0;       // sigma^2 / m
  double t_alpha = 0.0;     // (1 - alpha)-quantile
  double alpha = 0.0;
  bool degenerate = false;   // all-tied residuals / all-zero statistics
  bool point_mass = false;   // nonzero mean with zero spread
  std::vector<double> mc_sample;  // sorted simulated statistics (monte_carlo only)
};

// (1 - alpha)-quantile of the same fitted law at a different level.
double threshold_at(const ThresholdEstimate& est, double alpha);

// Brownian-bridge covariance kernel weighted by the quantile density:
// eta(s, t) = (min(s,t) - s t) * q(s) * q(t).
struct BridgeCovariance {
  const CombinedQd* qd;
  double operator()(double s, double t) const;
  double diag(double t) const;
};

// Gamma moment-matching of the asymptotic law: m = (E-1)/n * int eta(t,t) dt
// and sigma^2 = 2(E-1)/n^2 * int int eta^2, both by trapezoid quadrature on
// the estimate's grid.
ThresholdEstimate gamma_threshold(const CombinedQd& qd, int env_count, Eigen::Index n,
                                  double alpha);

// Direct simulation of (1/n) sum_e int B_e^2 q^2 over E-1 independent
// Brownian bridges; the threshold is the empirical (1 - alpha)-quantile.
ThresholdEstimate mc_threshold(const CombinedQd& qd, int env_count, Eigen::Index n, double alpha,
                               int n_paths, int grid_points, std::uint64_t seed, int threads = 1);

// Resamples rows with replacement within each environment, minimizes the
// Wasserstein variance over the full class, and Gamma-fits the mean/variance
// of the B replicate values.
ThresholdEstimate bootstrap_threshold(const EnvironmentDataset& ds, const Weights& w,
                                      const OptimizerConfig& cfg, double alpha, int B,
                                      std::uint64_t seed, int threads = 1);

}  // namespace wvm
