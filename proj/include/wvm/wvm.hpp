#pragma once

#include <cstdint>
#include <vector>

#include "wvm/thresholds.hpp"

namespace wvm {

enum class Correction { none, bonferroni };
enum class WeightsMode { proportional, uniform };

struct WvmConfig {
  double alpha = 0.1;
  ThresholdMethod threshold_method = ThresholdMethod::bootstrap;
  Correction correction = Correction::none;
  WeightsMode weights_mode = WeightsMode::proportional;
  OptimizerConfig optimizer;
  std::vector<std::vector<int>> blocks;  // 0-based; empty = one test per predictor
  std::uint64_t seed = 0;
  double bandwidth_scale = 1.0;
  int qd_grid = kQdGridSize;
  int mc_paths = 10000;
  int mc_grid = 1024;
  int bootstrap_reps = 50;
  int threads = 1;
};

// One tested unit: a single predictor or a block of predictors.
struct WvmUnit {
  int id = 0;  // 1-based predictor number, or 1-based block index
  bool is_block = false;
  std::vector<int> members;  // 0-based predictor indices
  double stat = 0.0;         // minimal Wasserstein variance over the masked class
  ThresholdEstimate threshold;
  bool reject = false;
  bool inconclusive = false;
  LinearModel model;  // the masked-class minimizer
};

struct WvmReport {
  double alpha = 0.1;
  ThresholdMethod method = ThresholdMethod::bootstrap;
  Correction correction = Correction::none;
  double gamma_full = 0.0;  // minimum over the unrestricted class
  LinearModel full_model;
  std::vector<WvmUnit> units;
  std::vector<int> selected;  // 0-based predictors from rejected units
};

WvmReport run_wvm(const EnvironmentDataset& ds, const WvmConfig& cfg);

// Selection the same report would produce at a different level, reusing the
// cached statistics and fitted threshold laws.
std::vector<int> selection_at(const WvmReport& report, double alpha);

}  // namespace wvm
