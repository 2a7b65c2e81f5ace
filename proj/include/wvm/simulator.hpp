#pragma once

#include <cstdint>
#include <vector>

#include "wvm/dataset.hpp"

namespace wvm {

// Data-generating process for the synthetic benchmark: a random DAG over
// p + 1 variables with linear Gaussian structural equations and
// noise-scaling / coefficient-shift interventions.
struct ScmSpec {
  int p = 50;
  int n_parents = 6;
  double avg_degree = 12.0;
  int env_count = 5;
  Eigen::Index n_per_env = 500;
  // 1-based position of the target in the causal order; 0 selects the
  // default ceil(0.4 * (p + 1)).
  int target_position = 0;
  double coef_min = 0.2, coef_max = 1.0;
  double noise_var_min = 0.09, noise_var_max = 1.0;
  double intervention_fraction = 0.65;  // fraction of predictors intervened per environment
  double scale_lo = 0.5, scale_hi = 5.0;
  double overlap_fraction = 0.40;  // shared fraction (of p) between consecutive environments
  double noise_scale_random_prob = 2.0 / 3.0;
  double coef_shift_prob = 1.0 / 3.0;

  int resolved_target_position() const;
};

struct InterventionNode {
  int node = 0;  // predictor id, 1..p
  double scale = 1.0;
  bool coef_shifted = false;
};

struct EnvIntervention {
  int env = 0;
  std::vector<InterventionNode> nodes;
};

// Node ids: 0 is the target, 1..p are the predictors x1..xp.
struct GroundTruth {
  std::vector<int> causal_order;
  struct Edge {
    int from = 0, to = 0;
    double coef = 0.0;
  };
  std::vector<Edge> edges;
  std::vector<int> parents;  // of the target, predictor ids
  std::vector<EnvIntervention> interventions;
  std::vector<double> noise_var;  // indexed by node id
  std::uint64_t seed = 0;
  int p = 0;
  int target_position = 0;
};

// Samples the graph, causal order, normalized coefficients, and noise
// variances. Throws std::invalid_argument when n_parents exceeds the number
// of non-descendants of the target.
GroundTruth sample_scm(const ScmSpec& spec, std::uint64_t seed);

// Draws the intervention layout and the observations for every environment,
// recording the layout into gt.interventions. Environment 0 is observational.
// The target's structural equation is never touched.
EnvironmentDataset generate_environments(GroundTruth& gt, const ScmSpec& spec,
                                         std::uint64_t seed);

}  // namespace wvm
