#include "wvm/wvm.hpp"

#include <algorithm>
#include <set>

#include "wvm/parallel.hpp"
#include "wvm/rng.hpp"

namespace wvm {

namespace {

constexpr double kNestingSlack = 1e-8;

std::vector<WvmUnit> make_units(const EnvironmentDataset& ds, const WvmConfig& cfg) {
  std::vector<WvmUnit> units;
  if (cfg.blocks.empty()) {
    units.resize(static_cast<std::size_t>(ds.p));
    for (int k = 0; k < ds.p; ++k) {
      units[static_cast<std::size_t>(k)].id = k + 1;
      units[static_cast<std::size_t>(k)].members = {k};
    }
    return units;
  }
  std::set<int> seen;
  for (std::size_t b = 0; b < cfg.blocks.size(); ++b) {
    WvmUnit unit;
    unit.id = static_cast<int>(b) + 1;
    unit.is_block = true;
    unit.members = cfg.blocks[b];
    std::sort(unit.members.begin(), unit.members.end());
    for (int k : unit.members) {
      if (k < 0 || k >= ds.p) throw std::invalid_argument("block member out of range");
      if (!seen.insert(k).second) throw std::invalid_argument("blocks must be disjoint");
    }
    if (unit.members.empty()) throw std::invalid_argument("empty block");
    units.push_back(std::move(unit));
  }
  return units;
}

double effective_alpha(double alpha, Correction correction, std::size_t n_units) {
  if (correction == Correction::bonferroni && n_units > 0) {
    return alpha / static_cast<double>(n_units);
  }
  return alpha;
}

}  // namespace

WvmReport run_wvm(const EnvironmentDataset& ds, const WvmConfig& cfg) {
  ds.validate();
  if (ds.p < 1) throw std::invalid_argument("need at least one predictor");
  if (!(cfg.alpha > 0.0) || !(cfg.alpha < 1.0)) {
    throw std::invalid_argument("alpha must be in (0, 1)");
  }

  const Weights w = cfg.weights_mode == WeightsMode::proportional ? proportional_weights(ds)
                                                                  : uniform_weights(ds);
  WvmReport report;
  report.alpha = cfg.alpha;
  report.method = cfg.threshold_method;
  report.correction = cfg.correction;
  report.units = make_units(ds, cfg);
  const double alpha_eff = effective_alpha(cfg.alpha, cfg.correction, report.units.size());

  OptimizerConfig full_cfg = cfg.optimizer;
  full_cfg.seed = derive_seed(cfg.seed, "full", 0);
  MinimizeResult full = minimize(ds, w, std::vector<bool>(ds.p, false), full_cfg);

  // The bootstrap law does not depend on the tested unit: computed once,
  // shared across units.
  ThresholdEstimate shared;
  if (cfg.threshold_method == ThresholdMethod::bootstrap) {
    shared = bootstrap_threshold(ds, w, cfg.optimizer, alpha_eff, cfg.bootstrap_reps,
                                 derive_seed(cfg.seed, "bootstrap-root", 0), cfg.threads);
  }

  const Eigen::Index n = ds.total_samples();
  parallel_for(report.units.size(), cfg.threads, [&](std::size_t u) {
    WvmUnit& unit = report.units[u];
    try {
      std::vector<bool> mask(ds.p, false);
      for (int k : unit.members) mask[static_cast<std::size_t>(k)] = true;
      OptimizerConfig unit_cfg = cfg.optimizer;
      unit_cfg.seed = derive_seed(cfg.seed, "unit", u);
      const MinimizeResult res = minimize(ds, w, mask, unit_cfg);
      unit.stat = res.value;
      unit.model = res.model;
      switch (cfg.threshold_method) {
        case ThresholdMethod::bootstrap:
          unit.threshold = shared;
          break;
        case ThresholdMethod::gamma:
        case ThresholdMethod::monte_carlo: {
          const std::vector<QuantileView> views = residuals(res.model, ds);
          std::vector<QdEstimate> parts;
          parts.reserve(views.size());
          for (const auto& view : views) {
            parts.push_back(estimate_qd(view, cfg.bandwidth_scale, cfg.qd_grid));
          }
          const CombinedQd qd = combined_qd(std::move(parts), w);
          unit.threshold =
              cfg.threshold_method == ThresholdMethod::gamma
                  ? gamma_threshold(qd, ds.env_count(), n, alpha_eff)
                  : mc_threshold(qd, ds.env_count(), n, alpha_eff, cfg.mc_paths, cfg.mc_grid,
                                 derive_seed(cfg.seed, "mc", u), 1);
          break;
        }
      }
    } catch (const std::exception&) {
      unit.inconclusive = true;
    }
  });

  // Guard the nesting invariant: the unrestricted minimum can never exceed a
  // masked one. If a unit found a deeper value, restart the full-class search
  // from its minimizer.
  double min_stat = full.value;
  const WvmUnit* deepest = nullptr;
  for (const auto& unit : report.units) {
    if (!unit.inconclusive && unit.stat < min_stat) {
      min_stat = unit.stat;
      deepest = &unit;
    }
  }
  if (deepest != nullptr && deepest->stat < full.value - kNestingSlack) {
    LinearModel warm = deepest->model;
    warm.mask.assign(static_cast<std::size_t>(ds.p), false);
    const MinimizeResult retry =
        minimize(ds, w, std::vector<bool>(ds.p, false), full_cfg, {warm});
    if (retry.value < full.value) full = retry;
  }
  report.gamma_full = full.value;
  report.full_model = full.model;

  for (auto& unit : report.units) {
    if (unit.inconclusive) continue;
    unit.reject = unit.stat > threshold_at(unit.threshold, alpha_eff);
  }
  report.selected = selection_at(report, cfg.alpha);
  return report;
}

std::vector<int> selection_at(const WvmReport& report, double alpha) {
  const double alpha_eff = effective_alpha(alpha, report.correction, report.units.size());
  std::set<int> selected;
  for (const auto& unit : report.units) {
    if (unit.inconclusive) continue;
    if (unit.stat > threshold_at(unit.threshold, alpha_eff)) {
      selected.insert(unit.members.begin(), unit.members.end());
    }
  }
  return std::vector<int>(selected.begin(), selected.end());
}

}  // namespace wvm
