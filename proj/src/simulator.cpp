#include "wvm/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "wvm/rng.hpp"

namespace wvm {

namespace {

// Fisher-Yates; std::shuffle's draw pattern is not pinned by the standard,
// this one is.
template <typename T>
void shuffle_vec(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(v[i - 1], v[pick(rng)]);
  }
}

template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> pool, std::size_t count,
                                          std::mt19937_64& rng) {
  shuffle_vec(pool, rng);
  pool.resize(std::min(count, pool.size()));
  return pool;
}

}  // namespace

int ScmSpec::resolved_target_position() const {
  if (target_position > 0) return target_position;
  return static_cast<int>(std::ceil(0.4 * static_cast<double>(p + 1)));
}

GroundTruth sample_scm(const ScmSpec& spec, std::uint64_t seed) {
  if (spec.p < 1) throw std::invalid_argument("p must be >= 1");
  const int n_nodes = spec.p + 1;
  const int tpos = spec.resolved_target_position();  // 1-based
  if (tpos < 1 || tpos > n_nodes) throw std::invalid_argument("target position out of range");
  const int n_nondesc = tpos - 1;
  if (spec.n_parents > n_nondesc) {
    throw std::invalid_argument("n_parents = " + std::to_string(spec.n_parents) +
                                " exceeds the " + std::to_string(n_nondesc) +
                                " non-descendants of the target");
  }

  auto rng = make_rng(seed, "scm");
  GroundTruth gt;
  gt.seed = seed;
  gt.p = spec.p;
  gt.target_position = tpos;

  // Causal order: predictors permuted into the non-target slots, target at
  // position tpos.
  std::vector<int> predictors(spec.p);
  for (int k = 0; k < spec.p; ++k) predictors[k] = k + 1;
  shuffle_vec(predictors, rng);
  gt.causal_order.reserve(n_nodes);
  {
    std::size_t next = 0;
    for (int pos = 0; pos < n_nodes; ++pos) {
      gt.causal_order.push_back(pos == tpos - 1 ? 0 : predictors[next++]);
    }
  }

  // Pairwise edges with probability avg_degree / p; target-incoming edges
  // are skipped here and replaced below by exactly n_parents sampled parents.
  const double edge_prob = std::min(1.0, spec.avg_degree / static_cast<double>(spec.p));
  std::bernoulli_distribution edge(edge_prob);
  std::vector<std::vector<int>> parents_of(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    for (int j = i + 1; j < n_nodes; ++j) {
      const int from = gt.causal_order[i];
      const int to = gt.causal_order[j];
      if (to == 0) continue;
      if (edge(rng)) parents_of[to].push_back(from);
    }
  }
  {
    std::vector<int> nondesc(gt.causal_order.begin(), gt.causal_order.begin() + n_nondesc);
    gt.parents = sample_without_replacement(std::move(nondesc),
                                            static_cast<std::size_t>(spec.n_parents), rng);
    std::sort(gt.parents.begin(), gt.parents.end());
    parents_of[0] = gt.parents;
  }

  // Noise variances and coefficients in causal order; coefficients are
  // normalized so the parent linear combination has unit variance under the
  // observational joint, tracked analytically through the covariance matrix.
  gt.noise_var.assign(n_nodes, 0.0);
  std::uniform_real_distribution<double> var_dist(spec.noise_var_min, spec.noise_var_max);
  std::uniform_real_distribution<double> coef_dist(spec.coef_min, spec.coef_max);
  std::bernoulli_distribution coin(0.5);

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n_nodes, n_nodes);
  for (int pos = 0; pos < n_nodes; ++pos) {
    const int v = gt.causal_order[pos];
    gt.noise_var[v] = var_dist(rng);
    const auto& par = parents_of[v];
    if (par.empty()) {
      cov(v, v) = gt.noise_var[v];
      continue;
    }
    Eigen::VectorXd coef(par.size());
    for (std::size_t j = 0; j < par.size(); ++j) {
      coef[static_cast<Eigen::Index>(j)] = (coin(rng) ? 1.0 : -1.0) * coef_dist(rng);
    }
    Eigen::MatrixXd cov_pp(par.size(), par.size());
    for (std::size_t a = 0; a < par.size(); ++a) {
      for (std::size_t b = 0; b < par.size(); ++b) {
        cov_pp(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
            cov(par[a], par[b]);
      }
    }
    const double comb_var = coef.dot(cov_pp * coef);
    if (comb_var > 0.0) coef /= std::sqrt(comb_var);
    for (std::size_t j = 0; j < par.size(); ++j) {
      gt.edges.push_back({par[j], v, coef[static_cast<Eigen::Index>(j)]});
    }
    // Cov(X_v, .) = coef' Cov(X_par, .)
    for (int u = 0; u < n_nodes; ++u) {
      double c = 0.0;
      for (std::size_t j = 0; j < par.size(); ++j) {
        c += coef[static_cast<Eigen::Index>(j)] * cov(par[j], u);
      }
      cov(v, u) = c;
      cov(u, v) = c;
    }
    cov(v, v) = (comb_var > 0.0 ? 1.0 : 0.0) + gt.noise_var[v];
  }
  return gt;
}

EnvironmentDataset generate_environments(GroundTruth& gt, const ScmSpec& spec,
                                         std::uint64_t seed) {
  const int n_nodes = gt.p + 1;
  const int n_env = spec.env_count;
  if (n_env < 1) throw std::invalid_argument("need at least one environment");

  std::vector<std::vector<int>> parents_of(n_nodes);
  std::vector<std::vector<double>> base_coef(n_nodes);
  for (const auto& e : gt.edges) {
    parents_of[e.to].push_back(e.from);
    base_coef[e.to].push_back(e.coef);
  }

  // Intervention layout: per interventional environment, ceil(fraction * p)
  // predictors; consecutive environments share round(overlap * p) of them;
  // a repair pass covers any predictor never intervened on.
  gt.interventions.clear();
  auto layout_rng = make_rng(seed, "interventions");
  const int m = static_cast<int>(std::ceil(spec.intervention_fraction * spec.p));
  std::vector<std::set<int>> targets(static_cast<std::size_t>(std::max(0, n_env - 1)));
  if (m > 0 && n_env > 1) {
    std::vector<int> all(spec.p);
    for (int k = 0; k < spec.p; ++k) all[k] = k + 1;
    const int carry_target =
        static_cast<int>(std::lround(spec.overlap_fraction * static_cast<double>(spec.p)));
    for (int env = 1; env < n_env; ++env) {
      std::set<int>& cur = targets[static_cast<std::size_t>(env - 1)];
      if (env == 1) {
        for (int v : sample_without_replacement(all, static_cast<std::size_t>(m), layout_rng)) {
          cur.insert(v);
        }
      } else {
        const std::set<int>& prev = targets[static_cast<std::size_t>(env - 2)];
        std::vector<int> prev_vec(prev.begin(), prev.end());
        const int carry = std::min<int>({carry_target, m, static_cast<int>(prev_vec.size())});
        for (int v : sample_without_replacement(prev_vec, static_cast<std::size_t>(carry),
                                                layout_rng)) {
          cur.insert(v);
        }
        std::vector<int> outside;
        for (int v : all) {
          if (prev.count(v) == 0) outside.push_back(v);
        }
        for (int v : sample_without_replacement(std::move(outside),
                                                static_cast<std::size_t>(m - carry),
                                                layout_rng)) {
          cur.insert(v);
        }
        if (static_cast<int>(cur.size()) < m) {
          std::vector<int> rest;
          for (int v : all) {
            if (cur.count(v) == 0) rest.push_back(v);
          }
          for (int v : sample_without_replacement(
                   std::move(rest), static_cast<std::size_t>(m - static_cast<int>(cur.size())),
                   layout_rng)) {
            cur.insert(v);
          }
        }
      }
    }
    // Every predictor intervened at least once.
    std::set<int> covered;
    for (const auto& t : targets) covered.insert(t.begin(), t.end());
    std::uniform_int_distribution<int> env_pick(1, n_env - 1);
    for (int v = 1; v <= spec.p; ++v) {
      if (covered.count(v) == 0) targets[static_cast<std::size_t>(env_pick(layout_rng) - 1)].insert(v);
    }
  }

  // Per-environment mechanism changes.
  std::uniform_real_distribution<double> bound_dist(spec.scale_lo, spec.scale_hi);
  std::uniform_real_distribution<double> unif01(0.0, 1.0);
  std::normal_distribution<double> std_normal;
  std::vector<std::vector<double>> env_scale(n_env, std::vector<double>(n_nodes, 1.0));
  std::vector<std::vector<std::vector<double>>> env_coef(n_env, base_coef);
  for (int env = 1; env < n_env; ++env) {
    EnvIntervention record;
    record.env = env;
    for (int v : targets[static_cast<std::size_t>(env - 1)]) {
      double lb = bound_dist(layout_rng), ub = bound_dist(layout_rng);
      if (lb > ub) std::swap(lb, ub);
      InterventionNode node;
      node.node = v;
      node.scale = unif01(layout_rng) < spec.noise_scale_random_prob
                       ? lb + (ub - lb) * unif01(layout_rng)
                       : 0.5 * (lb + ub);
      node.coef_shifted = unif01(layout_rng) < spec.coef_shift_prob;
      env_scale[env][v] = node.scale;
      if (node.coef_shifted) {
        for (double& c : env_coef[env][v]) c += std_normal(layout_rng);
      }
      record.nodes.push_back(node);
    }
    gt.interventions.push_back(std::move(record));
  }

  // Samples, one environment at a time, nodes in causal order.
  EnvironmentDataset ds;
  ds.p = gt.p;
  for (int k = 1; k <= gt.p; ++k) ds.predictor_names.push_back("x" + std::to_string(k));
  std::vector<double> noise_sd(n_nodes);
  for (int v = 0; v < n_nodes; ++v) noise_sd[v] = std::sqrt(gt.noise_var[v]);

  for (int env = 0; env < n_env; ++env) {
    auto rng = make_rng(seed, "data", static_cast<std::uint64_t>(env));
    std::normal_distribution<double> normal;
    EnvBlock block;
    block.env_id = env;
    block.source_label = env;
    block.x.resize(spec.n_per_env, gt.p);
    block.y.resize(spec.n_per_env);
    std::vector<double> values(n_nodes, 0.0);
    for (Eigen::Index i = 0; i < spec.n_per_env; ++i) {
      for (int v : gt.causal_order) {
        double val = env_scale[env][v] * noise_sd[v] * normal(rng);
        const auto& par = parents_of[v];
        const auto& coef = env_coef[env][v];
        for (std::size_t j = 0; j < par.size(); ++j) val += coef[j] * values[par[j]];
        values[v] = val;
      }
      block.y[i] = values[0];
      for (int k = 1; k <= gt.p; ++k) block.x(i, k - 1) = values[k];
    }
    ds.environments.push_back(std::move(block));
  }
  return ds;
}

}  // namespace wvm
