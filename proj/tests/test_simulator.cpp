#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "wvm/icp.hpp"
#include "wvm/simulator.hpp"

using namespace wvm;

TEST_CASE("parent count is exact and infeasible specs are rejected") {
  ScmSpec spec;
  spec.p = 4;
  spec.n_parents = 2;
  spec.target_position = 5;  // all predictors are non-descendants
  const GroundTruth gt = sample_scm(spec, 3);
  CHECK(gt.parents.size() == 2);
  for (int id : gt.parents) {
    CHECK(id >= 1);
    CHECK(id <= 4);
  }

  ScmSpec bad;
  bad.p = 4;
  bad.n_parents = 4;  // default target position leaves 1 non-descendant
  CHECK_THROWS_AS(sample_scm(bad, 1), std::invalid_argument);
}

TEST_CASE("default target position generalizes the 21st-of-51 split") {
  ScmSpec spec;
  spec.p = 50;
  CHECK(spec.resolved_target_position() == 21);
  spec.p = 10;
  CHECK(spec.resolved_target_position() == 5);
}

TEST_CASE("average degree tracks the edge probability") {
  ScmSpec spec;
  spec.p = 20;
  spec.n_parents = 3;
  spec.avg_degree = 6.0;
  double degree_sum = 0.0;
  int node_count = 0;
  const int graphs = 500;
  for (int g = 0; g < graphs; ++g) {
    const GroundTruth gt = sample_scm(spec, 10000 + g);
    std::vector<int> degree(spec.p + 1, 0);
    for (const auto& e : gt.edges) {
      ++degree[e.from];
      ++degree[e.to];
    }
    for (int v = 1; v <= spec.p; ++v) degree_sum += degree[v];
    node_count += spec.p;
  }
  const double avg = degree_sum / node_count;
  CHECK(avg > 0.9 * spec.avg_degree);
  CHECK(avg < 1.1 * spec.avg_degree);
}

TEST_CASE("coefficients are normalized to a unit-variance parent combination") {
  ScmSpec spec;
  spec.p = 12;
  spec.n_parents = 3;
  spec.avg_degree = 4.0;
  spec.env_count = 1;
  spec.n_per_env = 20000;
  GroundTruth gt = sample_scm(spec, 77);
  const EnvironmentDataset ds = generate_environments(gt, spec, 77);

  // Empirical variance of the parents' linear combination for the target.
  Eigen::VectorXd comb = Eigen::VectorXd::Zero(spec.n_per_env);
  for (const auto& e : gt.edges) {
    if (e.to != 0) continue;
    comb += e.coef * ds.environments[0].x.col(e.from - 1);
  }
  const double mean = comb.mean();
  const double var = (comb.array() - mean).square().sum() / (spec.n_per_env - 1);
  CHECK(var == doctest::Approx(1.0).epsilon(0.06));
}

TEST_CASE("every predictor is intervened on at least once") {
  ScmSpec spec;
  spec.p = 10;
  spec.n_parents = 2;
  spec.target_position = 6;
  spec.env_count = 4;
  spec.n_per_env = 5;
  GroundTruth gt = sample_scm(spec, 5);
  generate_environments(gt, spec, 5);
  std::set<int> covered;
  for (const auto& env : gt.interventions) {
    CHECK(env.env >= 1);
    for (const auto& node : env.nodes) {
      covered.insert(node.node);
      CHECK(node.node != 0);  // never the target
      CHECK(node.scale > 0.0);
    }
  }
  CHECK(covered.size() == 10);
}

TEST_CASE("single environment means observational data only") {
  ScmSpec spec;
  spec.p = 5;
  spec.n_parents = 2;
  spec.target_position = 6;
  spec.env_count = 1;
  spec.n_per_env = 10;
  GroundTruth gt = sample_scm(spec, 2);
  const EnvironmentDataset ds = generate_environments(gt, spec, 2);
  CHECK(ds.env_count() == 1);
  CHECK(gt.interventions.empty());
}

TEST_CASE("disabled interventions give identically distributed environments") {
  ScmSpec spec;
  spec.p = 6;
  spec.n_parents = 2;
  spec.target_position = 7;
  spec.env_count = 2;
  spec.n_per_env = 2000;
  spec.intervention_fraction = 0.0;
  GroundTruth gt = sample_scm(spec, 31);
  const EnvironmentDataset ds = generate_environments(gt, spec, 31);
  CHECK(gt.interventions.size() == 1);
  CHECK(gt.interventions[0].nodes.empty());

  const double n = static_cast<double>(spec.n_per_env);
  for (int j = 0; j < spec.p; ++j) {
    const auto col0 = ds.environments[0].x.col(j);
    const auto col1 = ds.environments[1].x.col(j);
    const double m0 = col0.mean(), m1 = col1.mean();
    const double v0 = (col0.array() - m0).square().sum() / (n - 1);
    const double v1 = (col1.array() - m1).square().sum() / (n - 1);
    const double mean_se = std::sqrt(v0 / n + v1 / n);
    CHECK(std::abs(m0 - m1) < 4.0 * mean_se);
    const double var_se = std::sqrt(2.0 * v0 * v0 / (n - 1) + 2.0 * v1 * v1 / (n - 1));
    CHECK(std::abs(v0 - v1) < 4.0 * var_se);
  }
}

TEST_CASE("the target's structural equation is invariant across environments") {
  ScmSpec spec;
  spec.p = 8;
  spec.n_parents = 3;
  spec.target_position = 6;
  spec.env_count = 3;
  spec.n_per_env = 1500;
  spec.scale_lo = 2.0;
  spec.scale_hi = 5.0;
  GroundTruth gt = sample_scm(spec, 13);
  const EnvironmentDataset ds = generate_environments(gt, spec, 13);

  std::vector<Eigen::VectorXd> residual_views;
  for (const auto& env : ds.environments) {
    Eigen::VectorXd r = env.y;
    for (const auto& e : gt.edges) {
      if (e.to == 0) r -= e.coef * env.x.col(e.from - 1);
    }
    std::sort(r.data(), r.data() + r.size());
    residual_views.push_back(std::move(r));
  }
  for (std::size_t a = 0; a < residual_views.size(); ++a) {
    for (std::size_t b = a + 1; b < residual_views.size(); ++b) {
      CHECK(ks_two_sample(residual_views[a], residual_views[b]) > 0.01);
    }
  }
}

TEST_CASE("generation is deterministic in the seed") {
  ScmSpec spec;
  spec.p = 6;
  spec.n_parents = 2;
  spec.target_position = 5;
  spec.env_count = 3;
  spec.n_per_env = 40;
  GroundTruth gt1 = sample_scm(spec, 123);
  GroundTruth gt2 = sample_scm(spec, 123);
  CHECK(gt1.causal_order == gt2.causal_order);
  CHECK(gt1.parents == gt2.parents);
  REQUIRE(gt1.edges.size() == gt2.edges.size());
  for (std::size_t i = 0; i < gt1.edges.size(); ++i) {
    CHECK(gt1.edges[i].coef == gt2.edges[i].coef);
  }
  const EnvironmentDataset a = generate_environments(gt1, spec, 123);
  const EnvironmentDataset b = generate_environments(gt2, spec, 123);
  for (int e = 0; e < 3; ++e) {
    CHECK((a.environments[e].x - b.environments[e].x).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.environments[e].y - b.environments[e].y).cwiseAbs().maxCoeff() == 0.0);
  }
}
