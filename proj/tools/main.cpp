// Command-line front end: simulate | wvm | icp | bench | replay.
//
// Every command writes its outputs plus a manifest.json holding the fully
// resolved configuration; `replay <manifest>` re-runs the recorded command.
// Exit codes: 1 usage, 2 data, 3 numeric.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "wvm/icp.hpp"
#include "wvm/metrics.hpp"
#include "wvm/preselect.hpp"
#include "wvm/rng.hpp"
#include "wvm/simulator.hpp"
#include "wvm/version.hpp"
#include "wvm/wvm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class StageTimer {
 public:
  void start(const std::string& stage) {
    stage_ = stage;
    t0_ = std::chrono::steady_clock::now();
  }
  void stop() {
    timings_[stage_] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }
  json to_json() const {
    json j = json::object();
    for (const auto& [k, v] : timings_) j[k] = v;
    return j;
  }

 private:
  std::string stage_;
  std::chrono::steady_clock::time_point t0_;
  std::map<std::string, double> timings_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw wvm::ParseError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw wvm::ParseError("write failed for '" + path.string() + "'");
}

void write_manifest(const fs::path& out_dir, const std::string& command, std::uint64_t seed,
                    const json& config, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs, const StageTimer& timer) {
  json m;
  m["tool"] = "wvm";
  m["version"] = wvm::kVersion;
  m["command"] = command;
  m["seed"] = seed;
  m["config"] = config;
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  m["timings"] = timer.to_json();
  write_text(out_dir / "manifest.json", m.dump(2) + "\n");
}

wvm::ThresholdMethod parse_threshold(const std::string& name) {
  if (name == "bootstrap") return wvm::ThresholdMethod::bootstrap;
  if (name == "gamma") return wvm::ThresholdMethod::gamma;
  if (name == "mc" || name == "monte_carlo") return wvm::ThresholdMethod::monte_carlo;
  throw wvm::UsageError("unknown threshold method '" + name + "'");
}

std::vector<std::vector<int>> parse_blocks(const std::string& spec, int p) {
  std::vector<std::vector<int>> blocks;
  if (spec.empty()) return blocks;
  std::stringstream groups(spec);
  std::string group;
  while (std::getline(groups, group, ';')) {
    std::vector<int> members;
    std::stringstream items(group);
    std::string item;
    while (std::getline(items, item, ',')) {
      const int id = std::stoi(item);
      if (id < 1 || id > p) throw wvm::UsageError("block member " + item + " out of 1.." + std::to_string(p));
      members.push_back(id - 1);
    }
    if (!members.empty()) blocks.push_back(std::move(members));
  }
  return blocks;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  int p = 50;
  int parents = 6;
  double avg_degree = 12.0;
  int envs = 5;
  long long n_per_env = 500;
  int target_position = 0;
  double intervention_fraction = 0.65;
  double overlap = 0.40;
  double scale_lo = 0.5, scale_hi = 5.0;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};

json simulate_config_json(const SimulateOptions& o) {
  return json{{"p", o.p},
              {"parents", o.parents},
              {"avg_degree", o.avg_degree},
              {"envs", o.envs},
              {"n_per_env", o.n_per_env},
              {"target_position", o.target_position},
              {"intervention_fraction", o.intervention_fraction},
              {"overlap", o.overlap},
              {"scale_lo", o.scale_lo},
              {"scale_hi", o.scale_hi}};
}

SimulateOptions simulate_options_from_json(const json& j) {
  SimulateOptions o;
  o.p = j.at("p");
  o.parents = j.at("parents");
  o.avg_degree = j.at("avg_degree");
  o.envs = j.at("envs");
  o.n_per_env = j.at("n_per_env");
  o.target_position = j.value("target_position", 0);
  o.intervention_fraction = j.value("intervention_fraction", 0.65);
  o.overlap = j.value("overlap", 0.40);
  o.scale_lo = j.value("scale_lo", 0.5);
  o.scale_hi = j.value("scale_hi", 5.0);
  return o;
}

wvm::ScmSpec scm_spec_from(const SimulateOptions& o) {
  wvm::ScmSpec spec;
  spec.p = o.p;
  spec.n_parents = o.parents;
  spec.avg_degree = o.avg_degree;
  spec.env_count = o.envs;
  spec.n_per_env = static_cast<Eigen::Index>(o.n_per_env);
  spec.target_position = o.target_position;
  spec.intervention_fraction = o.intervention_fraction;
  spec.overlap_fraction = o.overlap;
  spec.scale_lo = o.scale_lo;
  spec.scale_hi = o.scale_hi;
  return spec;
}

json ground_truth_json(const wvm::GroundTruth& gt) {
  json edges = json::array();
  for (const auto& e : gt.edges) edges.push_back(json::array({e.from, e.to, e.coef}));
  json interventions = json::array();
  for (const auto& env : gt.interventions) {
    json nodes = json::array();
    for (const auto& n : env.nodes) {
      nodes.push_back(json{{"id", n.node}, {"scale", n.scale}, {"coef_shifted", n.coef_shifted}});
    }
    interventions.push_back(json{{"env", env.env}, {"nodes", nodes}});
  }
  return json{{"causal_order", gt.causal_order},
              {"edges", edges},
              {"parents", gt.parents},
              {"interventions", interventions},
              {"seed", gt.seed}};
}

void run_simulate(const SimulateOptions& o) {
  fs::create_directories(o.out_dir);
  StageTimer timer;
  timer.start("simulate_s");
  const wvm::ScmSpec spec = scm_spec_from(o);
  wvm::GroundTruth gt = wvm::sample_scm(spec, o.seed);
  const wvm::EnvironmentDataset ds = wvm::generate_environments(gt, spec, o.seed);
  timer.stop();

  timer.start("write_s");
  const fs::path dir(o.out_dir);
  wvm::write_csv(ds, (dir / "data.csv").string());
  write_text(dir / "ground_truth.json", ground_truth_json(gt).dump(2) + "\n");
  timer.stop();
  write_manifest(dir, "simulate", o.seed, simulate_config_json(o), {},
                 {"data.csv", "ground_truth.json"}, timer);
}

// ---------------------------------------------------------------------------
// wvm

struct WvmOptions {
  std::string input;
  double alpha = 0.1;
  std::string threshold = "bootstrap";
  int preselect = 0;  // 0 = off
  std::string correction = "none";
  std::string weights = "proportional";
  std::string blocks;
  std::uint64_t seed = 0;
  int threads = 1;
  bool no_intercept = false;
  int bootstrap_b = 50;
  int mc_paths = 10000;
  int mc_grid = 1024;
  double bandwidth_scale = 1.0;
  std::string out_dir = ".";
};

json wvm_config_json(const WvmOptions& o) {
  return json{{"input", o.input},
              {"alpha", o.alpha},
              {"threshold", o.threshold},
              {"preselect", o.preselect},
              {"correction", o.correction},
              {"weights", o.weights},
              {"blocks", o.blocks},
              {"threads", o.threads},
              {"no_intercept", o.no_intercept},
              {"bootstrap_b", o.bootstrap_b},
              {"mc_paths", o.mc_paths},
              {"mc_grid", o.mc_grid},
              {"bandwidth_scale", o.bandwidth_scale}};
}

WvmOptions wvm_options_from_json(const json& j) {
  WvmOptions o;
  o.input = j.at("input");
  o.alpha = j.at("alpha");
  o.threshold = j.value("threshold", "bootstrap");
  o.preselect = j.value("preselect", 0);
  o.correction = j.value("correction", "none");
  o.weights = j.value("weights", "proportional");
  o.blocks = j.value("blocks", "");
  o.threads = j.value("threads", 1);
  o.no_intercept = j.value("no_intercept", false);
  o.bootstrap_b = j.value("bootstrap_b", 50);
  o.mc_paths = j.value("mc_paths", 10000);
  o.mc_grid = j.value("mc_grid", 1024);
  o.bandwidth_scale = j.value("bandwidth_scale", 1.0);
  return o;
}

json wvm_report_json(const wvm::WvmReport& report, const std::vector<int>& orig_index,
                     const std::vector<std::string>& orig_names, int orig_p) {
  auto orig_of = [&](int k) { return orig_index.empty() ? k : orig_index[static_cast<std::size_t>(k)]; };
  json units = json::array();
  for (const auto& unit : report.units) {
    json members = json::array();
    for (int k : unit.members) members.push_back(orig_of(k) + 1);
    json beta = json::array();
    std::vector<double> full_beta(static_cast<std::size_t>(orig_p), 0.0);
    for (Eigen::Index k = 0; k < unit.model.beta.size(); ++k) {
      full_beta[static_cast<std::size_t>(orig_of(static_cast<int>(k)))] = unit.model.beta[k];
    }
    for (double b : full_beta) beta.push_back(b);
    std::string name;
    if (unit.is_block) {
      name = "block" + std::to_string(unit.id);
    } else {
      const int orig = orig_of(unit.members.front());
      name = orig < static_cast<int>(orig_names.size()) ? orig_names[static_cast<std::size_t>(orig)]
                                                        : "x" + std::to_string(orig + 1);
    }
    units.push_back(json{{"id", unit.is_block ? unit.id : orig_of(unit.members.front()) + 1},
                         {"kind", unit.is_block ? "block" : "predictor"},
                         {"name", name},
                         {"members", members},
                         {"stat", unit.stat},
                         {"threshold", unit.threshold.t_alpha},
                         {"reject", unit.reject},
                         {"inconclusive", unit.inconclusive},
                         {"beta", beta},
                         {"intercept", unit.model.intercept}});
  }
  json selected = json::array();
  for (int k : report.selected) selected.push_back(orig_of(k) + 1);
  return json{{"alpha", report.alpha},
              {"method", wvm::threshold_method_name(report.method)},
              {"correction", report.correction == wvm::Correction::bonferroni ? "bonferroni" : "none"},
              {"gamma_full_class", report.gamma_full},
              {"units", units},
              {"selected", selected}};
}

wvm::WvmConfig wvm_config_from(const WvmOptions& o, int p) {
  wvm::WvmConfig cfg;
  cfg.alpha = o.alpha;
  cfg.threshold_method = parse_threshold(o.threshold);
  if (o.correction == "bonferroni") {
    cfg.correction = wvm::Correction::bonferroni;
  } else if (o.correction != "none") {
    throw wvm::UsageError("unknown correction '" + o.correction + "'");
  }
  if (o.weights == "uniform") {
    cfg.weights_mode = wvm::WeightsMode::uniform;
  } else if (o.weights != "proportional") {
    throw wvm::UsageError("unknown weights mode '" + o.weights + "'");
  }
  cfg.blocks = parse_blocks(o.blocks, p);
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  cfg.optimizer.use_intercept = !o.no_intercept;
  cfg.bootstrap_reps = o.bootstrap_b;
  cfg.mc_paths = o.mc_paths;
  cfg.mc_grid = o.mc_grid;
  cfg.bandwidth_scale = o.bandwidth_scale;
  return cfg;
}

void run_wvm_cmd(const WvmOptions& o) {
  fs::create_directories(o.out_dir);
  StageTimer timer;
  timer.start("load_s");
  const wvm::EnvironmentDataset full_ds = wvm::load_csv(o.input);
  timer.stop();

  std::vector<int> orig_index;  // retained column -> original 0-based column
  wvm::EnvironmentDataset ds = full_ds;
  if (o.preselect > 0 && o.preselect < full_ds.p) {
    if (!o.blocks.empty()) throw wvm::UsageError("--blocks cannot be combined with --preselect");
    timer.start("preselect_s");
    orig_index = wvm::lasso_preselect(full_ds, o.preselect).selected;
    std::sort(orig_index.begin(), orig_index.end());
    ds = wvm::select_predictors(full_ds, orig_index);
    timer.stop();
  }

  timer.start("wvm_s");
  const wvm::WvmConfig cfg = wvm_config_from(o, ds.p);
  const wvm::WvmReport report = wvm::run_wvm(ds, cfg);
  timer.stop();

  timer.start("write_s");
  const json rj = wvm_report_json(report, orig_index, full_ds.predictor_names, full_ds.p);
  write_text(fs::path(o.out_dir) / "wvm_report.json", rj.dump(2) + "\n");
  timer.stop();
  write_manifest(o.out_dir, "wvm", o.seed, wvm_config_json(o), {o.input}, {"wvm_report.json"},
                 timer);
  std::cout << "selected: " << rj["selected"].dump() << "\n";
}

// ---------------------------------------------------------------------------
// icp

struct IcpOptions {
  std::string input;
  double alpha = 0.1;
  int max_p = 20;
  int threads = 1;
  std::uint64_t seed = 0;  // unused by the method; kept for manifest symmetry
  std::string out_dir = ".";
};

json icp_config_json(const IcpOptions& o) {
  return json{{"input", o.input}, {"alpha", o.alpha}, {"max_p", o.max_p}, {"threads", o.threads}};
}

IcpOptions icp_options_from_json(const json& j) {
  IcpOptions o;
  o.input = j.at("input");
  o.alpha = j.at("alpha");
  o.max_p = j.value("max_p", 20);
  o.threads = j.value("threads", 1);
  return o;
}

constexpr std::size_t kMaxSerializedSubsets = 100000;

json icp_report_json(const wvm::IcpReport& report, double alpha,
                     const std::vector<std::string>& names, int p) {
  json units = json::array();
  for (int k = 0; k < p; ++k) {
    const double pv = report.predictor_pvalues[static_cast<std::size_t>(k)];
    units.push_back(json{{"id", k + 1},
                         {"kind", "predictor"},
                         {"name", k < static_cast<int>(names.size()) ? names[static_cast<std::size_t>(k)]
                                                                     : "x" + std::to_string(k + 1)},
                         {"members", json::array({k + 1})},
                         {"stat", pv},
                         {"threshold", alpha},
                         {"reject", pv <= alpha}});
  }
  json selected = json::array();
  for (int k : report.intersection) selected.push_back(k + 1);
  json accepted = json::array();
  for (std::size_t i = 0; i < report.accepted_subsets.size() && i < kMaxSerializedSubsets; ++i) {
    json subset = json::array();
    for (int k = 0; k < p; ++k) {
      if (report.accepted_subsets[i] & (1u << k)) subset.push_back(k + 1);
    }
    accepted.push_back(subset);
  }
  return json{{"alpha", alpha},
              {"method", "icp"},
              {"units", units},
              {"selected", selected},
              {"accepted_subsets", accepted},
              {"accepted_subsets_truncated", report.accepted_subsets.size() > kMaxSerializedSubsets},
              {"none_accepted", report.none_accepted},
              {"n_subsets_tested", report.n_subsets_tested}};
}

void run_icp_cmd(const IcpOptions& o) {
  fs::create_directories(o.out_dir);
  StageTimer timer;
  timer.start("load_s");
  const wvm::EnvironmentDataset ds = wvm::load_csv(o.input);
  timer.stop();
  timer.start("icp_s");
  const wvm::IcpReport report = wvm::run_icp(ds, o.alpha, o.max_p, o.threads);
  timer.stop();
  timer.start("write_s");
  const json rj = icp_report_json(report, o.alpha, ds.predictor_names, ds.p);
  write_text(fs::path(o.out_dir) / "icp_report.json", rj.dump(2) + "\n");
  timer.stop();
  write_manifest(o.out_dir, "icp", o.seed, icp_config_json(o), {o.input}, {"icp_report.json"},
                 timer);
  std::cout << "selected: " << rj["selected"].dump() << "\n";
}

// ---------------------------------------------------------------------------
// bench

struct BenchOptions {
  int reps = 1;
  std::string config_path;
  json config;  // populated from config_path or replayed from a manifest
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir = ".";
};

void append_csv_double(std::string& line, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  line.append(buf, ptr);
}

void run_bench(const BenchOptions& o) {
  fs::create_directories(o.out_dir);
  StageTimer timer;
  const json& cfg = o.config;
  SimulateOptions sim = simulate_options_from_json(cfg.at("scm"));
  const double alpha = cfg.value("alpha", 0.1);
  const int preselect = cfg.value("preselect", 0);
  std::vector<std::string> methods = cfg.value("methods", std::vector<std::string>{"wvm", "icp"});

  std::string metrics_csv = "rep,method,alpha,error_ratio,fpr,precision,recall,runtime_s,n_selected\n";
  std::map<std::string, std::string> pr_csv;
  for (const auto& m : methods) pr_csv[m] = "rep,score,precision,recall\n";

  for (int rep = 0; rep < o.reps; ++rep) {
    timer.start("simulate_s");
    const std::uint64_t rep_seed = wvm::derive_seed(o.seed, "bench-rep", static_cast<std::uint64_t>(rep));
    const wvm::ScmSpec spec = scm_spec_from(sim);
    wvm::GroundTruth gt = wvm::sample_scm(spec, rep_seed);
    const wvm::EnvironmentDataset full_ds = wvm::generate_environments(gt, spec, rep_seed);
    std::vector<int> truth;
    for (int id : gt.parents) truth.push_back(id - 1);
    timer.stop();

    std::vector<int> orig_index;
    wvm::EnvironmentDataset ds = full_ds;
    if (preselect > 0 && preselect < full_ds.p) {
      timer.start("preselect_s");
      orig_index = wvm::lasso_preselect(full_ds, preselect).selected;
      std::sort(orig_index.begin(), orig_index.end());
      ds = wvm::select_predictors(full_ds, orig_index);
      timer.stop();
    }
    auto orig_of = [&](int k) { return orig_index.empty() ? k : orig_index[static_cast<std::size_t>(k)]; };

    for (const auto& method : methods) {
      std::vector<int> selected;
      std::vector<double> stats(static_cast<std::size_t>(full_ds.p),
                                -std::numeric_limits<double>::infinity());
      const auto t0 = std::chrono::steady_clock::now();
      if (method == "wvm") {
        WvmOptions wo;
        wo.alpha = alpha;
        if (cfg.contains("wvm")) {
          const json& wj = cfg["wvm"];
          wo.threshold = wj.value("threshold", "bootstrap");
          wo.bootstrap_b = wj.value("bootstrap_b", 50);
          wo.mc_paths = wj.value("mc_paths", 10000);
          wo.mc_grid = wj.value("mc_grid", 1024);
          wo.bandwidth_scale = wj.value("bandwidth_scale", 1.0);
          wo.correction = wj.value("correction", "none");
          wo.weights = wj.value("weights", "proportional");
        }
        wo.threads = o.threads;
        wo.seed = wvm::derive_seed(rep_seed, "wvm", 0);
        wvm::WvmConfig wcfg = wvm_config_from(wo, ds.p);
        const wvm::WvmReport report = wvm::run_wvm(ds, wcfg);
        for (int k : report.selected) selected.push_back(orig_of(k));
        for (const auto& unit : report.units) {
          if (!unit.is_block && !unit.inconclusive) {
            stats[static_cast<std::size_t>(orig_of(unit.members.front()))] = unit.stat;
          }
        }
      } else if (method == "icp") {
        const int max_p = cfg.contains("icp") ? cfg["icp"].value("max_p", 20) : 20;
        const wvm::IcpReport report = wvm::run_icp(ds, alpha, max_p, o.threads);
        for (int k : report.intersection) selected.push_back(orig_of(k));
        for (int k = 0; k < ds.p; ++k) {
          stats[static_cast<std::size_t>(orig_of(k))] =
              1.0 - report.predictor_pvalues[static_cast<std::size_t>(k)];
        }
      } else {
        throw wvm::UsageError("unknown bench method '" + method + "'");
      }
      const double runtime =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

      const wvm::Score s = wvm::score(selected, truth, full_ds.p);
      std::string line = std::to_string(rep) + "," + method + ",";
      append_csv_double(line, alpha);
      line += ",";
      append_csv_double(line, s.error_ratio);
      line += ",";
      append_csv_double(line, s.fpr);
      line += ",";
      append_csv_double(line, s.precision);
      line += ",";
      append_csv_double(line, s.recall);
      line += ",";
      append_csv_double(line, runtime);
      line += "," + std::to_string(selected.size()) + "\n";
      metrics_csv += line;

      for (const auto& point : wvm::pr_curve(stats, truth)) {
        std::string pr_line = std::to_string(rep) + ",";
        append_csv_double(pr_line, point.threshold);
        pr_line += ",";
        append_csv_double(pr_line, point.precision);
        pr_line += ",";
        append_csv_double(pr_line, point.recall);
        pr_line += "\n";
        pr_csv[method] += pr_line;
      }
    }
  }

  timer.start("write_s");
  const fs::path dir(o.out_dir);
  write_text(dir / "metrics.csv", metrics_csv);
  std::vector<std::string> outputs = {"metrics.csv"};
  for (const auto& [method, text] : pr_csv) {
    const std::string name = "pr_" + method + ".csv";
    write_text(dir / name, text);
    outputs.push_back(name);
  }
  timer.stop();
  json config = json{{"reps", o.reps}, {"threads", o.threads}, {"bench", o.config}};
  write_manifest(dir, "bench", o.seed, config, {}, outputs, timer);
}

// ---------------------------------------------------------------------------
// replay

void run_replay(const std::string& manifest_path, const std::string& out_dir) {
  std::ifstream in(manifest_path);
  if (!in) throw wvm::ParseError("cannot open manifest '" + manifest_path + "'");
  json m = json::parse(in, nullptr, true);
  const std::string command = m.at("command");
  const std::uint64_t seed = m.at("seed");
  if (command == "simulate") {
    SimulateOptions o = simulate_options_from_json(m.at("config"));
    o.seed = seed;
    o.out_dir = out_dir;
    run_simulate(o);
  } else if (command == "wvm") {
    WvmOptions o = wvm_options_from_json(m.at("config"));
    o.seed = seed;
    o.out_dir = out_dir;
    run_wvm_cmd(o);
  } else if (command == "icp") {
    IcpOptions o = icp_options_from_json(m.at("config"));
    o.seed = seed;
    o.out_dir = out_dir;
    run_icp_cmd(o);
  } else if (command == "bench") {
    BenchOptions o;
    o.reps = m.at("config").at("reps");
    o.threads = m.at("config").value("threads", 1);
    o.config = m.at("config").at("bench");
    o.seed = seed;
    o.out_dir = out_dir;
    run_bench(o);
  } else {
    throw wvm::UsageError("manifest has unknown command '" + command + "'");
  }
}

int env_threads_default() {
  if (const char* env = std::getenv("WVM_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein variance minimization for invariant causal prediction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", wvm::kVersion);

  SimulateOptions sim;
  CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic SCM benchmark dataset");
  simulate->add_option("--p", sim.p, "number of predictors");
  simulate->add_option("--parents", sim.parents, "number of direct causes");
  simulate->add_option("--avg-degree", sim.avg_degree, "average node degree");
  simulate->add_option("--envs", sim.envs, "number of environments (first is observational)");
  simulate->add_option("--n-per-env", sim.n_per_env, "samples per environment");
  simulate->add_option("--target-position", sim.target_position,
                       "1-based causal-order position of the target (0 = default)");
  simulate->add_option("--intervention-fraction", sim.intervention_fraction,
                       "fraction of predictors intervened per environment");
  simulate->add_option("--overlap", sim.overlap, "intervention overlap between consecutive environments");
  simulate->add_option("--scale-lo", sim.scale_lo, "lower bound range for noise scaling");
  simulate->add_option("--scale-hi", sim.scale_hi, "upper bound range for noise scaling");
  simulate->add_option("--seed", sim.seed, "root seed");
  simulate->add_option("--out-dir", sim.out_dir, "output directory");

  WvmOptions wo;
  wo.threads = env_threads_default();
  CLI::App* wvm_cmd = app.add_subcommand("wvm", "run the WVM test loop on a dataset");
  wvm_cmd->add_option("--input", wo.input, "input CSV (env,y,x1,...,xp)")->required();
  wvm_cmd->add_option("--alpha", wo.alpha, "test level");
  wvm_cmd->add_option("--threshold", wo.threshold, "bootstrap|gamma|mc");
  wvm_cmd->add_option("--preselect", wo.preselect, "Lasso-preselect this many predictors first");
  wvm_cmd->add_option("--correction", wo.correction, "none|bonferroni");
  wvm_cmd->add_option("--weights", wo.weights, "proportional|uniform");
  wvm_cmd->add_option("--blocks", wo.blocks, "block spec, e.g. '1,2;5,7' (1-based)");
  wvm_cmd->add_option("--seed", wo.seed, "root seed");
  wvm_cmd->add_option("--threads", wo.threads, "worker threads (default WVM_THREADS or 1)");
  wvm_cmd->add_flag("--no-intercept", wo.no_intercept, "exclude the intercept from the class");
  wvm_cmd->add_option("--bootstrap-b", wo.bootstrap_b, "bootstrap replicates");
  wvm_cmd->add_option("--mc-paths", wo.mc_paths, "Monte Carlo paths");
  wvm_cmd->add_option("--mc-grid", wo.mc_grid, "Monte Carlo time grid");
  wvm_cmd->add_option("--bandwidth-scale", wo.bandwidth_scale, "quantile-density bandwidth scale");
  wvm_cmd->add_option("--out-dir", wo.out_dir, "output directory");

  IcpOptions io;
  io.threads = env_threads_default();
  CLI::App* icp_cmd = app.add_subcommand("icp", "run the exhaustive ICP baseline");
  icp_cmd->add_option("--input", io.input, "input CSV")->required();
  icp_cmd->add_option("--alpha", io.alpha, "test level");
  icp_cmd->add_option("--max-p", io.max_p, "refuse datasets with more predictors than this");
  icp_cmd->add_option("--threads", io.threads, "worker threads");
  icp_cmd->add_option("--seed", io.seed, "recorded in the manifest (ICP itself is deterministic)");
  icp_cmd->add_option("--out-dir", io.out_dir, "output directory");

  BenchOptions bo;
  bo.threads = env_threads_default();
  CLI::App* bench = app.add_subcommand("bench", "simulate/score loop over replications");
  bench->add_option("--reps", bo.reps, "number of replications");
  bench->add_option("--config", bo.config_path, "bench config JSON")->required();
  bench->add_option("--seed", bo.seed, "root seed");
  bench->add_option("--threads", bo.threads, "worker threads");
  bench->add_option("--out-dir", bo.out_dir, "output directory");

  std::string replay_manifest, replay_out = ".";
  CLI::App* replay = app.add_subcommand("replay", "re-run a command from its manifest");
  replay->add_option("manifest", replay_manifest, "manifest.json path")->required();
  replay->add_option("--out-dir", replay_out, "output directory");

  try {
    app.parse(argc, argv);
    if (simulate->parsed()) {
      run_simulate(sim);
    } else if (wvm_cmd->parsed()) {
      run_wvm_cmd(wo);
    } else if (icp_cmd->parsed()) {
      run_icp_cmd(io);
    } else if (bench->parsed()) {
      std::ifstream cfg_in(bo.config_path);
      if (!cfg_in) throw wvm::ParseError("cannot open config '" + bo.config_path + "'");
      bo.config = json::parse(cfg_in, nullptr, true);
      run_bench(bo);
    } else if (replay->parsed()) {
      run_replay(replay_manifest, replay_out);
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // flag errors are usage errors
  } catch (const wvm::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const wvm::ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const wvm::DegenerateDataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
