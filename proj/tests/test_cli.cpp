#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kCli = WVM_CLI_PATH;

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "wvm_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(kCli) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load_json(const fs::path& path) { return json::parse(slurp(path)); }

int count_lines(const std::string& text) {
  int lines = 0;
  for (char c : text) lines += c == '\n' ? 1 : 0;
  return lines;
}

}  // namespace

TEST_CASE("simulate writes the expected shape with default parameters") {
  const fs::path dir = work_dir() / "sim_default";
  REQUIRE(run_cli("simulate --seed 7 --out-dir " + dir.string()) == 0);
  const std::string csv = slurp(dir / "data.csv");
  CHECK(count_lines(csv) == 2501);  // header + 5 * 500 rows
  const std::string header = csv.substr(0, csv.find('\n'));
  CHECK(std::count(header.begin(), header.end(), ',') == 51);  // 52 columns
  const json gt = load_json(dir / "ground_truth.json");
  CHECK(gt["parents"].size() == 6);
  CHECK(gt["causal_order"].size() == 51);
  const json manifest = load_json(dir / "manifest.json");
  CHECK(manifest["command"] == "simulate");
  CHECK(manifest["seed"] == 7);
}

TEST_CASE("simulate is byte-deterministic in the seed") {
  const fs::path a = work_dir() / "sim_a";
  const fs::path b = work_dir() / "sim_b";
  const std::string flags = "simulate --p 8 --parents 2 --avg-degree 3 --envs 3 "
                            "--n-per-env 40 --target-position 6 --seed 11 --out-dir ";
  REQUIRE(run_cli(flags + a.string()) == 0);
  REQUIRE(run_cli(flags + b.string()) == 0);
  CHECK(slurp(a / "data.csv") == slurp(b / "data.csv"));
  CHECK(slurp(a / "ground_truth.json") == slurp(b / "ground_truth.json"));
}

TEST_CASE("error contract: missing file, degenerate data, usage") {
  CHECK(run_cli("wvm --input /nonexistent.csv") == 2);
  const fs::path dir = work_dir() / "sim_single_env";
  REQUIRE(run_cli("simulate --p 4 --parents 2 --target-position 5 --envs 1 --n-per-env 10 "
                  "--seed 1 --out-dir " + dir.string()) == 0);
  CHECK(run_cli("wvm --input " + (dir / "data.csv").string()) == 2);
  CHECK(run_cli("wvm") == 1);            // missing required flag
  CHECK(run_cli("nonsense") == 1);       // unknown subcommand
}

TEST_CASE("icp refuses large p with a usage exit") {
  const fs::path dir = work_dir() / "sim_p25";
  REQUIRE(run_cli("simulate --p 25 --parents 2 --avg-degree 2 --envs 2 --n-per-env 4 "
                  "--target-position 26 --seed 2 --out-dir " + dir.string()) == 0);
  CHECK(run_cli("icp --input " + (dir / "data.csv").string() + " --out-dir " +
                (work_dir() / "icp_p25").string()) == 1);
}

TEST_CASE("wvm end to end on an identifiable simulated instance") {
  const fs::path sim = work_dir() / "sim_e2e";
  REQUIRE(run_cli("simulate --p 10 --parents 3 --avg-degree 3 --envs 5 --n-per-env 300 "
                  "--scale-lo 2 --scale-hi 5 --seed 3 --out-dir " + sim.string()) == 0);
  const json gt = load_json(sim / "ground_truth.json");
  std::set<int> parents;
  for (int id : gt["parents"]) parents.insert(id);

  const fs::path out = work_dir() / "wvm_e2e";
  REQUIRE(run_cli("wvm --input " + (sim / "data.csv").string() + " --seed 5 --out-dir " +
                  out.string()) == 0);
  const json report = load_json(out / "wvm_report.json");
  CHECK(report["selected"].size() >= 1);
  for (int id : report["selected"]) CHECK(parents.count(id) == 1);
}

TEST_CASE("higher alpha can only select more") {
  const fs::path sim = work_dir() / "sim_alpha";
  REQUIRE(run_cli("simulate --p 6 --parents 2 --avg-degree 2 --envs 4 --n-per-env 250 "
                  "--scale-lo 2 --scale-hi 5 --seed 9 --out-dir " + sim.string()) == 0);
  const std::string base = "wvm --input " + (sim / "data.csv").string() +
                           " --threshold gamma --seed 4 --out-dir ";
  const fs::path tight = work_dir() / "wvm_a01";
  const fs::path loose = work_dir() / "wvm_a07";
  REQUIRE(run_cli(base + tight.string() + " --alpha 0.1") == 0);
  REQUIRE(run_cli(base + loose.string() + " --alpha 0.7") == 0);
  std::set<int> tight_sel, loose_sel;
  for (int id : load_json(tight / "wvm_report.json")["selected"]) tight_sel.insert(id);
  for (int id : load_json(loose / "wvm_report.json")["selected"]) loose_sel.insert(id);
  for (int id : tight_sel) CHECK(loose_sel.count(id) == 1);
}

TEST_CASE("reports are byte-deterministic and thread-count independent") {
  const fs::path sim = work_dir() / "sim_det";
  REQUIRE(run_cli("simulate --p 5 --parents 2 --avg-degree 2 --envs 3 --n-per-env 120 "
                  "--seed 21 --out-dir " + sim.string()) == 0);
  const std::string base = "wvm --input " + (sim / "data.csv").string() +
                           " --bootstrap-b 12 --seed 8 --out-dir ";
  const fs::path a = work_dir() / "det_a";
  const fs::path b = work_dir() / "det_b";
  const fs::path c = work_dir() / "det_c";
  REQUIRE(run_cli(base + a.string() + " --threads 1") == 0);
  REQUIRE(run_cli(base + b.string() + " --threads 1") == 0);
  REQUIRE(run_cli(base + c.string() + " --threads 2") == 0);
  CHECK(slurp(a / "wvm_report.json") == slurp(b / "wvm_report.json"));
  CHECK(slurp(a / "wvm_report.json") == slurp(c / "wvm_report.json"));

  const std::string icp_base = "icp --input " + (sim / "data.csv").string() + " --out-dir ";
  const fs::path ia = work_dir() / "det_icp_a";
  const fs::path ib = work_dir() / "det_icp_b";
  REQUIRE(run_cli(icp_base + ia.string()) == 0);
  REQUIRE(run_cli(icp_base + ib.string() + " --threads 2") == 0);
  CHECK(slurp(ia / "icp_report.json") == slurp(ib / "icp_report.json"));
}

TEST_CASE("replay from a manifest reproduces outputs byte-exactly") {
  const fs::path sim = work_dir() / "sim_replay";
  REQUIRE(run_cli("simulate --p 6 --parents 2 --avg-degree 2 --envs 3 --n-per-env 60 "
                  "--seed 33 --out-dir " + sim.string()) == 0);
  const fs::path sim2 = work_dir() / "sim_replay2";
  REQUIRE(run_cli("replay " + (sim / "manifest.json").string() + " --out-dir " + sim2.string()) == 0);
  CHECK(slurp(sim / "data.csv") == slurp(sim2 / "data.csv"));
  CHECK(slurp(sim / "ground_truth.json") == slurp(sim2 / "ground_truth.json"));

  const fs::path wvm_out = work_dir() / "wvm_replay";
  REQUIRE(run_cli("wvm --input " + (sim / "data.csv").string() +
                  " --threshold gamma --seed 2 --out-dir " + wvm_out.string()) == 0);
  const fs::path wvm_out2 = work_dir() / "wvm_replay2";
  REQUIRE(run_cli("replay " + (wvm_out / "manifest.json").string() + " --out-dir " +
                  wvm_out2.string()) == 0);
  CHECK(slurp(wvm_out / "wvm_report.json") == slurp(wvm_out2 / "wvm_report.json"));
}

TEST_CASE("bench produces one metrics row per (rep, method)") {
  const fs::path cfg_path = work_dir() / "bench_cfg.json";
  {
    std::ofstream out(cfg_path);
    out << R"({"scm": {"p": 8, "parents": 2, "avg_degree": 2, "envs": 3, "n_per_env": 80,
                "target_position": 7, "scale_lo": 2, "scale_hi": 5},
               "alpha": 0.1, "methods": ["wvm", "icp"],
               "wvm": {"threshold": "gamma"}, "icp": {"max_p": 20}})";
  }
  const fs::path out = work_dir() / "bench_out";
  REQUIRE(run_cli("bench --reps 2 --config " + cfg_path.string() + " --seed 14 --out-dir " +
                  out.string()) == 0);
  const std::string metrics = slurp(out / "metrics.csv");
  CHECK(count_lines(metrics) == 5);  // header + 2 reps x 2 methods
  CHECK(metrics.rfind("rep,method,alpha,error_ratio,fpr,precision,recall,runtime_s,n_selected",
                      0) == 0);
  CHECK(fs::exists(out / "pr_wvm.csv"));
  CHECK(fs::exists(out / "pr_icp.csv"));
}

TEST_CASE("blocks flag tests grouped predictors") {
  const fs::path sim = work_dir() / "sim_blocks";
  REQUIRE(run_cli("simulate --p 4 --parents 2 --avg-degree 2 --envs 3 --n-per-env 150 "
                  "--target-position 5 --scale-lo 2 --scale-hi 5 --seed 6 --out-dir " +
                  sim.string()) == 0);
  const fs::path out = work_dir() / "wvm_blocks";
  REQUIRE(run_cli("wvm --input " + (sim / "data.csv").string() +
                  " --threshold gamma --blocks '1,2;3,4' --seed 3 --out-dir " + out.string()) == 0);
  const json report = load_json(out / "wvm_report.json");
  REQUIRE(report["units"].size() == 2);
  CHECK(report["units"][0]["kind"] == "block");
  CHECK(report["units"][0]["members"].size() == 2);
}
