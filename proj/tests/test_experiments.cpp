#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "specmap/experiments.hpp"

using namespace specmap;
using namespace specmap::experiments;
namespace fs = std::filesystem;

namespace {

json small_config() {
  return json::parse(R"({
    "graph": {"source": "karate"},
    "k": ["10"],
    "subgraph_fraction": 0.7,
    "partiality_levels": [1.0, 0.7],
    "rewire_fractions": [0.0, 0.05, 0.1],
    "num_seeds": 3,
    "rng_seed": 11
  })");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("specmap_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(SPECMAP_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, DefaultsAndRoundTrip) {
  const auto c = config_from_json(json::object());
  EXPECT_EQ(c.rewire_fractions.size(), 10u);
  EXPECT_NEAR(c.rewire_fractions.back(), 0.30, 1e-12);
  EXPECT_EQ(c.noise_sigma, 0.2);
  EXPECT_EQ(c.k_spec.front().resolve(1000), 50u);
  const auto again = config_from_json(to_json(c));
  EXPECT_EQ(config_hash(again), config_hash(c));
}

TEST(Config, Errors) {
  EXPECT_THROW(config_from_json(json{{"k", json::array()}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"rewire_fractions", {1.5}}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"bogus", 1}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"k", {"x%"}}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"laplacian", "weird"}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"num_seeds", "five"}}), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, HashIgnoresWorkers) {
  auto a = config_from_json(small_config());
  auto b = a;
  b.workers = 4;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.rng_seed = 12;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Rewiring, EmptyFractionListIsAnError) {
  auto j = small_config();
  j["rewire_fractions"] = json::array();
  EXPECT_THROW(run_rewiring_robustness(config_from_json(j)), ConfigError);
}

TEST(Rewiring, UnperturbedReferenceHasZeroDistance) {
  const auto cfg = config_from_json(small_config());
  const auto t = run_rewiring_robustness(cfg);
  for (double d : t.values("k=10;fraction=0", "map_distance")) EXPECT_EQ(d, 0.0);
  EXPECT_EQ(t.values("k=10;fraction=0.05", "map_distance").size(), 3u);
  EXPECT_EQ(t.values("k=10;sigma=0.2", "noise_distance").size(), 3u);
  EXPECT_FALSE(std::isnan(t.median("k=10;fraction=0.1", "map_distance")));
  for (const auto& r : t.rows()) EXPECT_EQ(r.config_hash, config_hash(cfg));
}

TEST(Rewiring, DeterministicAcrossRunsAndWorkerCounts) {
  auto cfg = config_from_json(small_config());
  std::stringstream a, b, c;
  run_rewiring_robustness(cfg).write_csv(a);
  run_rewiring_robustness(cfg).write_csv(b);
  cfg.workers = 3;
  run_rewiring_robustness(cfg).write_csv(c);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str(), c.str());
}

TEST(Transfer, FullBasisIsExactAndSingleKGivesOneRowPerSeed) {
  auto j = small_config();
  j["k"] = {"100%"};
  const auto t = run_transfer_sweep(config_from_json(j));
  const auto v = t.values("k=100%", "rmse");
  ASSERT_EQ(v.size(), 3u);
  for (double r : v) EXPECT_LE(r, 1e-6);
  EXPECT_EQ(t.rows().size(), 4u);  // three seeds plus the median
}

TEST(Transfer, SweepRowsFollowK) {
  auto j = small_config();
  j["k"] = {"10%", "50%", "100%"};
  j["num_seeds"] = 1;
  const auto t = run_transfer_sweep(config_from_json(j));
  ASSERT_EQ(t.rows().size(), 6u);
  EXPECT_EQ(t.rows()[0].parameter, "k=10%");
  EXPECT_EQ(t.rows()[2].parameter, "k=100%");
}

TEST(Matching, FullGraphFullBasisIsPerfect) {
  auto j = small_config();
  j["graph"] = {{"source", "random_geometric"}, {"n", 40}, {"radius", 0.3}, {"seed", 1}};
  j["k"] = {"100%"};
  j["partiality_levels"] = {1.0};
  const auto t = run_matching_eval(config_from_json(j));
  for (double m : t.values("level=1;k=100%", "map")) EXPECT_DOUBLE_EQ(m, 1.0);
}

TEST(Matching, KarateHalfPatchHalfSpectrum) {
  auto j = small_config();
  j["k"] = {"50%"};
  j["partiality_levels"] = {0.5};
  j["khop_seed_node"] = "0";
  j["num_seeds"] = 1;
  const auto t = run_matching_eval(config_from_json(j));
  EXPECT_GE(t.values("level=0.5;k=50%", "map").at(0), 0.9);
}

TEST(Matching, EstimatedBranchEmitsRows) {
  auto j = small_config();
  j["k"] = {"8"};
  j["partiality_levels"] = {0.9};
  j["num_seeds"] = 2;
  j["estimation"] = {{"enabled", true}, {"landmarks", 20}, {"zoomout_k_max", 16}};
  const auto t = run_matching_eval(config_from_json(j));
  EXPECT_EQ(t.values("level=0.9;k=8", "map_estimated").size(), 2u);
  EXPECT_EQ(t.values("level=0.9;k=8", "map_refined").size(), 2u);
  EXPECT_EQ(t.values("level=0.9;k=8", "relative_error").size(), 2u);
}

TEST(Matching, HolesThatEmptyTheGraphReportContext) {
  auto j = small_config();
  j["graph"] = {{"source", "path"}, {"n", 2}};
  j["partiality"] = "holes";
  j["k"] = {"1"};
  j["partiality_levels"] = {0.3};
  try {
    run_matching_eval(config_from_json(j));
    FAIL() << "expected an error";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("holes"), std::string::npos) << msg;
    EXPECT_NE(msg.find("seed"), std::string::npos) << msg;
  }
}

TEST(ClassRemoval, RequiresLabels) {
  auto j = small_config();
  j["partiality"] = "class_removal";
  EXPECT_THROW(run_transfer_sweep(config_from_json(j)), ConfigError);
  const fs::path dir = scratch("labels");
  {
    std::ofstream out(dir / "labels.txt");
    for (int i = 0; i < 34; ++i) out << i << ' ' << (i < 5 ? "small" : "big") << '\n';
  }
  j["labels_path"] = (dir / "labels.txt").string();
  j["num_seeds"] = 1;
  j["k"] = {"5"};
  const auto t = run_transfer_sweep(config_from_json(j));
  EXPECT_EQ(t.values("k=5", "rmse").size(), 1u);
}

TEST(Outputs, SnapshotHashMatchesRows) {
  const auto cfg = config_from_json(small_config());
  const fs::path dir = scratch("outputs");
  DirectorySink sink(dir);
  const auto t = run_transfer_sweep(cfg, &sink);
  write_outputs(dir, cfg, t);
  const auto snap = json::parse(slurp(dir / "config.snapshot.json"));
  const std::string hash = snap.at("config_hash");
  EXPECT_EQ(hash, config_hash(config_from_json(snap.at("config"))));
  std::istringstream csv(slurp(dir / "results.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "experiment,parameter,metric,value,seed,config_hash");
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    EXPECT_EQ(line.substr(line.rfind(',') + 1), hash);
  }
  EXPECT_EQ(rows, static_cast<int>(t.rows().size()));
  EXPECT_TRUE(fs::exists(dir / "maps" / "seed11_10.csv"));
}

TEST(Cli, ExitCodesAndOutputs) {
  const fs::path dir = scratch("cli");
  {
    std::ofstream out(dir / "good.json");
    out << small_config().dump();
  }
  {
    std::ofstream out(dir / "bad.json");
    out << R"({"rewire_fractions": []})";
  }
  {
    std::ofstream out(dir / "broken.json");
    out << "{ not json";
  }
  {
    // Hop radius 0 leaves no candidate edges, so rewiring exhausts its budget.
    std::ofstream out(dir / "stuck.json");
    out << R"({"graph": {"source": "path", "n": 30}, "k": ["5"], "subgraph_fraction": 1.0,
              "rewire_fractions": [0.1], "max_hop": 0, "num_seeds": 1})";
  }
  const std::string good = (dir / "good.json").string();
  EXPECT_EQ(run_cli("transfer-sweep --config " + good + " --out " + (dir / "a").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "a" / "results.csv"));
  EXPECT_TRUE(fs::exists(dir / "a" / "config.snapshot.json"));
  EXPECT_EQ(run_cli("rewire-robustness --config " + (dir / "bad.json").string() + " --out " + (dir / "b").string()), 2);
  EXPECT_EQ(run_cli("matching-eval --config " + (dir / "broken.json").string() + " --out " + (dir / "c").string()), 2);
  EXPECT_EQ(run_cli("matching-eval --config " + (dir / "missing.json").string() + " --out " + (dir / "c").string()), 2);
  EXPECT_EQ(run_cli("transfer-sweep --out " + (dir / "d").string()), 2);
  EXPECT_EQ(run_cli("rewire-robustness --config " + (dir / "stuck.json").string() + " --out " + (dir / "f").string()), 3);
  EXPECT_EQ(run_cli("matching-eval --config " + good + " --out " + (dir / "e").string() + " --workers 2"), 0);
}

TEST(Cli, ShippedConfigsParse) {
  for (const auto& entry : fs::directory_iterator(SPECMAP_CONFIG_DIR)) {
    if (entry.path().extension() == ".json") {
      EXPECT_NO_THROW(load_config(entry.path().string())) << entry.path();
    }
  }
}
