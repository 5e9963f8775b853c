#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "specmap/specmap.hpp"

namespace fs = std::filesystem;
namespace ex = specmap::experiments;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfigError = 2, kNumericalError = 3 };

using Runner = ex::ResultTable (*)(const ex::ExperimentConfig&, ex::ArtifactSink*);

int run_experiment(Runner runner, const std::string& config_path, const std::string& out_dir, int workers) {
  ex::ExperimentConfig cfg = ex::load_config(config_path);
  if (workers > 0) cfg.workers = static_cast<std::size_t>(workers);
  std::unique_ptr<ex::ArtifactSink> sink;
  if (cfg.dump_matrices) {
    sink = std::make_unique<ex::DirectorySink>(out_dir);
  } else {
    sink = std::make_unique<ex::ArtifactSink>();
  }
  const ex::ResultTable table = runner(cfg, sink.get());
  ex::write_outputs(out_dir, cfg, table);
  std::cout << "wrote " << table.rows().size() << " rows to " << (fs::path(out_dir) / "results.csv").string() << '\n';
  return kOk;
}

int dump_eigs(const std::string& graph_path, const std::string& k, const std::string& laplacian,
              const std::string& out_path) {
  const specmap::Graph g = specmap::load_edge_list(graph_path);
  const auto basis = specmap::eigendecompose(g, specmap::EigenCount::parse(k), specmap::parse_laplacian_kind(laplacian));
  if (fs::path(out_path).extension() == ".csv") {
    std::ofstream out(out_path);
    specmap::io::write_csv(out, basis, &g);
  } else {
    specmap::io::save_binary(out_path, basis);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral maps between graphs and their partial subgraphs"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int workers = 0;
  struct Entry {
    const char* name;
    const char* help;
    Runner runner;
  };
  const Entry entries[] = {
      {"rewire-robustness", "Map variation under edge rewiring and map noise", &ex::run_rewiring_robustness},
      {"transfer-sweep", "Signal transfer error against eigenvector count", &ex::run_transfer_sweep},
      {"matching-eval", "Node matching quality across partiality levels", &ex::run_matching_eval},
  };
  std::vector<std::pair<CLI::App*, Runner>> experiment_cmds;
  for (const auto& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    sub->add_option("--config", config_path, "Experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "Output directory")->required();
    sub->add_option("--workers", workers, "Override the configured worker count");
    experiment_cmds.emplace_back(sub, e.runner);
  }

  std::string graph_path, k = "50", laplacian = "normalized", eig_out;
  CLI::App* eigs = app.add_subcommand("eigs", "Write the low-frequency eigenbasis of an edge list");
  eigs->add_option("--graph", graph_path, "Edge list")->required();
  eigs->add_option("-k,--k", k, "Eigenvector count, e.g. 50 or 10%");
  eigs->add_option("--laplacian", laplacian, "normalized or combinatorial");
  eigs->add_option("--out", eig_out, "Output file (.csv for text, binary otherwise)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (eigs->parsed()) return dump_eigs(graph_path, k, laplacian, eig_out);
    for (const auto& [sub, runner] : experiment_cmds) {
      if (sub->parsed()) return run_experiment(runner, config_path, out_dir, workers);
    }
  } catch (const specmap::NumericalError& e) {
    std::cerr << "specmap: numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const specmap::ConfigError& e) {
    std::cerr << "specmap: config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const specmap::ParseError& e) {
    std::cerr << "specmap: input error: " << e.what() << '\n';
    return kConfigError;
  } catch (const specmap::InvalidArgument& e) {
    std::cerr << "specmap: invalid argument: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "specmap: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
