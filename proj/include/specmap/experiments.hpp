#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "specmap/datasets.hpp"
#include "specmap/detail/parallel.hpp"
#include "specmap/fmap.hpp"
#include "specmap/io.hpp"
#include "specmap/matching.hpp"
#include "specmap/rewire.hpp"
#include "specmap/spectral.hpp"
#include "specmap/subgraph.hpp"

namespace specmap::experiments {

using nlohmann::json;

enum class Partiality { khop, holes, class_removal };

inline const char* to_string(Partiality p) {
  switch (p) {
    case Partiality::khop: return "khop";
    case Partiality::holes: return "holes";
    case Partiality::class_removal: return "class_removal";
  }
  return "?";
}

/// Where the parent graph comes from.
struct GraphSource {
  std::string kind = "karate";  // karate | edge_list | random_geometric | planted_partition | erdos_renyi | grid | path
  std::string path;
  std::size_t n = 0;
  double radius = 0.0;
  double p = 0.0;
  double p_in = 0.0;
  double p_out = 0.0;
  std::size_t communities = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::uint64_t seed = 0;
  bool largest_component = true;
};

struct EstimationConfig {
  bool enabled = false;
  std::size_t landmarks = 50;
  double mu_mask = 1e-3;
  double mu_orth = 0.0;
  std::optional<double> mask_width;
  std::size_t zoomout_step = 2;
  /// Unset: twice the starting k, capped by both bases.
  std::optional<std::size_t> zoomout_k_max;
  bool zoomout = true;
};

struct ExperimentConfig {
  GraphSource graph;
  LaplacianKind laplacian = LaplacianKind::normalized;
  std::vector<EigenCount> k_spec{EigenCount::absolute(50)};
  Partiality partiality = Partiality::khop;
  /// Subgraph size for rewiring and transfer runs, as a fraction of n.
  double subgraph_fraction = 0.6;
  /// Subgraph sizes for matching runs.
  std::vector<double> partiality_levels{0.9, 0.8, 0.7, 0.6, 0.5};
  /// Fixed BFS seed node for khop subgraphs; random per run when unset.
  std::optional<NodeId> khop_seed_node;
  /// Keep only the largest connected component of each subgraph.
  bool subgraph_largest_component = false;
  std::vector<double> rewire_fractions = default_rewire_fractions();
  std::optional<std::size_t> max_hop;
  double noise_sigma = 0.2;
  std::uint64_t rng_seed = 0;
  std::size_t num_seeds = 5;
  std::size_t rwpe_dim = kDefaultRwpeDim;
  std::string labels_path;
  /// Label removed by class_removal partiality; the rarest label when empty.
  std::string class_label;
  EstimationConfig estimation;
  std::size_t workers = 1;
  bool dump_matrices = true;

  static std::vector<double> default_rewire_fractions() {
    std::vector<double> f;
    for (int i = 1; i <= 10; ++i) f.push_back(0.03 * i);
    return f;
  }
};

// ---------------------------------------------------------------------------
// Config (JSON)
// ---------------------------------------------------------------------------

namespace detail {

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; })) {
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
  }
}

}  // namespace detail

inline json to_json(const ExperimentConfig& c) {
  json g = {{"source", c.graph.kind}, {"largest_component", c.graph.largest_component}, {"seed", c.graph.seed}};
  if (!c.graph.path.empty()) g["path"] = c.graph.path;
  if (c.graph.n) g["n"] = c.graph.n;
  if (c.graph.radius > 0) g["radius"] = c.graph.radius;
  if (c.graph.p > 0) g["p"] = c.graph.p;
  if (c.graph.communities) {
    g["communities"] = c.graph.communities;
    g["p_in"] = c.graph.p_in;
    g["p_out"] = c.graph.p_out;
  }
  if (c.graph.rows) {
    g["rows"] = c.graph.rows;
    g["cols"] = c.graph.cols;
  }
  json ks = json::array();
  for (const auto& k : c.k_spec) ks.push_back(k.str());
  json est = {{"enabled", c.estimation.enabled},       {"landmarks", c.estimation.landmarks},
              {"mu_mask", c.estimation.mu_mask},       {"mu_orth", c.estimation.mu_orth},
              {"zoomout", c.estimation.zoomout},       {"zoomout_step", c.estimation.zoomout_step}};
  if (c.estimation.mask_width) est["mask_width"] = *c.estimation.mask_width;
  if (c.estimation.zoomout_k_max) est["zoomout_k_max"] = *c.estimation.zoomout_k_max;
  json out = {{"graph", g},
              {"laplacian", to_string(c.laplacian)},
              {"k", ks},
              {"partiality", to_string(c.partiality)},
              {"subgraph_fraction", c.subgraph_fraction},
              {"partiality_levels", c.partiality_levels},
              {"subgraph_largest_component", c.subgraph_largest_component},
              {"rewire_fractions", c.rewire_fractions},
              {"noise_sigma", c.noise_sigma},
              {"rng_seed", c.rng_seed},
              {"num_seeds", c.num_seeds},
              {"rwpe_dim", c.rwpe_dim},
              {"estimation", est},
              {"workers", c.workers},
              {"dump_matrices", c.dump_matrices}};
  if (c.khop_seed_node) out["khop_seed_node"] = *c.khop_seed_node;
  if (c.max_hop) out["max_hop"] = *c.max_hop;
  if (!c.labels_path.empty()) out["labels_path"] = c.labels_path;
  if (!c.class_label.empty()) out["class_label"] = c.class_label;
  return out;
}

inline void validate(const ExperimentConfig& c) {
  if (c.k_spec.empty()) throw ConfigError("k must list at least one eigenvector count");
  for (double f : c.rewire_fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("rewire fractions must lie in (0, 1] (0 marks the unperturbed reference)");
  }
  if (!(c.subgraph_fraction > 0.0 && c.subgraph_fraction <= 1.0)) throw ConfigError("subgraph_fraction must lie in (0, 1]");
  for (double l : c.partiality_levels) {
    if (!(l > 0.0 && l <= 1.0)) throw ConfigError("partiality levels must lie in (0, 1]");
  }
  if (!(c.noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
  if (c.num_seeds < 1) throw ConfigError("num_seeds must be >= 1");
  if (c.rwpe_dim < 1) throw ConfigError("rwpe_dim must be >= 1");
  if (c.estimation.landmarks < 1) throw ConfigError("estimation.landmarks must be >= 1");
  if (c.estimation.zoomout_step < 1) throw ConfigError("estimation.zoomout_step must be >= 1");
}

inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    detail::check_keys(j,
                       {"graph", "laplacian", "k", "partiality", "subgraph_fraction", "partiality_levels",
                        "khop_seed_node", "subgraph_largest_component", "rewire_fractions", "max_hop", "noise_sigma",
                        "rng_seed", "num_seeds", "rwpe_dim", "labels_path", "class_label", "estimation", "workers",
                        "dump_matrices", "output_dir"},
                       "config");
    if (auto it = j.find("graph"); it != j.end()) {
      const json& g = *it;
      if (g.is_string()) {
        c.graph.kind = g.get<std::string>();
      } else {
        detail::check_keys(g,
                           {"source", "path", "n", "radius", "avg_degree", "p", "p_in", "p_out", "communities", "rows",
                            "cols", "seed", "largest_component"},
                           "graph");
        detail::read_opt(g, "source", c.graph.kind);
        detail::read_opt(g, "path", c.graph.path);
        detail::read_opt(g, "n", c.graph.n);
        detail::read_opt(g, "radius", c.graph.radius);
        detail::read_opt(g, "p", c.graph.p);
        detail::read_opt(g, "p_in", c.graph.p_in);
        detail::read_opt(g, "p_out", c.graph.p_out);
        detail::read_opt(g, "communities", c.graph.communities);
        detail::read_opt(g, "rows", c.graph.rows);
        detail::read_opt(g, "cols", c.graph.cols);
        detail::read_opt(g, "seed", c.graph.seed);
        detail::read_opt(g, "largest_component", c.graph.largest_component);
        if (auto ad = g.find("avg_degree"); ad != g.end() && c.graph.kind == "random_geometric" && c.graph.radius <= 0) {
          c.graph.radius = std::sqrt(ad->get<double>() / (3.141592653589793 * static_cast<double>(c.graph.n)));
        }
      }
    }
    if (auto it = j.find("laplacian"); it != j.end()) c.laplacian = parse_laplacian_kind(it->get<std::string>());
    if (auto it = j.find("k"); it != j.end()) {
      c.k_spec.clear();
      const json arr = it->is_array() ? *it : json::array({*it});
      for (const auto& k : arr) c.k_spec.push_back(EigenCount::parse(k.is_string() ? k.get<std::string>() : k.dump()));
    }
    if (auto it = j.find("partiality"); it != j.end()) {
      const auto p = it->get<std::string>();
      if (p == "khop" || p == "patch") {
        c.partiality = Partiality::khop;
      } else if (p == "holes") {
        c.partiality = Partiality::holes;
      } else if (p == "class_removal" || p == "class") {
        c.partiality = Partiality::class_removal;
      } else {
        throw ConfigError("unknown partiality '" + p + "'");
      }
    }
    detail::read_opt(j, "subgraph_fraction", c.subgraph_fraction);
    detail::read_opt(j, "partiality_levels", c.partiality_levels);
    if (auto it = j.find("khop_seed_node"); it != j.end() && !it->is_null()) {
      c.khop_seed_node = it->is_string() ? it->get<std::string>() : it->dump();
    }
    detail::read_opt(j, "subgraph_largest_component", c.subgraph_largest_component);
    detail::read_opt(j, "rewire_fractions", c.rewire_fractions);
    if (auto it = j.find("max_hop"); it != j.end() && !it->is_null()) c.max_hop = it->get<std::size_t>();
    detail::read_opt(j, "noise_sigma", c.noise_sigma);
    detail::read_opt(j, "rng_seed", c.rng_seed);
    detail::read_opt(j, "num_seeds", c.num_seeds);
    detail::read_opt(j, "rwpe_dim", c.rwpe_dim);
    detail::read_opt(j, "labels_path", c.labels_path);
    detail::read_opt(j, "class_label", c.class_label);
    detail::read_opt(j, "workers", c.workers);
    detail::read_opt(j, "dump_matrices", c.dump_matrices);
    if (auto it = j.find("estimation"); it != j.end()) {
      const json& e = *it;
      detail::check_keys(e,
                         {"enabled", "landmarks", "mu_mask", "mu_orth", "mask_width", "zoomout", "zoomout_step",
                          "zoomout_k_max"},
                         "estimation");
      detail::read_opt(e, "enabled", c.estimation.enabled);
      detail::read_opt(e, "landmarks", c.estimation.landmarks);
      detail::read_opt(e, "mu_mask", c.estimation.mu_mask);
      detail::read_opt(e, "mu_orth", c.estimation.mu_orth);
      detail::read_opt(e, "zoomout", c.estimation.zoomout);
      detail::read_opt(e, "zoomout_step", c.estimation.zoomout_step);
      if (auto w = e.find("mask_width"); w != e.end() && !w->is_null()) c.estimation.mask_width = w->get<double>();
      if (auto km = e.find("zoomout_k_max"); km != e.end() && !km->is_null()) {
        c.estimation.zoomout_k_max = km->get<std::size_t>();
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  validate(c);
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

/// FNV-1a 64 of the canonical (sorted-key) JSON text, as 16 hex digits.
/// The worker count does not affect results and is left out.
inline std::string config_hash(const ExperimentConfig& c) {
  json j = to_json(c);
  j.erase("workers");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

struct ResultRow {
  std::string experiment;
  std::string parameter;
  std::string metric;
  double value = 0.0;
  /// Run seed, or "median" for aggregate rows.
  std::string seed;
  std::string config_hash;
};

/// Append-only result table; every row carries the config hash.
class ResultTable {
 public:
  explicit ResultTable(std::string hash = {}) : hash_(std::move(hash)) {}

  void append(std::string experiment, std::string parameter, std::string metric, double value, std::string seed) {
    rows_.push_back({std::move(experiment), std::move(parameter), std::move(metric), value, std::move(seed), hash_});
  }
  void append(const ResultTable& other) { rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end()); }

  const std::vector<ResultRow>& rows() const noexcept { return rows_; }
  const std::string& config_hash() const noexcept { return hash_; }

  /// Values of a (parameter, metric) pair over per-seed rows.
  std::vector<double> values(const std::string& parameter, const std::string& metric) const {
    std::vector<double> out;
    for (const auto& r : rows_) {
      if (r.parameter == parameter && r.metric == metric && r.seed != "median") out.push_back(r.value);
    }
    return out;
  }

  /// Median row value, or NaN when no aggregate row exists.
  double median(const std::string& parameter, const std::string& metric) const {
    for (const auto& r : rows_) {
      if (r.parameter == parameter && r.metric == metric && r.seed == "median") return r.value;
    }
    return std::nan("");
  }

  /// Appends one "median" row per (experiment, parameter, metric) over the
  /// per-seed rows, in first-appearance order.
  void add_medians() {
    std::vector<std::tuple<std::string, std::string, std::string>> keys;
    std::map<std::tuple<std::string, std::string, std::string>, std::vector<double>> groups;
    for (const auto& r : rows_) {
      if (r.seed == "median") continue;
      auto key = std::make_tuple(r.experiment, r.parameter, r.metric);
      auto [it, fresh] = groups.try_emplace(key);
      if (fresh) keys.push_back(key);
      it->second.push_back(r.value);
    }
    for (const auto& key : keys) {
      append(std::get<0>(key), std::get<1>(key), std::get<2>(key), median_of(groups[key]), "median");
    }
  }

  void write_csv(std::ostream& out) const {
    out << "experiment,parameter,metric,value,seed,config_hash\n";
    for (const auto& r : rows_) {
      out << r.experiment << ',' << r.parameter << ',' << r.metric << ',' << io::format_double(r.value) << ','
          << r.seed << ',' << r.config_hash << '\n';
    }
  }

  static double median_of(std::vector<double> v) {
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
  }

 private:
  std::string hash_;
  std::vector<ResultRow> rows_;
};

/// Receives per-run matrix dumps; the default discards them.
class ArtifactSink {
 public:
  virtual ~ArtifactSink() = default;
  virtual void map(const std::string& /*name*/, const SpectralMap& /*m*/) {}
  virtual void text(const std::string& /*name*/, const std::string& /*content*/) {}
};

/// Writes dumps under `<dir>/maps/`.
class DirectorySink : public ArtifactSink {
 public:
  explicit DirectorySink(std::filesystem::path dir) : dir_(std::move(dir) / "maps") {
    std::filesystem::create_directories(dir_);
  }
  void map(const std::string& name, const SpectralMap& m) override {
    std::ofstream out(dir_ / (name + ".csv"));
    io::write_csv(out, m);
  }
  void text(const std::string& name, const std::string& content) override {
    std::ofstream out(dir_ / name);
    out << content;
  }

 private:
  std::filesystem::path dir_;
};

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

namespace detail {

/// splitmix64 step; decorrelates per-run seeds derived from the base seed.
inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t run_seed, std::uint64_t stream) { return mix(mix(run_seed) ^ stream); }

enum Stream : std::uint64_t { kSubgraph = 1, kRewire = 2, kNoise = 3, kLandmarks = 4 };

inline std::string fmt_fraction(double f) {
  std::ostringstream s;
  s << f;
  return s.str();
}

inline std::vector<std::uint64_t> run_seeds(const ExperimentConfig& c) {
  std::vector<std::uint64_t> s(c.num_seeds);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = c.rng_seed + i;
  return s;
}

inline std::size_t max_k(const ExperimentConfig& c, std::size_t n) {
  std::size_t k = 1;
  for (const auto& e : c.k_spec) k = std::max(k, e.resolve(n));
  return k;
}

/// Runs `fn(seed_index)` for every seed on the worker pool and concatenates
/// the per-seed tables in seed order.
template <class Fn>
ResultTable run_per_seed(const ExperimentConfig& c, const std::string& hash, Fn&& fn) {
  const auto seeds = run_seeds(c);
  std::vector<ResultTable> parts(seeds.size(), ResultTable(hash));
  specmap::detail::parallel_for(seeds.size(), c.workers, [&](std::size_t i) { parts[i] = fn(seeds[i]); });
  ResultTable out(hash);
  for (const auto& p : parts) out.append(p);
  out.add_medians();
  return out;
}

}  // namespace detail

inline Graph load_graph(const GraphSource& s) {
  Graph g;
  if (s.kind == "karate") {
    g = datasets::karate();
  } else if (s.kind == "edge_list") {
    if (s.path.empty()) throw ConfigError("graph.path is required for edge_list sources");
    g = load_edge_list(s.path);
  } else if (s.kind == "random_geometric") {
    if (!s.n || s.radius <= 0) throw ConfigError("random_geometric needs n and radius (or avg_degree)");
    g = datasets::random_geometric(s.n, s.radius, s.seed);
  } else if (s.kind == "planted_partition") {
    if (!s.n || !s.communities) throw ConfigError("planted_partition needs n and communities");
    g = datasets::planted_partition(s.n, s.communities, s.p_in, s.p_out, s.seed);
  } else if (s.kind == "erdos_renyi") {
    if (!s.n || s.p <= 0) throw ConfigError("erdos_renyi needs n and p");
    g = datasets::erdos_renyi(s.n, s.p, s.seed);
  } else if (s.kind == "grid") {
    if (!s.rows || !s.cols) throw ConfigError("grid needs rows and cols");
    g = datasets::grid(s.rows, s.cols);
  } else if (s.kind == "path") {
    if (!s.n) throw ConfigError("path needs n");
    g = datasets::path(s.n);
  } else {
    throw ConfigError("unknown graph source '" + s.kind + "'");
  }
  if (s.largest_component) g = largest_component(g).graph;
  return g;
}

/// Subgraph of `g` with about `fraction * n` nodes, per the configured
/// partiality. Errors carry the run context.
inline Subgraph make_subgraph(const ExperimentConfig& c, const Graph& g, double fraction, std::uint64_t run_seed) {
  const auto target = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(g.num_nodes()))));
  Rng rng(detail::derive_seed(run_seed, detail::kSubgraph));
  Subgraph sub;
  try {
    switch (c.partiality) {
      case Partiality::khop: {
        const NodeIndex center = c.khop_seed_node ? g.index_of(*c.khop_seed_node) : uniform_index(rng, g.num_nodes());
        sub = khop_subgraph(g, center, target);
        break;
      }
      case Partiality::holes:
        sub = random_holes_subgraph(g, target, rng);
        break;
      case Partiality::class_removal: {
        if (c.labels_path.empty()) throw ConfigError("class_removal partiality requires labels_path");
        std::ifstream in(c.labels_path);
        if (!in) throw ConfigError("cannot open labels '" + c.labels_path + "'");
        const auto labels = io::parse_labels(in);
        std::string label = c.class_label;
        if (label.empty()) {
          std::map<std::string, std::size_t> counts;
          for (const auto& [node, l] : labels) ++counts[l];
          if (counts.empty()) throw ConfigError("labels file is empty");
          label = std::min_element(counts.begin(), counts.end(),
                                   [](const auto& a, const auto& b) { return a.second < b.second; })->first;
        }
        sub = class_subgraph(g, labels, label);
        break;
      }
    }
    if (c.subgraph_largest_component) sub = largest_component(sub);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string(to_string(c.partiality)) + " subgraph (fraction " + detail::fmt_fraction(fraction) +
                      ", seed " + std::to_string(run_seed) + "): " + e.what());
  }
  return sub;
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

/// Map variation under rewiring of the subgraph versus Gaussian noise on
/// the baseline map.
inline ResultTable run_rewiring_robustness(const ExperimentConfig& cfg, ArtifactSink* sink = nullptr) {
  validate(cfg);
  if (cfg.rewire_fractions.empty()) throw ConfigError("rewire_fractions must not be empty");
  const std::string hash = config_hash(cfg);
  const Graph g = load_graph(cfg.graph);
  const Eigenbasis full1 = eigendecompose(g, detail::max_k(cfg, g.num_nodes()), cfg.laplacian);
  ArtifactSink discard;
  ArtifactSink& out = sink ? *sink : discard;

  return detail::run_per_seed(cfg, hash, [&](std::uint64_t seed) {
    ResultTable t(hash);
    const Subgraph sub = make_subgraph(cfg, g, cfg.subgraph_fraction, seed);
    const std::string s = std::to_string(seed);
    const std::size_t kmax2 = detail::max_k(cfg, sub.graph.num_nodes());
    const Eigenbasis full2 = eigendecompose(sub.graph, kmax2, cfg.laplacian);

    std::vector<Eigenbasis> rewired;
    for (std::size_t fi = 0; fi < cfg.rewire_fractions.size(); ++fi) {
      const double f = cfg.rewire_fractions[fi];
      if (f == 0.0) {
        rewired.push_back(full2);
        continue;
      }
      RewireResult rw;
      try {
        rw = rewire(sub.graph, f, detail::derive_seed(seed, detail::kRewire + 16 * fi), cfg.max_hop);
      } catch (const InvalidArgument& e) {
        throw ConfigError("rewire (fraction " + detail::fmt_fraction(f) + ", seed " + s + "): " + e.what());
      }
      t.append("rewire-robustness", "fraction=" + detail::fmt_fraction(f), "edit_fraction",
               edit_fraction(sub.graph, rw.graph), s);
      if (cfg.dump_matrices) {
        out.text("seed" + s + "_rewire_" + detail::fmt_fraction(f) + ".json", io::to_json(rw.record, sub.graph).dump());
      }
      rewired.push_back(eigendecompose(rw.graph, kmax2, cfg.laplacian));
    }

    for (const auto& kspec : cfg.k_spec) {
      const std::size_t k1 = kspec.resolve(g.num_nodes());
      const std::size_t k2 = kspec.resolve(sub.graph.num_nodes());
      const Eigenbasis b1 = full1.truncated(k1);
      const SpectralMap base = compute_spectral_map(sub.to_parent, b1, full2.truncated(k2));
      const std::string kp = "k=" + kspec.str();
      if (cfg.dump_matrices) out.map("seed" + s + "_" + kspec.str() + "_baseline", base);
      for (std::size_t fi = 0; fi < cfg.rewire_fractions.size(); ++fi) {
        const SpectralMap c = compute_spectral_map(sub.to_parent, b1, rewired[fi].truncated(k2));
        const std::string frac = detail::fmt_fraction(cfg.rewire_fractions[fi]);
        if (cfg.dump_matrices) out.map("seed" + s + "_" + kspec.str() + "_rewire_" + frac, c);
        t.append("rewire-robustness", kp + ";fraction=" + frac, "map_distance", map_distance(base, c), s);
      }
      const SpectralMap noisy = gaussian_noise_map(base, cfg.noise_sigma, detail::derive_seed(seed, detail::kNoise));
      t.append("rewire-robustness", kp + ";sigma=" + detail::fmt_fraction(cfg.noise_sigma), "noise_distance",
               map_distance(base, noisy), s);
    }
    return t;
  });
}

/// RMSE of positional encodings transferred through ground-truth maps of
/// increasing size. The reference is the direct pull-back S f.
inline ResultTable run_transfer_sweep(const ExperimentConfig& cfg, ArtifactSink* sink = nullptr) {
  validate(cfg);
  const std::string hash = config_hash(cfg);
  const Graph g = load_graph(cfg.graph);
  const SignalMatrix f = normalize_signal(rw_positional_encoding(g, cfg.rwpe_dim));
  const Eigenbasis full1 = eigendecompose(g, detail::max_k(cfg, g.num_nodes()), cfg.laplacian);
  ArtifactSink discard;
  ArtifactSink& out = sink ? *sink : discard;

  return detail::run_per_seed(cfg, hash, [&](std::uint64_t seed) {
    ResultTable t(hash);
    const Subgraph sub = make_subgraph(cfg, g, cfg.subgraph_fraction, seed);
    const std::string s = std::to_string(seed);
    SignalMatrix reference(static_cast<Eigen::Index>(sub.graph.num_nodes()), f.cols());
    for (NodeIndex y = 0; y < sub.graph.num_nodes(); ++y) {
      reference.row(static_cast<Eigen::Index>(y)) = f.row(static_cast<Eigen::Index>(sub.to_parent[y]));
    }
    const Eigenbasis full2 = eigendecompose(sub.graph, detail::max_k(cfg, sub.graph.num_nodes()), cfg.laplacian);
    for (const auto& kspec : cfg.k_spec) {
      const Eigenbasis b1 = full1.truncated(kspec.resolve(g.num_nodes()));
      const Eigenbasis b2 = full2.truncated(kspec.resolve(sub.graph.num_nodes()));
      const SpectralMap c = compute_spectral_map(sub.to_parent, b1, b2);
      if (cfg.dump_matrices) out.map("seed" + s + "_" + kspec.str(), c);
      t.append("transfer-sweep", "k=" + kspec.str(), "rmse", rmse(reference, transfer_signal(c, b1, b2, f)), s);
    }
    return t;
  });
}

/// MAP of node correspondences recovered from ground-truth (and optionally
/// landmark-estimated, ZoomOut-refined) maps across partiality levels.
inline ResultTable run_matching_eval(const ExperimentConfig& cfg, ArtifactSink* sink = nullptr) {
  validate(cfg);
  if (cfg.partiality_levels.empty()) throw ConfigError("partiality_levels must not be empty");
  const std::string hash = config_hash(cfg);
  const Graph g = load_graph(cfg.graph);
  std::size_t need1 = detail::max_k(cfg, g.num_nodes());
  if (cfg.estimation.enabled && cfg.estimation.zoomout_k_max) need1 = std::max(need1, *cfg.estimation.zoomout_k_max);
  if (cfg.estimation.enabled && cfg.estimation.zoomout) need1 = std::max(need1, std::min(2 * need1, g.num_nodes()));
  const Eigenbasis full1 = eigendecompose(g, std::min(need1, g.num_nodes()), cfg.laplacian);
  ArtifactSink discard;
  ArtifactSink& out = sink ? *sink : discard;

  return detail::run_per_seed(cfg, hash, [&](std::uint64_t seed) {
    ResultTable t(hash);
    const std::string s = std::to_string(seed);
    for (double level : cfg.partiality_levels) {
      const Subgraph sub = make_subgraph(cfg, g, level, seed);
      const std::size_t n2 = sub.graph.num_nodes();
      std::size_t need2 = std::min(detail::max_k(cfg, n2), n2);
      if (cfg.estimation.enabled) need2 = std::min(n2, std::max(need2, full1.k()));
      const Eigenbasis full2 = eigendecompose(sub.graph, need2, cfg.laplacian);
      const std::string lv = "level=" + detail::fmt_fraction(level);

      for (const auto& kspec : cfg.k_spec) {
        const std::size_t k1 = kspec.resolve(g.num_nodes());
        const std::size_t k2 = kspec.resolve(n2);
        const Eigenbasis b1 = full1.truncated(k1);
        const Eigenbasis b2 = full2.truncated(k2);
        const std::string par = lv + ";k=" + kspec.str();
        const SpectralMap c = compute_spectral_map(sub.to_parent, b1, b2);
        if (cfg.dump_matrices) out.map("seed" + s + "_" + lv + "_k" + kspec.str(), c);
        t.append("matching-eval", par, "map", mean_average_precision(recover_node_map(c, b1, b2), sub.to_parent), s);

        if (!cfg.estimation.enabled) continue;
        Rng rng(detail::derive_seed(seed, detail::kLandmarks));
        const auto order = random_permutation(n2, rng);
        std::vector<std::pair<NodeIndex, NodeIndex>> landmarks;
        for (std::size_t i = 0; i < std::min(cfg.estimation.landmarks, n2); ++i) {
          landmarks.emplace_back(sub.to_parent[order[i]], order[i]);
        }
        const auto [f1, f2] = landmark_descriptors(landmarks, b1, b2);
        RegularizerConfig reg{cfg.estimation.mu_mask, cfg.estimation.mu_orth, cfg.estimation.mask_width};
        const MapEstimate report = estimate_map_report(f1, f2, b1, b2, reg);
        const SpectralMap& est = report.map;
        t.append("matching-eval", par, "mask_width", report.mask_width, s);
        t.append("matching-eval", par, "relative_error",
                 (est.matrix() - c.matrix()).norm() / std::max(c.matrix().norm(), 1e-300), s);
        t.append("matching-eval", par, "map_estimated",
                 mean_average_precision(recover_node_map(est, b1, b2), sub.to_parent), s);
        if (!cfg.estimation.zoomout) continue;
        const std::size_t cap = std::min(full1.k(), full2.k());
        const std::size_t kz = std::min(cfg.estimation.zoomout_k_max.value_or(2 * std::max(k1, k2)), cap);
        if (kz <= std::max(k1, k2)) continue;
        const SpectralMap refined = zoomout_refine(est, full1, full2, cfg.estimation.zoomout_step, kz);
        t.append("matching-eval", par, "map_refined",
                 mean_average_precision(recover_node_map(refined, full1, full2), sub.to_parent), s);
      }
    }
    return t;
  });
}

/// Writes results.csv and config.snapshot.json (plus dumps) into `dir`.
inline void write_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg, const ResultTable& table) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "results.csv");
    table.write_csv(out);
  }
  std::ofstream snap(dir / "config.snapshot.json");
  snap << json{{"config", to_json(cfg)}, {"config_hash", config_hash(cfg)}}.dump(2) << '\n';
}

}  // namespace specmap::experiments
