#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "specmap/graph.hpp"
#include "specmap/random.hpp"
#include "specmap/subgraph.hpp"

namespace specmap {

/// Same-count edge rewiring: `removed` edges existed in the original graph,
/// `added` edges did not, and both lists have the same length.
struct PerturbationRecord {
  std::vector<Edge> removed;
  std::vector<Edge> added;
  double fraction = 0.0;
};

struct RewireResult {
  Graph graph;
  PerturbationRecord record;
};

namespace detail {

inline std::uint64_t edge_key(const Edge& e) { return (static_cast<std::uint64_t>(e.u) << 32) | e.v; }

}  // namespace detail

/// Number of edges touched on each side of a rewiring: round(fraction * m).
inline std::size_t rewire_count(double fraction, std::size_t num_edges) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(num_edges)));
}

/// Removes r = round(fraction * m) random edges and adds r random absent ones.
///
/// With `max_hop`, each added edge joins two nodes lying within `max_hop`
/// hops of the endpoints of one removed edge (measured in the original
/// graph). Absent edges are found by rejection sampling with at most 100 r
/// attempts.
inline RewireResult rewire(const Graph& g, double fraction, std::uint64_t rng_seed,
                           std::optional<std::size_t> max_hop = std::nullopt) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("rewire: fraction must lie in (0, 1]");
  const std::size_t n = g.num_nodes();
  const std::size_t m = g.num_edges();
  const std::size_t r = rewire_count(fraction, m);
  if (r < 1) throw InvalidArgument("rewire: fraction " + std::to_string(fraction) + " of " + std::to_string(m) +
                                   " edges rounds to zero");
  if (n > (std::size_t{1} << 32)) throw InvalidArgument("rewire: graph too large");
  const std::size_t absent = n * (n - 1) / 2 - m;
  if (absent < r) {
    throw InvalidArgument("rewire: insufficient absent edges (" + std::to_string(absent) + ") to add " +
                          std::to_string(r));
  }

  Rng rng(rng_seed);
  std::vector<Edge> all = g.edges();
  // Partial Fisher-Yates: the last r slots become the removed sample.
  for (std::size_t i = 0; i < r; ++i) {
    const std::size_t last = all.size() - 1 - i;
    std::swap(all[last], all[uniform_index(rng, last + 1)]);
  }
  PerturbationRecord rec;
  rec.fraction = fraction;
  rec.removed.assign(all.end() - static_cast<std::ptrdiff_t>(r), all.end());
  all.resize(all.size() - r);

  std::unordered_set<std::uint64_t> taken;
  auto try_add = [&](NodeIndex a, NodeIndex b) {
    if (a == b || g.has_edge(a, b)) return false;
    Edge e(a, b);
    if (!taken.insert(detail::edge_key(e)).second) return false;
    rec.added.push_back(e);
    return true;
  };

  const std::size_t budget = 100 * r;
  std::size_t attempts = 0;
  if (!max_hop) {
    while (rec.added.size() < r && attempts < budget) {
      ++attempts;
      try_add(uniform_index(rng, n), uniform_index(rng, n));
    }
  } else {
    for (std::size_t i = 0; i < r && attempts < budget; ++i) {
      const Edge& gone = rec.removed[i];
      std::vector<NodeIndex> ball;
      for (NodeIndex end : {gone.u, gone.v}) {
        for (const auto& layer : bfs_layers(g, end, n, *max_hop)) ball.insert(ball.end(), layer.begin(), layer.end());
      }
      std::sort(ball.begin(), ball.end());
      ball.erase(std::unique(ball.begin(), ball.end()), ball.end());
      bool done = false;
      while (!done && attempts < budget) {
        ++attempts;
        done = try_add(ball[uniform_index(rng, ball.size())], ball[uniform_index(rng, ball.size())]);
      }
    }
  }
  if (rec.added.size() < r) {
    throw NumericalError("rewire: could not find " + std::to_string(r) + " absent edges within " +
                         std::to_string(budget) + " attempts");
  }

  all.insert(all.end(), rec.added.begin(), rec.added.end());
  return {Graph(g.node_ids(), all), std::move(rec)};
}

/// (|E - E'| + |E' - E|) / |E| for two graphs on the same node set.
inline double edit_fraction(const Graph& g, const Graph& g2) {
  if (g.num_nodes() != g2.num_nodes()) throw InvalidArgument("edit_fraction: node sets differ");
  std::vector<NodeIndex> to_g(g2.num_nodes());
  for (NodeIndex i = 0; i < g2.num_nodes(); ++i) {
    auto j = g.find(g2.id(i));
    if (!j) throw InvalidArgument("edit_fraction: node sets differ ('" + g2.id(i) + "')");
    to_g[i] = *j;
  }
  if (g.num_edges() == 0) throw InvalidArgument("edit_fraction: reference graph has no edges");

  std::size_t common = 0;
  for (const Edge& e : g2.edges()) {
    if (g.has_edge(to_g[e.u], to_g[e.v])) ++common;
  }
  const std::size_t diff = (g.num_edges() - common) + (g2.num_edges() - common);
  return static_cast<double>(diff) / static_cast<double>(g.num_edges());
}

/// Relabels nodes so that new node i is old node `perm[i]`.
inline Subgraph permute_graph(const Graph& g, std::span<const NodeIndex> perm) {
  const std::size_t n = g.num_nodes();
  if (perm.size() != n) throw DimensionMismatch("permute_graph: permutation length differs from node count");
  std::vector<NodeIndex> inv(n, n);
  for (NodeIndex i = 0; i < n; ++i) {
    if (perm[i] >= n || inv[perm[i]] != n) throw InvalidArgument("permute_graph: not a permutation");
    inv[perm[i]] = i;
  }
  std::vector<NodeId> ids(n);
  for (NodeIndex i = 0; i < n; ++i) ids[i] = g.id(perm[i]);
  std::vector<Edge> es;
  es.reserve(g.num_edges());
  for (const Edge& e : g.edges()) es.emplace_back(inv[e.u], inv[e.v]);
  return {Graph(std::move(ids), es), NodeCorrespondence(n, std::vector<NodeIndex>(perm.begin(), perm.end()))};
}

/// Uniformly random relabeling; the correspondence maps new nodes to old.
inline Subgraph permute_graph(const Graph& g, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  const auto perm = random_permutation(g.num_nodes(), rng);
  return permute_graph(g, std::span<const NodeIndex>(perm));
}

}  // namespace specmap
