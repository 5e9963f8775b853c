#pragma once

#include <algorithm>
#include <map>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "specmap/graph.hpp"
#include "specmap/random.hpp"

namespace specmap {

/// A subgraph together with the map from its nodes back to the parent.
struct Subgraph {
  Graph graph;
  NodeCorrespondence to_parent;
};

/// Induced subgraph on `keep` (kept in ascending parent index order).
inline Subgraph induced_subgraph(const Graph& g, std::vector<NodeIndex> keep) {
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  Graph sub = g.induced(keep);
  return {std::move(sub), NodeCorrespondence(g.num_nodes(), std::move(keep))};
}

/// Breadth-first layers from `seed`, each layer sorted by ascending index.
/// Stops once `limit` nodes have been collected (the last layer may overshoot).
inline std::vector<std::vector<NodeIndex>> bfs_layers(const Graph& g, NodeIndex seed, std::size_t limit,
                                                      std::size_t max_depth = static_cast<std::size_t>(-1)) {
  std::vector<char> seen(g.num_nodes(), 0);
  std::vector<std::vector<NodeIndex>> layers{{seed}};
  seen[seed] = 1;
  std::size_t count = 1;
  while (count < limit && layers.size() <= max_depth) {
    std::vector<NodeIndex> next;
    for (NodeIndex u : layers.back()) {
      for (NodeIndex v : g.neighbors(u)) {
        if (!seen[v]) {
          seen[v] = 1;
          next.push_back(v);
        }
      }
    }
    if (next.empty()) break;
    std::sort(next.begin(), next.end());
    count += next.size();
    layers.push_back(std::move(next));
  }
  return layers;
}

/// Patch partiality: the BFS ball around `seed` grown to exactly
/// `target_size` nodes. The outermost layer is truncated in ascending
/// node-index order.
inline Subgraph khop_subgraph(const Graph& g, NodeIndex seed, std::size_t target_size) {
  if (seed >= g.num_nodes()) throw InvalidArgument("khop_subgraph: unknown seed node");
  if (target_size < 1 || target_size > g.num_nodes()) {
    throw InvalidArgument("khop_subgraph: target size " + std::to_string(target_size) + " outside [1, " +
                          std::to_string(g.num_nodes()) + "]");
  }
  std::vector<NodeIndex> keep;
  keep.reserve(target_size);
  for (const auto& layer : bfs_layers(g, seed, target_size)) {
    for (NodeIndex v : layer) {
      if (keep.size() == target_size) break;
      keep.push_back(v);
    }
  }
  if (keep.size() < target_size) {
    throw InvalidArgument("khop_subgraph: component of seed '" + g.id(seed) + "' has only " +
                          std::to_string(keep.size()) + " nodes");
  }
  return induced_subgraph(g, std::move(keep));
}

inline Subgraph khop_subgraph(const Graph& g, const NodeId& seed, std::size_t target_size) {
  return khop_subgraph(g, g.index_of(seed), target_size);
}

/// Holes partiality: removes every center together with its 1-hop neighbors.
inline Subgraph holes_subgraph(const Graph& g, std::span<const NodeIndex> centers) {
  std::vector<char> removed(g.num_nodes(), 0);
  for (NodeIndex c : centers) {
    if (c >= g.num_nodes()) throw InvalidArgument("holes_subgraph: unknown center node");
    removed[c] = 1;
    for (NodeIndex v : g.neighbors(c)) removed[v] = 1;
  }
  std::vector<NodeIndex> keep;
  for (NodeIndex i = 0; i < g.num_nodes(); ++i) {
    if (!removed[i]) keep.push_back(i);
  }
  if (keep.empty()) throw InvalidArgument("holes_subgraph: removing the holes leaves an empty graph");
  return induced_subgraph(g, std::move(keep));
}

inline Subgraph holes_subgraph(const Graph& g, const std::vector<NodeIndex>& centers) {
  return holes_subgraph(g, std::span<const NodeIndex>(centers));
}

/// Punches random holes until at most `target_size` nodes survive. Centers
/// are drawn uniformly among surviving nodes.
inline Subgraph random_holes_subgraph(const Graph& g, std::size_t target_size, Rng& rng) {
  if (target_size < 1 || target_size > g.num_nodes()) throw InvalidArgument("random_holes_subgraph: bad target size");
  std::vector<char> removed(g.num_nodes(), 0);
  std::size_t alive = g.num_nodes();
  std::vector<NodeIndex> centers;
  while (alive > target_size) {
    std::vector<NodeIndex> pool;
    for (NodeIndex i = 0; i < g.num_nodes(); ++i) {
      if (!removed[i]) pool.push_back(i);
    }
    const NodeIndex c = pool[uniform_index(rng, pool.size())];
    centers.push_back(c);
    auto drop = [&](NodeIndex v) {
      if (!removed[v]) {
        removed[v] = 1;
        --alive;
      }
    };
    drop(c);
    for (NodeIndex v : g.neighbors(c)) drop(v);
  }
  return holes_subgraph(g, centers);
}

/// Connected components as lists of node indices; largest first, ties by
/// smallest member.
inline std::vector<std::vector<NodeIndex>> connected_components(const Graph& g) {
  std::vector<char> seen(g.num_nodes(), 0);
  std::vector<std::vector<NodeIndex>> comps;
  for (NodeIndex s = 0; s < g.num_nodes(); ++s) {
    if (seen[s]) continue;
    std::vector<NodeIndex> comp{s};
    seen[s] = 1;
    for (std::size_t head = 0; head < comp.size(); ++head) {
      for (NodeIndex v : g.neighbors(comp[head])) {
        if (!seen[v]) {
          seen[v] = 1;
          comp.push_back(v);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  std::stable_sort(comps.begin(), comps.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return comps;
}

inline bool is_connected(const Graph& g) { return g.num_nodes() > 0 && connected_components(g).size() == 1; }

/// Post-filter keeping only the largest connected component of `sub`.
/// The correspondence is re-expressed against the original parent.
inline Subgraph largest_component(const Subgraph& sub) {
  auto comps = connected_components(sub.graph);
  if (comps.size() <= 1) return sub;
  Subgraph inner = induced_subgraph(sub.graph, comps.front());
  return {std::move(inner.graph), sub.to_parent.compose(inner.to_parent)};
}

inline Subgraph largest_component(const Graph& g) {
  return largest_component(Subgraph{g, NodeCorrespondence::identity(g.num_nodes())});
}

/// Class-removal partiality: drops every node labelled `label`. Unlabelled
/// nodes are kept.
inline Subgraph class_subgraph(const Graph& g, const std::map<NodeId, std::string>& labels, const std::string& label) {
  std::vector<NodeIndex> keep;
  bool found = false;
  for (NodeIndex i = 0; i < g.num_nodes(); ++i) {
    auto it = labels.find(g.id(i));
    const bool drop = it != labels.end() && it->second == label;
    found = found || drop;
    if (!drop) keep.push_back(i);
  }
  if (!found) throw InvalidArgument("class_subgraph: no node carries label '" + label + "'");
  if (keep.empty()) throw InvalidArgument("class_subgraph: removing '" + label + "' leaves no nodes");
  return induced_subgraph(g, std::move(keep));
}

}  // namespace specmap
