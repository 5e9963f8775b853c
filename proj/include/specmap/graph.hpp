#pragma once

#include <Eigen/Sparse>

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "specmap/error.hpp"

namespace specmap {

using NodeId = std::string;
using NodeIndex = std::size_t;

/// Unordered edge stored with `u < v`.
struct Edge {
  NodeIndex u = 0;
  NodeIndex v = 0;

  Edge() = default;
  Edge(NodeIndex a, NodeIndex b) : u(std::min(a, b)), v(std::max(a, b)) {}

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Undirected, unweighted simple graph with stable node identifiers.
///
/// Nodes are addressed by a dense index in [0, n); the index order is the
/// order of `node_ids()`. Adjacency lists are kept sorted. Instances are
/// immutable after construction.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph from ids and index-pair edges. Duplicate (including
  /// reversed) edges are merged; self-loops and out-of-range endpoints throw.
  Graph(std::vector<NodeId> ids, std::span<const Edge> edges) : ids_(std::move(ids)), adj_(ids_.size()) {
    index_.reserve(ids_.size());
    for (NodeIndex i = 0; i < ids_.size(); ++i) {
      if (!index_.emplace(ids_[i], i).second) throw InvalidArgument("duplicate node id '" + ids_[i] + "'");
    }
    for (const Edge& e : edges) {
      if (e.u == e.v) throw InvalidArgument("self-loop on node '" + id_or_index(e.u) + "'");
      if (e.v >= ids_.size()) throw InvalidArgument("edge endpoint out of range");
      adj_[e.u].push_back(e.v);
      adj_[e.v].push_back(e.u);
    }
    for (auto& nb : adj_) {
      std::sort(nb.begin(), nb.end());
      nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
      num_edges_ += nb.size();
    }
    num_edges_ /= 2;
  }

  Graph(std::vector<NodeId> ids, const std::vector<Edge>& edges)
      : Graph(std::move(ids), std::span<const Edge>(edges)) {}

  /// Graph on n nodes labelled "0".."n-1".
  static Graph with_numeric_ids(std::size_t n, std::span<const Edge> edges) {
    std::vector<NodeId> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i);
    return Graph(std::move(ids), edges);
  }
  static Graph with_numeric_ids(std::size_t n, const std::vector<Edge>& edges) {
    return with_numeric_ids(n, std::span<const Edge>(edges));
  }

  std::size_t num_nodes() const noexcept { return ids_.size(); }
  std::size_t num_edges() const noexcept { return num_edges_; }

  const std::vector<NodeId>& node_ids() const noexcept { return ids_; }
  const NodeId& id(NodeIndex i) const { return ids_.at(i); }

  std::optional<NodeIndex> find(const NodeId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  NodeIndex index_of(const NodeId& id) const {
    auto i = find(id);
    if (!i) throw InvalidArgument("unknown node id '" + id + "'");
    return *i;
  }

  std::span<const NodeIndex> neighbors(NodeIndex i) const { return adj_.at(i); }
  std::size_t degree(NodeIndex i) const { return adj_.at(i).size(); }

  bool has_edge(NodeIndex a, NodeIndex b) const {
    const auto& nb = adj_.at(a);
    return std::binary_search(nb.begin(), nb.end(), b);
  }

  /// All edges with u < v, sorted lexicographically.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(num_edges_);
    for (NodeIndex u = 0; u < adj_.size(); ++u) {
      for (NodeIndex v : adj_[u]) {
        if (u < v) out.emplace_back(u, v);
      }
    }
    return out;
  }

  std::vector<std::size_t> degrees() const {
    std::vector<std::size_t> d(adj_.size());
    for (NodeIndex i = 0; i < adj_.size(); ++i) d[i] = adj_[i].size();
    return d;
  }

  Eigen::SparseMatrix<double> adjacency() const {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(2 * num_edges_);
    for (NodeIndex u = 0; u < adj_.size(); ++u) {
      for (NodeIndex v : adj_[u]) trips.emplace_back(static_cast<int>(u), static_cast<int>(v), 1.0);
    }
    const auto n = static_cast<Eigen::Index>(ids_.size());
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(trips.begin(), trips.end());
    return a;
  }

  /// Induced subgraph on `keep`, in the given order. Ids are carried over.
  Graph induced(std::span<const NodeIndex> keep) const {
    std::vector<std::ptrdiff_t> remap(ids_.size(), -1);
    std::vector<NodeId> ids;
    ids.reserve(keep.size());
    for (std::size_t j = 0; j < keep.size(); ++j) {
      if (keep[j] >= ids_.size()) throw InvalidArgument("induced: node index out of range");
      if (remap[keep[j]] >= 0) throw InvalidArgument("induced: repeated node index");
      remap[keep[j]] = static_cast<std::ptrdiff_t>(j);
      ids.push_back(ids_[keep[j]]);
    }
    std::vector<Edge> es;
    for (std::size_t j = 0; j < keep.size(); ++j) {
      for (NodeIndex v : adj_[keep[j]]) {
        if (remap[v] > static_cast<std::ptrdiff_t>(j)) es.emplace_back(j, static_cast<NodeIndex>(remap[v]));
      }
    }
    return Graph(std::move(ids), es);
  }

  friend bool operator==(const Graph& a, const Graph& b) { return a.ids_ == b.ids_ && a.adj_ == b.adj_; }

 private:
  std::string id_or_index(NodeIndex i) const { return i < ids_.size() ? ids_[i] : std::to_string(i); }

  std::vector<NodeId> ids_;
  std::vector<std::vector<NodeIndex>> adj_;
  std::unordered_map<NodeId, NodeIndex> index_;
  std::size_t num_edges_ = 0;
};

/// Partial injective map from the nodes of a graph G2 onto nodes of G1.
///
/// `source(y)` is the G1 node matched to G2 node `y`. As a matrix the map
/// is the n2 x n1 binary operator with S(y, x) = 1 iff y corresponds to x,
/// so that `S * f` pulls a signal on G1 back onto G2.
class NodeCorrespondence {
 public:
  NodeCorrespondence() = default;

  NodeCorrespondence(std::size_t n1, std::vector<NodeIndex> source_of) : n1_(n1), source_(std::move(source_of)) {
    std::vector<char> used(n1_, 0);
    for (NodeIndex x : source_) {
      if (x >= n1_) throw InvalidArgument("correspondence target out of range");
      if (used[x]) throw InvalidArgument("correspondence is not injective");
      used[x] = 1;
    }
  }

  static NodeCorrespondence identity(std::size_t n) {
    std::vector<NodeIndex> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = i;
    return NodeCorrespondence(n, std::move(s));
  }

  /// |V1|
  std::size_t n1() const noexcept { return n1_; }
  /// |V2|
  std::size_t n2() const noexcept { return source_.size(); }

  NodeIndex source(NodeIndex y) const { return source_.at(y); }
  NodeIndex operator[](NodeIndex y) const { return source_[y]; }
  const std::vector<NodeIndex>& sources() const noexcept { return source_; }

  /// n2 x n1 sparse binary matrix.
  Eigen::SparseMatrix<double> matrix() const {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(source_.size());
    for (NodeIndex y = 0; y < source_.size(); ++y) {
      trips.emplace_back(static_cast<int>(y), static_cast<int>(source_[y]), 1.0);
    }
    Eigen::SparseMatrix<double> s(static_cast<Eigen::Index>(n2()), static_cast<Eigen::Index>(n1_));
    s.setFromTriplets(trips.begin(), trips.end());
    return s;
  }

  /// Composition: `inner` maps G3 -> G2 and `*this` maps G2 -> G1.
  NodeCorrespondence compose(const NodeCorrespondence& inner) const {
    if (inner.n1() != n2()) throw DimensionMismatch("compose: inner target size does not match");
    std::vector<NodeIndex> s(inner.n2());
    for (NodeIndex z = 0; z < s.size(); ++z) s[z] = source_[inner[z]];
    return NodeCorrespondence(n1_, std::move(s));
  }

  /// Inverse of a bijection.
  NodeCorrespondence inverse() const {
    if (n1_ != n2()) throw InvalidArgument("inverse: correspondence is not a bijection");
    std::vector<NodeIndex> s(n1_);
    for (NodeIndex y = 0; y < source_.size(); ++y) s[source_[y]] = y;
    return NodeCorrespondence(n1_, std::move(s));
  }

  friend bool operator==(const NodeCorrespondence&, const NodeCorrespondence&) = default;

 private:
  std::size_t n1_ = 0;
  std::vector<NodeIndex> source_;
};

/// Parses whitespace separated "u v" lines. Blank lines and lines whose
/// first non-blank character is '#' are skipped. Node ids are ordered by
/// first appearance.
inline Graph parse_edge_list(std::istream& in) {
  std::vector<NodeId> ids;
  std::unordered_map<NodeId, NodeIndex> index;
  std::vector<Edge> edges;
  auto intern = [&](const std::string& s) {
    auto [it, fresh] = index.emplace(s, ids.size());
    if (fresh) ids.push_back(s);
    return it->second;
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string a, b, extra;
    if (!(ls >> a >> b)) throw ParseError("expected two node ids", lineno);
    if (ls >> extra) throw ParseError("unexpected trailing token '" + extra + "'", lineno);
    if (a == b) throw ParseError("self-loop on node '" + a + "'", lineno);
    NodeIndex u = intern(a);
    NodeIndex v = intern(b);
    edges.emplace_back(u, v);
  }
  if (ids.empty()) throw ParseError("edge list is empty", 0);
  return Graph(std::move(ids), edges);
}

inline Graph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open edge list '" + path + "'");
  return parse_edge_list(in);
}

inline void write_edge_list(std::ostream& out, const Graph& g) {
  for (const Edge& e : g.edges()) out << g.id(e.u) << ' ' << g.id(e.v) << '\n';
}

}  // namespace specmap
