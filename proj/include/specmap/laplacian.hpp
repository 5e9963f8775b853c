#pragma once

#include <Eigen/Sparse>

#include <cmath>
#include <string>
#include <vector>

#include "specmap/graph.hpp"

namespace specmap {

enum class LaplacianKind { normalized, combinatorial };

inline const char* to_string(LaplacianKind k) {
  return k == LaplacianKind::normalized ? "normalized" : "combinatorial";
}

inline LaplacianKind parse_laplacian_kind(const std::string& s) {
  if (s == "normalized") return LaplacianKind::normalized;
  if (s == "combinatorial") return LaplacianKind::combinatorial;
  throw InvalidArgument("unknown laplacian kind '" + s + "'");
}

/// I - D^{-1/2} A D^{-1/2}.
///
/// Degree-0 nodes get D^{-1/2}(i,i) = 0, so their row is the unit row e_i.
/// A warning is emitted when that happens.
inline Eigen::SparseMatrix<double> normalized_laplacian(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<double> inv_sqrt(n, 0.0);
  std::size_t isolated = 0;
  for (NodeIndex i = 0; i < n; ++i) {
    const auto d = g.degree(i);
    if (d == 0) {
      ++isolated;
    } else {
      inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(d));
    }
  }
  if (isolated > 0) {
    warn("normalized laplacian: " + std::to_string(isolated) + " isolated node(s); their rows are set to the unit row");
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(n + 2 * g.num_edges());
  for (NodeIndex i = 0; i < n; ++i) {
    trips.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
    for (NodeIndex j : g.neighbors(i)) {
      trips.emplace_back(static_cast<int>(i), static_cast<int>(j), -inv_sqrt[i] * inv_sqrt[j]);
    }
  }
  Eigen::SparseMatrix<double> l(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  l.setFromTriplets(trips.begin(), trips.end());
  return l;
}

/// D - A.
inline Eigen::SparseMatrix<double> combinatorial_laplacian(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(n + 2 * g.num_edges());
  for (NodeIndex i = 0; i < n; ++i) {
    if (g.degree(i) > 0) trips.emplace_back(static_cast<int>(i), static_cast<int>(i), static_cast<double>(g.degree(i)));
    for (NodeIndex j : g.neighbors(i)) trips.emplace_back(static_cast<int>(i), static_cast<int>(j), -1.0);
  }
  Eigen::SparseMatrix<double> l(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  l.setFromTriplets(trips.begin(), trips.end());
  return l;
}

inline Eigen::SparseMatrix<double> laplacian(const Graph& g, LaplacianKind kind) {
  return kind == LaplacianKind::normalized ? normalized_laplacian(g) : combinatorial_laplacian(g);
}

}  // namespace specmap
