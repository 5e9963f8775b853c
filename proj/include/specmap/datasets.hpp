#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "specmap/graph.hpp"
#include "specmap/random.hpp"

namespace specmap::datasets {

/// Zachary's karate club, 34 nodes and 78 edges, ids "0".."33".
inline Graph karate() {
  static constexpr std::array<std::pair<int, int>, 78> kEdges{{
      {0, 1},   {0, 2},   {0, 3},   {0, 4},   {0, 5},   {0, 6},   {0, 7},   {0, 8},   {0, 10},  {0, 11},
      {0, 12},  {0, 13},  {0, 17},  {0, 19},  {0, 21},  {0, 31},  {1, 2},   {1, 3},   {1, 7},   {1, 13},
      {1, 17},  {1, 19},  {1, 21},  {1, 30},  {2, 3},   {2, 7},   {2, 8},   {2, 9},   {2, 13},  {2, 27},
      {2, 28},  {2, 32},  {3, 7},   {3, 12},  {3, 13},  {4, 6},   {4, 10},  {5, 6},   {5, 10},  {5, 16},
      {6, 16},  {8, 30},  {8, 32},  {8, 33},  {9, 33},  {13, 33}, {14, 32}, {14, 33}, {15, 32}, {15, 33},
      {18, 32}, {18, 33}, {19, 33}, {20, 32}, {20, 33}, {22, 32}, {22, 33}, {23, 25}, {23, 27}, {23, 29},
      {23, 32}, {23, 33}, {24, 25}, {24, 27}, {24, 31}, {25, 31}, {26, 29}, {26, 33}, {27, 33}, {28, 31},
      {28, 33}, {29, 32}, {29, 33}, {30, 32}, {30, 33}, {31, 32}, {31, 33}, {32, 33},
  }};
  std::vector<Edge> es;
  es.reserve(kEdges.size());
  for (auto [u, v] : kEdges) es.emplace_back(static_cast<NodeIndex>(u), static_cast<NodeIndex>(v));
  return Graph::with_numeric_ids(34, es);
}

inline Graph path(std::size_t n) {
  std::vector<Edge> es;
  for (std::size_t i = 0; i + 1 < n; ++i) es.emplace_back(i, i + 1);
  return Graph::with_numeric_ids(n, es);
}

inline Graph cycle(std::size_t n) {
  std::vector<Edge> es;
  for (std::size_t i = 0; i < n; ++i) es.emplace_back(i, (i + 1) % n);
  return Graph::with_numeric_ids(n, es);
}

inline Graph complete(std::size_t n) {
  std::vector<Edge> es;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) es.emplace_back(i, j);
  }
  return Graph::with_numeric_ids(n, es);
}

/// Node 0 is the hub.
inline Graph star(std::size_t leaves) {
  std::vector<Edge> es;
  for (std::size_t i = 1; i <= leaves; ++i) es.emplace_back(0, i);
  return Graph::with_numeric_ids(leaves + 1, es);
}

inline Graph empty(std::size_t n) { return Graph::with_numeric_ids(n, std::vector<Edge>{}); }

/// rows x cols lattice, row-major ids.
inline Graph grid(std::size_t rows, std::size_t cols) {
  std::vector<Edge> es;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      if (c + 1 < cols) es.emplace_back(i, i + 1);
      if (r + 1 < rows) es.emplace_back(i, i + cols);
    }
  }
  return Graph::with_numeric_ids(rows * cols, es);
}

inline Graph erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> es;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (uniform_unit(rng) < p) es.emplace_back(i, j);
    }
  }
  return Graph::with_numeric_ids(n, es);
}

/// Points uniform in the unit square joined when closer than `radius`.
inline Graph random_geometric(std::size_t n, double radius, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::array<double, 2>> pts(n);
  for (auto& p : pts) p = {uniform_unit(rng), uniform_unit(rng)};
  const double r2 = radius * radius;
  std::vector<Edge> es;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = pts[i][0] - pts[j][0];
      const double dy = pts[i][1] - pts[j][1];
      if (dx * dx + dy * dy <= r2) es.emplace_back(i, j);
    }
  }
  return Graph::with_numeric_ids(n, es);
}

/// Planted partition: nodes assigned round-robin to `communities` blocks;
/// intra-block pairs linked with `p_in`, inter-block with `p_out`.
inline Graph planted_partition(std::size_t n, std::size_t communities, double p_in, double p_out, std::uint64_t seed) {
  if (communities == 0) throw InvalidArgument("planted_partition: need at least one community");
  Rng rng(seed);
  std::vector<Edge> es;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = (i % communities == j % communities) ? p_in : p_out;
      if (uniform_unit(rng) < p) es.emplace_back(i, j);
    }
  }
  return Graph::with_numeric_ids(n, es);
}

}  // namespace specmap::datasets
