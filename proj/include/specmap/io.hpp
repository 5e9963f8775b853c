#pragma once

#include <nlohmann/json.hpp>

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "specmap/fmap.hpp"
#include "specmap/graph.hpp"
#include "specmap/matching.hpp"
#include "specmap/rewire.hpp"
#include "specmap/spectral.hpp"

namespace specmap::io {

static_assert(std::endian::native == std::endian::little, "binary container assumes a little-endian host");

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Binary container
//
//   offset  size  field
//   0       4     magic "SPMC"
//   4       4     u32 version (1)
//   8       4     u32 payload: 1 = eigenbasis, 2 = spectral map
//   12      4     u32 reserved (0)
//
// Eigenbasis payload:  u64 n, u64 k, u32 kind, u32 0, f64 lambda[k],
//                      f64 phi[n*k] column-major.
// Spectral map payload: u64 k2, u64 k1, u32 source, u32 0,
//                      basis1 {u64 n, u64 k, u32 kind, u32 0}, basis2 {same},
//                      f64 C[k2*k1] column-major.
// All integers and doubles are little-endian.
// ---------------------------------------------------------------------------

inline constexpr char kMagic[4] = {'S', 'P', 'M', 'C'};
inline constexpr std::uint32_t kVersion = 1;
enum class Payload : std::uint32_t { eigenbasis = 1, spectral_map = 2 };

namespace detail {

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw ParseError("binary container truncated", 0);
  return v;
}

inline void put_doubles(std::ostream& out, const double* p, std::size_t count) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(count * sizeof(double)));
}

inline void get_doubles(std::istream& in, double* p, std::size_t count) {
  in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw ParseError("binary container truncated", 0);
}

inline void put_header(std::ostream& out, Payload payload) {
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(payload));
  put<std::uint32_t>(out, 0);
}

inline void expect_header(std::istream& in, Payload payload) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != std::string(kMagic, 4)) throw ParseError("not a specmap binary container", 0);
  if (get<std::uint32_t>(in) != kVersion) throw ParseError("unsupported container version", 0);
  if (get<std::uint32_t>(in) != static_cast<std::uint32_t>(payload)) throw ParseError("unexpected container payload", 0);
  get<std::uint32_t>(in);
}

inline LaplacianKind kind_from_u32(std::uint32_t v) {
  if (v > 1) throw ParseError("bad laplacian kind in container", 0);
  return static_cast<LaplacianKind>(v);
}

inline void put_meta(std::ostream& out, const BasisMeta& m) {
  put<std::uint64_t>(out, m.n);
  put<std::uint64_t>(out, m.k);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.kind));
  put<std::uint32_t>(out, 0);
}

inline BasisMeta get_meta(std::istream& in) {
  BasisMeta m;
  m.n = get<std::uint64_t>(in);
  m.k = get<std::uint64_t>(in);
  m.kind = kind_from_u32(get<std::uint32_t>(in));
  get<std::uint32_t>(in);
  return m;
}

}  // namespace detail

inline void write_binary(std::ostream& out, const Eigenbasis& b) {
  detail::put_header(out, Payload::eigenbasis);
  detail::put_meta(out, b.meta());
  detail::put_doubles(out, b.values().data(), b.k());
  detail::put_doubles(out, b.vectors().data(), b.n() * b.k());
}

inline Eigenbasis read_eigenbasis_binary(std::istream& in) {
  detail::expect_header(in, Payload::eigenbasis);
  const BasisMeta m = detail::get_meta(in);
  if (m.k > m.n || m.n > (std::uint64_t{1} << 32)) throw ParseError("implausible eigenbasis dimensions", 0);
  Eigen::VectorXd lambda(static_cast<Eigen::Index>(m.k));
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(m.n), static_cast<Eigen::Index>(m.k));
  detail::get_doubles(in, lambda.data(), m.k);
  detail::get_doubles(in, phi.data(), m.n * m.k);
  return Eigenbasis(std::move(phi), std::move(lambda), m.kind);
}

inline void write_binary(std::ostream& out, const SpectralMap& map) {
  detail::put_header(out, Payload::spectral_map);
  detail::put<std::uint64_t>(out, map.k2());
  detail::put<std::uint64_t>(out, map.k1());
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(map.source()));
  detail::put<std::uint32_t>(out, 0);
  detail::put_meta(out, map.basis1());
  detail::put_meta(out, map.basis2());
  detail::put_doubles(out, map.matrix().data(), map.k1() * map.k2());
}

inline SpectralMap read_spectral_map_binary(std::istream& in) {
  detail::expect_header(in, Payload::spectral_map);
  const auto k2 = detail::get<std::uint64_t>(in);
  const auto k1 = detail::get<std::uint64_t>(in);
  const auto src = detail::get<std::uint32_t>(in);
  detail::get<std::uint32_t>(in);
  if (src > 2) throw ParseError("bad map source in container", 0);
  const BasisMeta m1 = detail::get_meta(in);
  const BasisMeta m2 = detail::get_meta(in);
  if (k1 != m1.k || k2 != m2.k || k1 > (1u << 20) || k2 > (1u << 20)) throw ParseError("inconsistent map dimensions", 0);
  Eigen::MatrixXd c(static_cast<Eigen::Index>(k2), static_cast<Eigen::Index>(k1));
  detail::get_doubles(in, c.data(), k1 * k2);
  return SpectralMap(std::move(c), m1, m2, static_cast<MapSource>(src));
}

template <class T>
void save_binary(const std::string& path, const T& value) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  write_binary(out, value);
}

inline Eigenbasis load_eigenbasis(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_eigenbasis_binary(in);
}

inline SpectralMap load_spectral_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_spectral_map_binary(in);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Debug dump: a comment line, an "eigenvalue" row, then one row per node.
inline void write_csv(std::ostream& out, const Eigenbasis& b, const Graph* g = nullptr) {
  out << "# n=" << b.n() << ",k=" << b.k() << ",kind=" << to_string(b.kind()) << '\n';
  out << "eigenvalue";
  for (Eigen::Index j = 0; j < b.values().size(); ++j) out << ',' << format_double(b.values()(j));
  out << '\n';
  for (Eigen::Index i = 0; i < b.vectors().rows(); ++i) {
    out << (g ? g->id(static_cast<NodeIndex>(i)) : std::to_string(i));
    for (Eigen::Index j = 0; j < b.vectors().cols(); ++j) out << ',' << format_double(b.vectors()(i, j));
    out << '\n';
  }
}

/// Header line "k2=..,k1=..,source=..,n1=..,n2=..,kind1=..,kind2=.." then
/// k2 rows of k1 values.
inline void write_csv(std::ostream& out, const SpectralMap& map) {
  out << "k2=" << map.k2() << ",k1=" << map.k1() << ",source=" << to_string(map.source()) << ",n1=" << map.basis1().n
      << ",n2=" << map.basis2().n << ",kind1=" << to_string(map.basis1().kind)
      << ",kind2=" << to_string(map.basis2().kind) << '\n';
  const Eigen::MatrixXd& c = map.matrix();
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      if (j) out << ',';
      out << format_double(c(i, j));
    }
    out << '\n';
  }
}

inline SpectralMap read_spectral_map_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty map CSV", 1);
  std::map<std::string, std::string> hdr;
  {
    std::istringstream hs(line);
    std::string field;
    while (std::getline(hs, field, ',')) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) throw ParseError("bad header field '" + field + "'", 1);
      hdr[field.substr(0, eq)] = field.substr(eq + 1);
    }
  }
  BasisMeta m1, m2;
  MapSource src;
  try {
    m2.k = std::stoul(hdr.at("k2"));
    m1.k = std::stoul(hdr.at("k1"));
    src = parse_map_source(hdr.at("source"));
    m1.n = hdr.count("n1") ? std::stoul(hdr.at("n1")) : 0;
    m2.n = hdr.count("n2") ? std::stoul(hdr.at("n2")) : 0;
    if (hdr.count("kind1")) m1.kind = parse_laplacian_kind(hdr.at("kind1"));
    if (hdr.count("kind2")) m2.kind = parse_laplacian_kind(hdr.at("kind2"));
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad map CSV header: ") + e.what(), 1);
  }
  Eigen::MatrixXd c(static_cast<Eigen::Index>(m2.k), static_cast<Eigen::Index>(m1.k));
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    if (!std::getline(in, line)) throw ParseError("map CSV has too few rows", static_cast<std::size_t>(i) + 2);
    std::istringstream rs(line);
    std::string cell;
    Eigen::Index j = 0;
    while (std::getline(rs, cell, ',')) {
      if (j >= c.cols()) throw ParseError("map CSV row too long", static_cast<std::size_t>(i) + 2);
      try {
        c(i, j++) = std::stod(cell);
      } catch (const std::exception&) {
        throw ParseError("bad number '" + cell + "'", static_cast<std::size_t>(i) + 2);
      }
    }
    if (j != c.cols()) throw ParseError("map CSV row too short", static_cast<std::size_t>(i) + 2);
  }
  return SpectralMap(std::move(c), m1, m2, src);
}

/// query_node,rank,candidate,distance; `top` limits rows per query (0 = all).
inline void write_candidates_csv(std::ostream& out, const CandidateRanking& ranking, const Graph& g1, const Graph& g2,
                                 std::size_t top = 0) {
  out << "query_node,rank,candidate,distance\n";
  for (std::size_t y = 0; y < ranking.size(); ++y) {
    const std::size_t limit = top ? std::min(top, ranking[y].size()) : ranking[y].size();
    for (std::size_t r = 0; r < limit; ++r) {
      out << g2.id(y) << ',' << r + 1 << ',' << g1.id(ranking[y][r].node) << ','
          << format_double(ranking[y][r].distance) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Perturbation records (JSON)
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const PerturbationRecord& rec, const Graph& g) {
  auto edges = [&](const std::vector<Edge>& es) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Edge& e : es) arr.push_back({g.id(e.u), g.id(e.v)});
    return arr;
  };
  return {{"removed", edges(rec.removed)}, {"added", edges(rec.added)}, {"fraction", rec.fraction}};
}

inline PerturbationRecord perturbation_from_json(const nlohmann::json& j, const Graph& g) {
  auto node = [&](const nlohmann::json& v) {
    return g.index_of(v.is_string() ? v.get<std::string>() : v.dump());
  };
  auto edges = [&](const nlohmann::json& arr) {
    std::vector<Edge> out;
    for (const auto& e : arr) {
      if (!e.is_array() || e.size() != 2) throw ParseError("perturbation edge must be a pair", 0);
      out.emplace_back(node(e[0]), node(e[1]));
    }
    return out;
  };
  try {
    return {edges(j.at("removed")), edges(j.at("added")), j.at("fraction").get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad perturbation record: ") + e.what(), 0);
  }
}

// ---------------------------------------------------------------------------
// Landmarks and labels
// ---------------------------------------------------------------------------

/// Lines "g1_node g2_node"; '#' comments.
inline std::vector<std::pair<NodeIndex, NodeIndex>> parse_landmarks(std::istream& in, const Graph& g1,
                                                                    const Graph& g2) {
  std::vector<std::pair<NodeIndex, NodeIndex>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string a, b, extra;
    if (!(ls >> a >> b) || (ls >> extra)) throw ParseError("expected 'g1_node g2_node'", lineno);
    auto x = g1.find(a);
    auto y = g2.find(b);
    if (!x) throw ParseError("unknown G1 node '" + a + "'", lineno);
    if (!y) throw ParseError("unknown G2 node '" + b + "'", lineno);
    out.emplace_back(*x, *y);
  }
  return out;
}

/// Lines "node label"; '#' comments.
inline std::map<NodeId, std::string> parse_labels(std::istream& in) {
  std::map<NodeId, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string node, label, extra;
    if (!(ls >> node >> label) || (ls >> extra)) throw ParseError("expected 'node label'", lineno);
    out[node] = label;
  }
  return out;
}

}  // namespace specmap::io
