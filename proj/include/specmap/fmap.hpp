#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "specmap/graph.hpp"
#include "specmap/random.hpp"
#include "specmap/spectral.hpp"

namespace specmap {

/// Node-indexed signals, one function per column.
using SignalMatrix = Eigen::MatrixXd;

enum class MapSource { ground_truth, estimated, refined };

inline const char* to_string(MapSource s) {
  switch (s) {
    case MapSource::ground_truth: return "ground_truth";
    case MapSource::estimated: return "estimated";
    case MapSource::refined: return "refined";
  }
  return "?";
}

inline MapSource parse_map_source(const std::string& s) {
  if (s == "ground_truth") return MapSource::ground_truth;
  if (s == "estimated") return MapSource::estimated;
  if (s == "refined") return MapSource::refined;
  throw InvalidArgument("unknown map source '" + s + "'");
}

/// k2 x k1 matrix taking Phi1-coefficients of a signal on G1 to
/// Phi2-coefficients on G2.
class SpectralMap {
 public:
  SpectralMap() = default;
  SpectralMap(Eigen::MatrixXd c, BasisMeta basis1, BasisMeta basis2, MapSource source)
      : c_(std::move(c)), b1_(basis1), b2_(basis2), source_(source) {
    if (static_cast<std::size_t>(c_.rows()) != b2_.k || static_cast<std::size_t>(c_.cols()) != b1_.k) {
      throw DimensionMismatch("spectral map: matrix is " + std::to_string(c_.rows()) + "x" +
                              std::to_string(c_.cols()) + " but bases have k2=" + std::to_string(b2_.k) +
                              ", k1=" + std::to_string(b1_.k));
    }
  }

  const Eigen::MatrixXd& matrix() const noexcept { return c_; }
  const BasisMeta& basis1() const noexcept { return b1_; }
  const BasisMeta& basis2() const noexcept { return b2_; }
  MapSource source() const noexcept { return source_; }
  std::size_t k1() const noexcept { return b1_.k; }
  std::size_t k2() const noexcept { return b2_.k; }

  /// Leading k2 x k1 block; the bases' metadata are truncated to match.
  SpectralMap truncated(std::size_t k2, std::size_t k1) const {
    if (k1 < 1 || k2 < 1 || k1 > this->k1() || k2 > this->k2()) throw InvalidArgument("spectral map: bad truncation");
    BasisMeta m1 = b1_, m2 = b2_;
    m1.k = k1;
    m2.k = k2;
    return SpectralMap(c_.topLeftCorner(static_cast<Eigen::Index>(k2), static_cast<Eigen::Index>(k1)), m1, m2, source_);
  }

 private:
  Eigen::MatrixXd c_;
  BasisMeta b1_;
  BasisMeta b2_;
  MapSource source_ = MapSource::ground_truth;
};

namespace detail {

inline void check_bases(const SpectralMap& map, const Eigenbasis& b1, const Eigenbasis& b2, const char* who) {
  if (!(map.basis1() == b1.meta()) || !(map.basis2() == b2.meta())) {
    throw DimensionMismatch(std::string(who) + ": bases do not match the map provenance");
  }
}

/// Phi2^T S Phi1 for S given by `source_of[y]` (not necessarily injective).
inline Eigen::MatrixXd pullback_product(std::span<const NodeIndex> source_of, const Eigenbasis& b1,
                                        const Eigenbasis& b2) {
  if (source_of.size() != b2.n()) throw DimensionMismatch("spectral map: correspondence size does not match G2");
  // S Phi1 gathers the rows of Phi1 at the matched nodes.
  Eigen::MatrixXd gathered(static_cast<Eigen::Index>(source_of.size()), static_cast<Eigen::Index>(b1.k()));
  for (std::size_t y = 0; y < source_of.size(); ++y) {
    if (source_of[y] >= b1.n()) throw DimensionMismatch("spectral map: correspondence size does not match G1");
    gathered.row(static_cast<Eigen::Index>(y)) = b1.vectors().row(static_cast<Eigen::Index>(source_of[y]));
  }
  return b2.vectors().transpose() * gathered;
}

}  // namespace detail

/// C = Phi2^T S Phi1.
inline SpectralMap compute_spectral_map(const NodeCorrespondence& s, const Eigenbasis& b1, const Eigenbasis& b2) {
  if (s.n1() != b1.n() || s.n2() != b2.n()) {
    throw DimensionMismatch("compute_spectral_map: correspondence is " + std::to_string(s.n1()) + "->" +
                            std::to_string(s.n2()) + " but bases have n1=" + std::to_string(b1.n()) +
                            ", n2=" + std::to_string(b2.n()));
  }
  return SpectralMap(detail::pullback_product(s.sources(), b1, b2), b1.meta(), b2.meta(), MapSource::ground_truth);
}

/// Map induced by an arbitrary pointwise map G2 -> G1 (e.g. a nearest
/// neighbour assignment, which need not be injective).
inline SpectralMap spectral_map_from_pointwise(std::span<const NodeIndex> source_of, const Eigenbasis& b1,
                                               const Eigenbasis& b2, MapSource source) {
  return SpectralMap(detail::pullback_product(source_of, b1, b2), b1.meta(), b2.meta(), source);
}

/// g_hat = Phi2 C Phi1^T f.
inline SignalMatrix transfer_signal(const SpectralMap& map, const Eigenbasis& b1, const Eigenbasis& b2,
                                   const SignalMatrix& f) {
  detail::check_bases(map, b1, b2, "transfer_signal");
  if (static_cast<std::size_t>(f.rows()) != b1.n()) throw DimensionMismatch("transfer_signal: signal rows differ from n1");
  const Eigen::MatrixXd coeffs = b1.vectors().transpose() * f;
  return b2.vectors() * (map.matrix() * coeffs);
}

/// Standardizes every column to mean 0 and population standard deviation 1.
/// Constant columns become zero.
inline SignalMatrix normalize_signal(const SignalMatrix& f) {
  if (f.rows() < 2) throw InvalidArgument("normalize_signal: need at least two nodes");
  SignalMatrix out(f.rows(), f.cols());
  const double n = static_cast<double>(f.rows());
  for (Eigen::Index c = 0; c < f.cols(); ++c) {
    const double mean = f.col(c).mean();
    const Eigen::VectorXd centered = f.col(c).array() - mean;
    const double sd = std::sqrt(centered.squaredNorm() / n);
    const double scale = std::max(1.0, f.col(c).cwiseAbs().maxCoeff());
    if (sd <= 1e-14 * scale) {
      out.col(c).setZero();
    } else {
      out.col(c) = centered / sd;
    }
  }
  return out;
}

/// sqrt(mean of squared entry differences).
inline double rmse(const SignalMatrix& g, const SignalMatrix& g_hat) {
  if (g.rows() != g_hat.rows() || g.cols() != g_hat.cols()) throw DimensionMismatch("rmse: shapes differ");
  if (g.size() == 0) throw InvalidArgument("rmse: empty signal");
  return std::sqrt((g - g_hat).squaredNorm() / static_cast<double>(g.size()));
}

struct MapDistanceOptions {
  /// When set, rows of C' inside each eigenvalue block (pairs [first, last)
  /// of basis-2 indices) are aligned by orthogonal Procrustes instead of
  /// per-row signs.
  std::vector<std::pair<std::size_t, std::size_t>> procrustes_blocks;
};

/// Sign-aligned copy of `other`: each row is flipped when that lowers the
/// distance to `ref`, i.e. when its dot product with the row of `ref` is
/// negative.
inline Eigen::MatrixXd align_row_signs(const Eigen::MatrixXd& ref, const Eigen::MatrixXd& other) {
  Eigen::MatrixXd out = other;
  for (Eigen::Index r = 0; r < ref.rows(); ++r) {
    if (ref.row(r).dot(other.row(r)) < 0.0) out.row(r) *= -1.0;
  }
  return out;
}

/// min over row signs s of ||C - diag(s) C'||_F^2, optionally with
/// Procrustes alignment inside eigenvalue blocks.
inline double map_distance(const Eigen::MatrixXd& c, const Eigen::MatrixXd& c2, const MapDistanceOptions& opt = {}) {
  if (c.rows() != c2.rows() || c.cols() != c2.cols()) throw DimensionMismatch("map_distance: shapes differ");
  Eigen::MatrixXd aligned = align_row_signs(c, c2);
  for (const auto& [first, last] : opt.procrustes_blocks) {
    if (last > static_cast<std::size_t>(c.rows()) || first >= last) throw InvalidArgument("map_distance: bad block");
    const auto f = static_cast<Eigen::Index>(first);
    const auto len = static_cast<Eigen::Index>(last - first);
    const Eigen::MatrixXd a = c.middleRows(f, len);
    const Eigen::MatrixXd b = c2.middleRows(f, len);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a * b.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::MatrixXd rot = svd.matrixU() * svd.matrixV().transpose();
    aligned.middleRows(f, len) = rot * b;
  }
  return (c - aligned).squaredNorm();
}

inline double map_distance(const SpectralMap& a, const SpectralMap& b, const MapDistanceOptions& opt = {}) {
  return map_distance(a.matrix(), b.matrix(), opt);
}

/// C + N(0, sigma^2) entrywise; deterministic per seed.
inline SpectralMap gaussian_noise_map(const SpectralMap& map, double sigma, std::uint64_t rng_seed) {
  if (!(sigma >= 0.0)) throw InvalidArgument("gaussian_noise_map: sigma must be >= 0");
  Rng rng(rng_seed);
  Eigen::MatrixXd c = map.matrix();
  if (sigma > 0.0) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      for (Eigen::Index i = 0; i < c.rows(); ++i) c(i, j) += sigma * standard_normal(rng);
    }
  }
  return SpectralMap(std::move(c), map.basis1(), map.basis2(), map.source());
}

enum class LossNorm {
  frobenius,     ///< ||R||_F
  mean_squared,  ///< ||R||_F^2 / number of entries
};

/// Feature alignment loss between teacher features on G1 and student
/// features on G2: ||C Phi1^T x_t - Phi2^T x_s||.
inline double distillation_loss(const SpectralMap& map, const Eigenbasis& b1, const Eigenbasis& b2,
                                const SignalMatrix& x_t, const SignalMatrix& x_s,
                                LossNorm norm = LossNorm::frobenius) {
  detail::check_bases(map, b1, b2, "distillation_loss");
  if (static_cast<std::size_t>(x_t.rows()) != b1.n() || static_cast<std::size_t>(x_s.rows()) != b2.n() ||
      x_t.cols() != x_s.cols()) {
    throw DimensionMismatch("distillation_loss: feature shapes do not match the bases");
  }
  const Eigen::MatrixXd r = map.matrix() * (b1.vectors().transpose() * x_t) - b2.vectors().transpose() * x_s;
  if (norm == LossNorm::frobenius) return r.norm();
  return r.size() ? r.squaredNorm() / static_cast<double>(r.size()) : 0.0;
}

}  // namespace specmap
