#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "specmap/detail/parallel.hpp"
#include "specmap/fmap.hpp"
#include "specmap/graph.hpp"
#include "specmap/spectral.hpp"

namespace specmap {

enum class DescriptorKind { landmark_indicator, raw_feature };

/// m probe functions per graph; column j of F1 corresponds to column j of F2.
struct DescriptorSet {
  Eigen::MatrixXd values;
  DescriptorKind kind = DescriptorKind::landmark_indicator;
};

struct RegularizerConfig {
  double mu_mask = 0.0;
  double mu_orth = 0.0;
  /// Width of the slanted mask; unset means the mean eigenvalue gap of basis 1.
  std::optional<double> mask_width;
};

/// Phi Phi^T delta_landmark scaled to unit 2-norm: a smooth indicator
/// concentrated around the landmark.
inline Eigen::VectorXd band_limited_indicator(NodeIndex landmark, const Eigenbasis& b) {
  if (landmark >= b.n()) throw InvalidArgument("band_limited_indicator: unknown landmark");
  const Eigen::MatrixXd& phi = b.vectors();
  Eigen::VectorXd v = phi * phi.row(static_cast<Eigen::Index>(landmark)).transpose();
  const double norm = v.norm();
  if (norm <= 1e-300) throw NumericalError("band_limited_indicator: landmark has no support in the basis");
  return v / norm;
}

/// Paired smooth-indicator descriptors for landmark matches (x in G1, y in G2).
inline std::pair<DescriptorSet, DescriptorSet> landmark_descriptors(
    std::span<const std::pair<NodeIndex, NodeIndex>> landmarks, const Eigenbasis& b1, const Eigenbasis& b2) {
  if (landmarks.empty()) throw InvalidArgument("landmark_descriptors: no landmarks");
  const auto m = static_cast<Eigen::Index>(landmarks.size());
  DescriptorSet f1{Eigen::MatrixXd(static_cast<Eigen::Index>(b1.n()), m), DescriptorKind::landmark_indicator};
  DescriptorSet f2{Eigen::MatrixXd(static_cast<Eigen::Index>(b2.n()), m), DescriptorKind::landmark_indicator};
  for (Eigen::Index j = 0; j < m; ++j) {
    f1.values.col(j) = band_limited_indicator(landmarks[static_cast<std::size_t>(j)].first, b1);
    f2.values.col(j) = band_limited_indicator(landmarks[static_cast<std::size_t>(j)].second, b2);
  }
  return {std::move(f1), std::move(f2)};
}

/// Mean gap between consecutive eigenvalues; 1 when undefined.
inline double default_mask_width(const Eigenbasis& b) {
  if (b.k() < 2) return 1.0;
  const double gap = (b.values()(b.values().size() - 1) - b.values()(0)) / static_cast<double>(b.k() - 1);
  return gap > 0.0 ? gap : 1.0;
}

/// W(i, j) = 1 - exp(-(lambda2_i - lambda1_j)^2 / width^2): close to 0 where
/// the eigenvalues agree, close to 1 where they diverge.
inline Eigen::MatrixXd slanted_mask(const Eigenbasis& b1, const Eigenbasis& b2, double width) {
  if (!(width > 0.0) || !std::isfinite(width)) throw InvalidArgument("slanted_mask: width must be positive");
  Eigen::MatrixXd w(static_cast<Eigen::Index>(b2.k()), static_cast<Eigen::Index>(b1.k()));
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      const double d = (b2.values()(i) - b1.values()(j)) / width;
      w(i, j) = 1.0 - std::exp(-d * d);
    }
  }
  return w;
}

struct MapEstimate {
  SpectralMap map;
  double mask_width = 0.0;
  double objective = 0.0;
  int orth_iterations = 0;
};

namespace detail {

struct MapObjective {
  const Eigen::MatrixXd& a;  // k1 x m
  const Eigen::MatrixXd& b;  // k2 x m
  const Eigen::MatrixXd& w2;  // W .* W
  double mu_mask;
  double mu_orth;

  static Eigen::MatrixXd off_diagonal_gram(const Eigen::MatrixXd& c) {
    Eigen::MatrixXd g = c.transpose() * c;
    g.diagonal().setZero();
    return g;
  }

  double value(const Eigen::MatrixXd& c) const {
    double e = (c * a - b).squaredNorm();
    if (mu_mask > 0.0) e += mu_mask * (w2.array() * c.array().square()).sum();
    if (mu_orth > 0.0) e += mu_orth * off_diagonal_gram(c).squaredNorm();
    return e;
  }

  Eigen::MatrixXd gradient(const Eigen::MatrixXd& c) const {
    Eigen::MatrixXd g = 2.0 * (c * a - b) * a.transpose();
    if (mu_mask > 0.0) g.array() += 2.0 * mu_mask * w2.array() * c.array();
    if (mu_orth > 0.0) g += 4.0 * mu_orth * c * off_diagonal_gram(c);
    return g;
  }
};

}  // namespace detail

/// Least-squares map from corresponding descriptors:
///   argmin_C ||C Phi1^T F1 - Phi2^T F2||_F^2 + mu_mask ||C .* W||_F^2
///            + mu_orth sum_{l != h} (C^T C)_{lh}^2.
/// The first two terms are minimized exactly, one ridge system per row of C.
/// A positive mu_orth then runs gradient descent with backtracking from that
/// solution until the relative objective change drops below 1e-8 or 500
/// iterations pass.
inline MapEstimate estimate_map_report(const DescriptorSet& f1, const DescriptorSet& f2, const Eigenbasis& b1,
                                       const Eigenbasis& b2, const RegularizerConfig& reg = {}) {
  if (f1.values.cols() < 1 || f1.values.cols() != f2.values.cols()) {
    throw DimensionMismatch("estimate_map: descriptor sets need the same, non-zero, column count");
  }
  if (static_cast<std::size_t>(f1.values.rows()) != b1.n() || static_cast<std::size_t>(f2.values.rows()) != b2.n()) {
    throw DimensionMismatch("estimate_map: descriptor rows do not match the bases");
  }
  if (!f1.values.allFinite() || !f2.values.allFinite()) throw InvalidArgument("estimate_map: non-finite descriptor");
  if (!(reg.mu_mask >= 0.0) || !(reg.mu_orth >= 0.0)) throw InvalidArgument("estimate_map: negative weight");

  const Eigen::MatrixXd a = b1.vectors().transpose() * f1.values;
  const Eigen::MatrixXd b = b2.vectors().transpose() * f2.values;
  const double width = reg.mask_width.value_or(default_mask_width(b1));
  const Eigen::MatrixXd w = slanted_mask(b1, b2, width);
  const Eigen::MatrixXd w2 = w.array().square().matrix();

  const Eigen::MatrixXd gram = a * a.transpose();
  const Eigen::MatrixXd rhs = a * b.transpose();  // column i is A b_i
  const auto k1 = gram.rows();
  const double scale = std::max(gram.diagonal().maxCoeff(), 1e-300);
  const double cutoff = 1e-12 * scale;
  if (reg.mu_mask == 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) <= cutoff) {
      throw NumericalError("estimate_map: rank-deficient descriptor system (" + std::to_string(f1.values.cols()) +
                           " descriptors, k1=" + std::to_string(k1) + ") with zero regularization");
    }
  }
  // Row i solves (A A^T + mu diag(W_i .* W_i)) c_i = A b_i. Directions the
  // mask leaves unpenalized and the data do not reach get a zero coefficient.
  Eigen::MatrixXd c(b.rows(), k1);
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    Eigen::MatrixXd sys = gram;
    if (reg.mu_mask > 0.0) sys.diagonal() += reg.mu_mask * w2.row(i).transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sys);
    Eigen::VectorXd proj = es.eigenvectors().transpose() * rhs.col(i);
    for (Eigen::Index j = 0; j < k1; ++j) {
      proj(j) = es.eigenvalues()(j) > cutoff ? proj(j) / es.eigenvalues()(j) : 0.0;
    }
    c.row(i) = (es.eigenvectors() * proj).transpose();
  }

  detail::MapObjective obj{a, b, w2, reg.mu_mask, reg.mu_orth};
  double energy = obj.value(c);
  int iters = 0;
  if (reg.mu_orth > 0.0) {
    double step = 1.0 / std::max(2.0 * scale, 1e-12);
    for (; iters < 500; ++iters) {
      const Eigen::MatrixXd g = obj.gradient(c);
      const double g2 = g.squaredNorm();
      if (g2 == 0.0) break;
      double trial_e = energy;
      Eigen::MatrixXd trial;
      step *= 2.0;
      for (int bt = 0; bt < 60; ++bt) {
        trial = c - step * g;
        trial_e = obj.value(trial);
        if (trial_e <= energy - 1e-4 * step * g2) break;
        step *= 0.5;
      }
      if (!(trial_e < energy)) break;
      const double change = (energy - trial_e) / std::max(energy, 1e-300);
      c = std::move(trial);
      energy = trial_e;
      if (change < 1e-8) {
        ++iters;
        break;
      }
    }
  }
  return {SpectralMap(std::move(c), b1.meta(), b2.meta(), MapSource::estimated), width, energy, iters};
}

inline SpectralMap estimate_map(const DescriptorSet& f1, const DescriptorSet& f2, const Eigenbasis& b1,
                                const Eigenbasis& b2, const RegularizerConfig& reg = {}) {
  return estimate_map_report(f1, f2, b1, b2, reg).map;
}

/// Objective value of `c` under the same terms `estimate_map` minimizes.
inline double map_objective(const Eigen::MatrixXd& c, const DescriptorSet& f1, const DescriptorSet& f2,
                            const Eigenbasis& b1, const Eigenbasis& b2, const RegularizerConfig& reg = {}) {
  const Eigen::MatrixXd a = b1.vectors().transpose() * f1.values;
  const Eigen::MatrixXd b = b2.vectors().transpose() * f2.values;
  const Eigen::MatrixXd w = slanted_mask(b1, b2, reg.mask_width.value_or(default_mask_width(b1)));
  const Eigen::MatrixXd w2 = w.array().square().matrix();
  return detail::MapObjective{a, b, w2, reg.mu_mask, reg.mu_orth}.value(c);
}

struct Candidate {
  NodeIndex node = 0;
  double distance = 0.0;
};

/// For each G2 node, every G1 node ordered by embedding distance.
using CandidateRanking = std::vector<std::vector<Candidate>>;

namespace detail {

inline void check_map_bases(const SpectralMap& map, const Eigenbasis& b1, const Eigenbasis& b2, const char* who) {
  if (map.basis1().n != b1.n() || map.basis2().n != b2.n() || map.k1() > b1.k() || map.k2() > b2.k() ||
      map.basis1().kind != b1.kind() || map.basis2().kind != b2.kind()) {
    throw DimensionMismatch(std::string(who) + ": bases do not match the map provenance");
  }
}

/// Rows are C Phi1(x, :)^T for every x in G1.
inline Eigen::MatrixXd pushed_embedding(const SpectralMap& map, const Eigenbasis& b1) {
  return b1.vectors().leftCols(static_cast<Eigen::Index>(map.k1())) * map.matrix().transpose();
}

}  // namespace detail

/// Ranks G1 nodes for every G2 node y by ||C Phi1(x,:)^T - Phi2(y,:)^T||_2,
/// ascending, ties broken by ascending G1 index. Uses the first k1/k2
/// columns of the bases.
inline CandidateRanking recover_node_map(const SpectralMap& map, const Eigenbasis& b1, const Eigenbasis& b2,
                                         std::size_t threads = 1) {
  detail::check_map_bases(map, b1, b2, "recover_node_map");
  const Eigen::MatrixXd e1 = detail::pushed_embedding(map, b1);
  const Eigen::MatrixXd e2 = b2.vectors().leftCols(static_cast<Eigen::Index>(map.k2()));
  CandidateRanking out(b2.n());
  detail::parallel_for(b2.n(), threads, [&](std::size_t y) {
    auto& list = out[y];
    list.resize(b1.n());
    const Eigen::RowVectorXd q = e2.row(static_cast<Eigen::Index>(y));
    for (NodeIndex x = 0; x < b1.n(); ++x) {
      list[x] = {x, (e1.row(static_cast<Eigen::Index>(x)) - q).norm()};
    }
    std::sort(list.begin(), list.end(), [](const Candidate& l, const Candidate& r) {
      return l.distance < r.distance || (l.distance == r.distance && l.node < r.node);
    });
  });
  return out;
}

/// Top-1 of `recover_node_map` without materializing the rankings.
inline std::vector<NodeIndex> nearest_node_map(const SpectralMap& map, const Eigenbasis& b1, const Eigenbasis& b2) {
  detail::check_map_bases(map, b1, b2, "nearest_node_map");
  const Eigen::MatrixXd e1 = detail::pushed_embedding(map, b1);
  const Eigen::MatrixXd e2 = b2.vectors().leftCols(static_cast<Eigen::Index>(map.k2()));
  std::vector<NodeIndex> nn(b2.n());
  for (std::size_t y = 0; y < b2.n(); ++y) {
    const Eigen::RowVectorXd q = e2.row(static_cast<Eigen::Index>(y));
    double best = std::numeric_limits<double>::infinity();
    for (NodeIndex x = 0; x < b1.n(); ++x) {
      const double d = (e1.row(static_cast<Eigen::Index>(x)) - q).norm();
      if (d < best) {
        best = d;
        nn[y] = x;
      }
    }
  }
  return nn;
}

/// ZoomOut: alternately extract the nearest-neighbour node map and rebuild
/// C with `step` more eigenvectors, until both sides reach `k_max`.
inline SpectralMap zoomout_refine(const SpectralMap& map, const Eigenbasis& b1, const Eigenbasis& b2, std::size_t step,
                                  std::size_t k_max) {
  detail::check_map_bases(map, b1, b2, "zoomout_refine");
  if (step < 1) throw InvalidArgument("zoomout_refine: step must be >= 1");
  if (k_max > std::min(b1.k(), b2.k())) throw InvalidArgument("zoomout_refine: k_max exceeds the bases");
  if (std::max(map.k1(), map.k2()) >= k_max) throw InvalidArgument("zoomout_refine: map is already at k_max");

  std::size_t k1 = map.k1(), k2 = map.k2();
  SpectralMap current = map;
  while (k1 < k_max || k2 < k_max) {
    const auto nn = nearest_node_map(current, b1, b2);
    k1 = std::min(k1 + step, k_max);
    k2 = std::min(k2 + step, k_max);
    current = spectral_map_from_pointwise(nn, b1.truncated(k1), b2.truncated(k2), MapSource::refined);
  }
  return current;
}

/// 1-based position of the true match in each candidate list.
inline std::vector<std::size_t> true_match_ranks(const CandidateRanking& candidates, const NodeCorrespondence& truth) {
  if (candidates.size() != truth.n2()) throw DimensionMismatch("MAP: candidate lists do not cover G2");
  std::vector<std::size_t> ranks(candidates.size());
  for (std::size_t y = 0; y < candidates.size(); ++y) {
    const auto& list = candidates[y];
    auto it = std::find_if(list.begin(), list.end(), [&](const Candidate& c) { return c.node == truth[y]; });
    if (it == list.end()) throw InvalidArgument("MAP: true match of node " + std::to_string(y) + " is not ranked");
    ranks[y] = static_cast<std::size_t>(it - list.begin()) + 1;
  }
  return ranks;
}

/// Mean reciprocal rank of the true matches.
inline double mean_average_precision(const CandidateRanking& candidates, const NodeCorrespondence& truth) {
  const auto ranks = true_match_ranks(candidates, truth);
  if (ranks.empty()) throw InvalidArgument("MAP: no query nodes");
  double sum = 0.0;
  for (std::size_t r : ranks) sum += 1.0 / static_cast<double>(r);
  return sum / static_cast<double>(ranks.size());
}

}  // namespace specmap
