#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>

#include "specmap/datasets.hpp"
#include "specmap/experiments.hpp"
#include "specmap/matching.hpp"
#include "specmap/rewire.hpp"
#include "specmap/subgraph.hpp"

using namespace specmap;

namespace {

double median(std::vector<double> v) { return experiments::ResultTable::median_of(std::move(v)); }

double relative_error(const Eigen::MatrixXd& est, const Eigen::MatrixXd& truth) {
  return (est - truth).norm() / truth.norm();
}

// First connected random graph from `seed` on whose full spectrum is simple.
Graph simple_spectrum_graph(std::size_t n, std::uint64_t seed) {
  for (;; ++seed) {
    const Graph g = datasets::erdos_renyi(n, 0.2, seed);
    if (is_connected(g) && eigendecompose(g, n).simple_spectrum()) return g;
  }
}

CandidateRanking ranking_from_orders(const std::vector<std::vector<NodeIndex>>& orders) {
  CandidateRanking r(orders.size());
  for (std::size_t y = 0; y < orders.size(); ++y) {
    for (std::size_t i = 0; i < orders[y].size(); ++i) r[y].push_back({orders[y][i], static_cast<double>(i)});
  }
  return r;
}

}  // namespace

TEST(Indicator, FullBasisIsDelta) {
  const Graph g = datasets::karate();
  const auto b = eigendecompose(g, 34);
  const auto v = band_limited_indicator(5, b);
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(34);
  delta(5) = 1.0;
  EXPECT_LT((v - delta).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Indicator, SingleTermHasConstantSign) {
  const auto b = eigendecompose(datasets::karate(), 1);
  const auto v = band_limited_indicator(7, b);
  EXPECT_TRUE((v.array() > 0).all() || (v.array() < 0).all());
  const Eigen::VectorXd expected = b.vectors().col(0) * b.vectors()(7, 0);
  EXPECT_LT((v - expected / expected.norm()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Indicator, KarateLandmarkConcentrates) {
  const auto b = eigendecompose(datasets::karate(), 10);
  const auto v = band_limited_indicator(0, b);
  Eigen::Index arg;
  v.cwiseAbs().maxCoeff(&arg);
  EXPECT_EQ(arg, 0);
  EXPECT_NEAR(v.norm(), 1.0, 1e-14);
  EXPECT_THROW(band_limited_indicator(34, b), InvalidArgument);
}

TEST(Mask, HandValues) {
  const BasisMeta m{3, 2, LaplacianKind::normalized};
  (void)m;
  const Eigenbasis b1(Eigen::MatrixXd::Identity(3, 2), Eigen::Vector2d(0.0, 0.5), LaplacianKind::normalized);
  const Eigenbasis b2(Eigen::MatrixXd::Identity(3, 2), Eigen::Vector2d(0.0, 0.6), LaplacianKind::normalized);
  const auto w = slanted_mask(b1, b2, 0.1);
  EXPECT_EQ(w(0, 0), 0.0);
  EXPECT_NEAR(w(1, 1), 1.0 - std::exp(-1.0), 1e-12);
  EXPECT_NEAR(w(1, 1), 0.6321, 1e-4);
  EXPECT_NEAR(w(1, 0), 1.0, 1e-12);
  EXPECT_THROW(slanted_mask(b1, b2, 0.0), InvalidArgument);
  EXPECT_DOUBLE_EQ(default_mask_width(b1), 0.5);
}

TEST(Estimate, AllIndicatorsFullBasisRecoverGroundTruth) {
  const Graph g = datasets::karate();
  const auto sub = khop_subgraph(g, NodeId("0"), 34);
  const auto p = permute_graph(g, 3);
  const auto b1 = eigendecompose(g, 34);
  const auto b2 = eigendecompose(p.graph, 34);
  DescriptorSet f1{Eigen::MatrixXd::Zero(34, 34), DescriptorKind::landmark_indicator};
  DescriptorSet f2{Eigen::MatrixXd::Identity(34, 34), DescriptorKind::landmark_indicator};
  for (NodeIndex y = 0; y < 34; ++y) f1.values(static_cast<Eigen::Index>(p.to_parent[y]), static_cast<Eigen::Index>(y)) = 1.0;
  const auto est = estimate_map(f1, f2, b1, b2);
  EXPECT_LT((est.matrix() - compute_spectral_map(p.to_parent, b1, b2).matrix()).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_EQ(est.source(), MapSource::estimated);
  (void)sub;
}

TEST(Estimate, UnregularizedMatchesNormalEquations) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Graph g = largest_component(datasets::erdos_renyi(50, 0.12, seed)).graph;
    const auto sub = khop_subgraph(g, NodeIndex{0}, g.num_nodes() * 3 / 4);
    const auto b1 = eigendecompose(g, 8);
    const auto b2 = eigendecompose(sub.graph, 7);
    Rng rng(seed);
    DescriptorSet f1{Eigen::MatrixXd(g.num_nodes(), 12)}, f2{Eigen::MatrixXd(sub.graph.num_nodes(), 12)};
    for (Eigen::Index i = 0; i < f1.values.size(); ++i) f1.values.data()[i] = standard_normal(rng);
    for (Eigen::Index i = 0; i < f2.values.size(); ++i) f2.values.data()[i] = standard_normal(rng);
    const Eigen::MatrixXd a = b1.vectors().transpose() * f1.values;
    const Eigen::MatrixXd b = b2.vectors().transpose() * f2.values;
    // C A = B in least squares: C = B A^T (A A^T)^-1.
    const Eigen::MatrixXd oracle = (a * a.transpose()).ldlt().solve(a * b.transpose()).transpose();
    EXPECT_LT((estimate_map(f1, f2, b1, b2).matrix() - oracle).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Estimate, RidgeMatchesRowwiseNormalEquations) {
  const Graph g = datasets::karate();
  const auto sub = khop_subgraph(g, NodeId("0"), 20);
  const auto b1 = eigendecompose(g, 10);
  const auto b2 = eigendecompose(sub.graph, 9);
  std::vector<std::pair<NodeIndex, NodeIndex>> lm;
  for (NodeIndex y = 0; y < 6; ++y) lm.emplace_back(sub.to_parent[y], y);
  const auto [f1, f2] = landmark_descriptors(lm, b1, b2);
  RegularizerConfig reg{0.5, 0.0, 0.2};
  const Eigen::MatrixXd a = b1.vectors().transpose() * f1.values;
  const Eigen::MatrixXd b = b2.vectors().transpose() * f2.values;
  const Eigen::MatrixXd w = slanted_mask(b1, b2, 0.2);
  const Eigen::MatrixXd c = estimate_map(f1, f2, b1, b2, reg).matrix();
  // Stationarity of each row: (A A^T + mu diag(w_i^2)) c_i = A b_i.
  for (Eigen::Index i = 0; i < 9; ++i) {
    Eigen::MatrixXd sys = a * a.transpose();
    sys.diagonal() += reg.mu_mask * w.row(i).array().square().matrix().transpose();
    const Eigen::VectorXd grad = sys * c.row(i).transpose() - a * b.row(i).transpose();
    EXPECT_LT(grad.cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Estimate, RankDeficientWithoutRegularizationIsSignaled) {
  const Graph g = datasets::karate();
  const auto b = eigendecompose(g, 10);
  std::vector<std::pair<NodeIndex, NodeIndex>> lm{{0, 0}, {1, 1}};
  const auto [f1, f2] = landmark_descriptors(lm, b, b);
  EXPECT_THROW(estimate_map(f1, f2, b, b), NumericalError);
  EXPECT_NO_THROW(estimate_map(f1, f2, b, b, RegularizerConfig{1e-3, 0.0, {}}));
  DescriptorSet bad{Eigen::MatrixXd::Zero(34, 3)};
  EXPECT_THROW(estimate_map(bad, f2, b, b), DimensionMismatch);
}

TEST(Estimate, DescentProperty) {
  const Graph g = datasets::karate();
  const auto sub = khop_subgraph(g, NodeId("0"), 20);
  const auto b1 = eigendecompose(g, 10);
  const auto b2 = eigendecompose(sub.graph, 10);
  std::vector<std::pair<NodeIndex, NodeIndex>> lm{{sub.to_parent[3], 3}};
  const auto [f1, f2] = landmark_descriptors(lm, b1, b2);
  for (double mu_orth : {0.0, 0.1, 1.0}) {
    const RegularizerConfig reg{1e-2, mu_orth, {}};
    const auto rep = estimate_map_report(f1, f2, b1, b2, reg);
    const double at_zero = map_objective(Eigen::MatrixXd::Zero(10, 10), f1, f2, b1, b2, reg);
    EXPECT_LE(map_objective(rep.map.matrix(), f1, f2, b1, b2, reg), at_zero + 1e-12);
    EXPECT_NEAR(rep.objective, map_objective(rep.map.matrix(), f1, f2, b1, b2, reg), 1e-10);
    EXPECT_LE(rep.orth_iterations, 500);
  }
}

TEST(Estimate, OrthogonalityPenaltyLowersOffDiagonalMass) {
  const Graph g = datasets::karate();
  const auto sub = khop_subgraph(g, NodeId("0"), 24);
  const auto b1 = eigendecompose(g, 12);
  const auto b2 = eigendecompose(sub.graph, 12);
  std::vector<std::pair<NodeIndex, NodeIndex>> lm;
  for (NodeIndex y = 0; y < 8; ++y) lm.emplace_back(sub.to_parent[y], y);
  const auto [f1, f2] = landmark_descriptors(lm, b1, b2);
  const auto plain = estimate_map(f1, f2, b1, b2, {1e-3, 0.0, {}}).matrix();
  const auto orth = estimate_map(f1, f2, b1, b2, {1e-3, 1.0, {}}).matrix();
  auto off = [](const Eigen::MatrixXd& c) {
    Eigen::MatrixXd gm = c.transpose() * c;
    gm.diagonal().setZero();
    return gm.squaredNorm();
  };
  EXPECT_LE(off(orth), off(plain));
}

TEST(Estimate, KarateLandmarksRegularizedBeatsUnregularized) {
  // The whole club as its own neighbourhood (a khop ball of all 34 nodes);
  // 10 landmark indicators, k = 20.
  const Graph g = datasets::karate();
  const auto sub = khop_subgraph(g, NodeId("0"), 34);
  const auto b1 = eigendecompose(g, 20);
  const auto b2 = eigendecompose(sub.graph, 20);
  const Eigen::MatrixXd truth = compute_spectral_map(sub.to_parent, b1, b2).matrix();
  Rng rng(1);
  const auto order = random_permutation(34, rng);
  std::vector<std::pair<NodeIndex, NodeIndex>> lm;
  for (std::size_t i = 0; i < 10; ++i) lm.emplace_back(sub.to_parent[order[i]], order[i]);
  const auto [f1, f2] = landmark_descriptors(lm, b1, b2);

  const double reg_err = relative_error(estimate_map(f1, f2, b1, b2, {1e-3, 0.0, {}}).matrix(), truth);
  // Unregularized solve: minimum-norm least squares, C A = B.
  const Eigen::MatrixXd a = b1.vectors().transpose() * f1.values;
  const Eigen::MatrixXd b = b2.vectors().transpose() * f2.values;
  const Eigen::MatrixXd min_norm = a.transpose().completeOrthogonalDecomposition().solve(b.transpose()).transpose();
  const double plain_err = relative_error(min_norm, truth);
  EXPECT_LT(reg_err, 0.5);
  EXPECT_LT(reg_err, plain_err);
}

TEST(Recover, SameGraphIdentity) {
  const Graph g = simple_spectrum_graph(40, 1);
  const auto b = eigendecompose(g, g.num_nodes());
  const SpectralMap c(Eigen::MatrixXd::Identity(b.k(), b.k()), b.meta(), b.meta(), MapSource::ground_truth);
  const auto r = recover_node_map(c, b, b);
  for (NodeIndex y = 0; y < g.num_nodes(); ++y) EXPECT_EQ(r[y][0].node, y);
  EXPECT_DOUBLE_EQ(mean_average_precision(r, NodeCorrespondence::identity(g.num_nodes())), 1.0);
}

TEST(Recover, PermutationInverted) {
  const Graph g = datasets::karate();
  const auto p = permute_graph(g, 21);
  const auto b1 = eigendecompose(g, 34);
  const auto b2 = eigendecompose(p.graph, 34);
  const auto c = compute_spectral_map(p.to_parent, b1, b2);
  const auto r = recover_node_map(c, b1, b2, 2);
  for (NodeIndex y = 0; y < 34; ++y) EXPECT_EQ(r[y][0].node, p.to_parent[y]);
  EXPECT_EQ(nearest_node_map(c, b1, b2), p.to_parent.sources());
}

TEST(Recover, CandidateListsArePermutationsAndSorted) {
  const Graph g = datasets::karate();
  const auto sub = khop_subgraph(g, NodeId("0"), 17);
  const auto b1 = eigendecompose(g, 9);
  const auto b2 = eigendecompose(sub.graph, 6);
  const auto r = recover_node_map(compute_spectral_map(sub.to_parent, b1, b2), b1, b2);
  ASSERT_EQ(r.size(), 17u);
  for (const auto& list : r) {
    std::vector<NodeIndex> nodes;
    for (const auto& c : list) nodes.push_back(c.node);
    std::sort(nodes.begin(), nodes.end());
    std::vector<NodeIndex> all(34);
    std::iota(all.begin(), all.end(), 0);
    EXPECT_EQ(nodes, all);
    for (std::size_t i = 1; i < list.size(); ++i) EXPECT_LE(list[i - 1].distance, list[i].distance);
  }
}

TEST(Recover, KarateHalfSpectrumMap) {
  const Graph g = datasets::karate();
  const auto sub = khop_subgraph(g, NodeId("0"), 17);
  const auto half = EigenCount::percent(50);
  const auto b1 = eigendecompose(g, half);
  const auto b2 = eigendecompose(sub.graph, half);
  const double map = mean_average_precision(recover_node_map(compute_spectral_map(sub.to_parent, b1, b2), b1, b2), sub.to_parent);
  EXPECT_GE(map, 0.9);
}

TEST(Map, HandValues) {
  // Query 0 finds its match first, query 1 second.
  const auto r = ranking_from_orders({{0, 1}, {0, 1}});
  EXPECT_DOUBLE_EQ(mean_average_precision(r, NodeCorrespondence(2, {0, 1})), 0.75);
  EXPECT_DOUBLE_EQ(mean_average_precision(ranking_from_orders({{1, 0}, {0, 1}}), NodeCorrespondence(2, {1, 0})), 1.0);
  EXPECT_THROW(mean_average_precision(ranking_from_orders({{0}, {0}}), NodeCorrespondence(2, {0, 1})), InvalidArgument);
}

TEST(Map, RelabelingInvariance) {
  Rng rng(2);
  const std::size_t n1 = 12;
  std::vector<std::vector<NodeIndex>> orders;
  for (int y = 0; y < 5; ++y) orders.push_back(random_permutation(n1, rng));
  const NodeCorrespondence truth(n1, {3, 7, 1, 0, 11});
  const auto relabel = random_permutation(n1, rng);
  auto mapped = orders;
  for (auto& o : mapped) {
    for (auto& x : o) x = relabel[x];
  }
  std::vector<NodeIndex> t2;
  for (NodeIndex x : truth.sources()) t2.push_back(relabel[x]);
  EXPECT_DOUBLE_EQ(mean_average_precision(ranking_from_orders(orders), truth),
                   mean_average_precision(ranking_from_orders(mapped), NodeCorrespondence(n1, t2)));
}

TEST(Map, RandomRankingExpectation) {
  // E[1/rank] for a uniform rank over 34 positions is H(34)/34.
  double h = 0.0;
  for (int i = 1; i <= 34; ++i) h += 1.0 / i;
  const double expected = h / 34.0;
  EXPECT_NEAR(expected, 0.1211, 1e-4);
  Rng rng(99);
  double sum = 0.0;
  for (int seed = 0; seed < 200; ++seed) {
    std::vector<std::vector<NodeIndex>> orders;
    std::vector<NodeIndex> truth;
    for (int y = 0; y < 34; ++y) {
      orders.push_back(random_permutation(34, rng));
      truth.push_back(static_cast<NodeIndex>(y));
    }
    sum += mean_average_precision(ranking_from_orders(orders), NodeCorrespondence(34, truth));
  }
  EXPECT_NEAR(sum / 200.0, expected, 0.02);
}

TEST(ZoomOut, GroundTruthIsFixedPoint) {
  const Graph g = simple_spectrum_graph(34, 4);
  const auto p = permute_graph(g, 4);
  const auto b1 = eigendecompose(g, 30);
  const auto b2 = eigendecompose(p.graph, 30);
  const auto c10 = compute_spectral_map(p.to_parent, b1.truncated(10), b2.truncated(10));
  const auto refined = zoomout_refine(c10, b1, b2, 4, 30);
  EXPECT_EQ(refined.k1(), 30u);
  EXPECT_EQ(refined.source(), MapSource::refined);
  EXPECT_LT((refined.matrix() - compute_spectral_map(p.to_parent, b1, b2).matrix()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(ZoomOut, SingleStepIsRecoverThenRebuild) {
  const Graph g = datasets::karate();
  const auto sub = khop_subgraph(g, NodeId("0"), 24);
  const auto b1 = eigendecompose(g, 20);
  const auto b2 = eigendecompose(sub.graph, 20);
  const auto c = gaussian_noise_map(compute_spectral_map(sub.to_parent, b1.truncated(10), b2.truncated(10)), 0.05, 1);
  const auto once = zoomout_refine(c, b1, b2, 10, 20);
  std::vector<NodeIndex> nn;
  for (const auto& list : recover_node_map(c, b1, b2)) nn.push_back(list[0].node);
  EXPECT_EQ(once.matrix(), spectral_map_from_pointwise(nn, b1, b2, MapSource::refined).matrix());
}

TEST(ZoomOut, NoisyStartDoesNotGetWorse) {
  const Graph g = datasets::karate();
  const auto sub = khop_subgraph(g, NodeId("0"), 24);
  const auto b1 = eigendecompose(g, 20);
  const auto b2 = eigendecompose(sub.graph, 20);
  const auto gt = compute_spectral_map(sub.to_parent, b1.truncated(10), b2.truncated(10));
  std::vector<double> before, after;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto noisy = gaussian_noise_map(gt, 0.05, seed);
    before.push_back(mean_average_precision(recover_node_map(noisy, b1, b2), sub.to_parent));
    after.push_back(mean_average_precision(recover_node_map(zoomout_refine(noisy, b1, b2, 2, 20), b1, b2), sub.to_parent));
  }
  EXPECT_GE(median(after), median(before));
}

TEST(ZoomOut, Preconditions) {
  const Graph g = datasets::karate();
  const auto b = eigendecompose(g, 10);
  const auto c = compute_spectral_map(NodeCorrespondence::identity(34), b, b);
  EXPECT_THROW(zoomout_refine(c, b, b, 2, 10), InvalidArgument);
  EXPECT_THROW(zoomout_refine(c.truncated(5, 5), b, b, 2, 12), InvalidArgument);
  EXPECT_THROW(zoomout_refine(c.truncated(5, 5), b, b, 0, 8), InvalidArgument);
}
