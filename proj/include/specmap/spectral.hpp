#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "specmap/detail/lanczos.hpp"
#include "specmap/graph.hpp"
#include "specmap/laplacian.hpp"

namespace specmap {

/// Eigenvector budget given as an absolute count or as a percentage of n.
class EigenCount {
 public:
  static EigenCount absolute(std::size_t k) { return EigenCount(false, static_cast<double>(k)); }
  static EigenCount percent(double pct) {
    if (!(pct > 0.0 && pct <= 100.0)) throw InvalidArgument("eigen count percentage must lie in (0, 100]");
    return EigenCount(true, pct);
  }

  /// "50" or "5%".
  static EigenCount parse(const std::string& s) {
    try {
      std::size_t pos = 0;
      if (!s.empty() && s.back() == '%') {
        const double p = std::stod(s.substr(0, s.size() - 1), &pos);
        if (pos != s.size() - 1) throw InvalidArgument("");
        return percent(p);
      }
      const long long k = std::stoll(s, &pos);
      if (pos != s.size() || k < 1) throw InvalidArgument("");
      return absolute(static_cast<std::size_t>(k));
    } catch (const std::exception&) {
      throw InvalidArgument("bad eigenvector count '" + s + "' (expected e.g. '50' or '5%')");
    }
  }

  bool is_percent() const noexcept { return percent_; }
  double value() const noexcept { return value_; }

  /// Percentages round half-up with a floor of 1; results are capped at n.
  std::size_t resolve(std::size_t n) const {
    std::size_t k;
    if (percent_) {
      k = static_cast<std::size_t>(std::floor(value_ * static_cast<double>(n) / 100.0 + 0.5));
      k = std::max<std::size_t>(k, 1);
    } else {
      k = static_cast<std::size_t>(value_);
    }
    return std::min(k, n);
  }

  std::string str() const {
    if (!percent_) return std::to_string(static_cast<std::size_t>(value_));
    std::string s = std::to_string(value_);
    s.erase(s.find_last_not_of('0') + 1);
    if (s.back() == '.') s.pop_back();
    return s + "%";
  }

 private:
  EigenCount(bool pct, double v) : percent_(pct), value_(v) {}
  bool percent_;
  double value_;
};

/// (n, k, kind) of an eigenbasis; maps carry two of these as provenance.
struct BasisMeta {
  std::size_t n = 0;
  std::size_t k = 0;
  LaplacianKind kind = LaplacianKind::normalized;
  friend bool operator==(const BasisMeta&, const BasisMeta&) = default;
};

/// Flips each column so that its largest-magnitude entry is positive
/// (ties go to the lowest row index).
inline void canonicalize_signs(Eigen::MatrixXd& phi) {
  for (Eigen::Index c = 0; c < phi.cols(); ++c) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index r = 0; r < phi.rows(); ++r) {
      const double a = std::abs(phi(r, c));
      if (a > best_abs * (1.0 + 1e-12)) {
        best_abs = a;
        best = r;
      }
    }
    if (phi(best, c) < 0.0) phi.col(c) *= -1.0;
  }
}

/// max |Phi^T Phi - I|.
inline double orthonormality_error(const Eigen::MatrixXd& phi) {
  const Eigen::MatrixXd g = phi.transpose() * phi;
  return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

/// First k eigenpairs of a graph Laplacian, ascending, sign-canonical.
class Eigenbasis {
 public:
  Eigenbasis() = default;

  Eigenbasis(Eigen::MatrixXd vectors, Eigen::VectorXd values, LaplacianKind kind)
      : phi_(std::move(vectors)), lambda_(std::move(values)), kind_(kind) {
    if (phi_.cols() != lambda_.size()) throw DimensionMismatch("eigenbasis: vector and value counts differ");
    for (Eigen::Index i = 1; i < lambda_.size(); ++i) {
      if (lambda_(i) < lambda_(i - 1)) throw InvalidArgument("eigenbasis: eigenvalues must be non-descending");
    }
  }

  const Eigen::MatrixXd& vectors() const noexcept { return phi_; }
  const Eigen::VectorXd& values() const noexcept { return lambda_; }
  LaplacianKind kind() const noexcept { return kind_; }
  std::size_t n() const noexcept { return static_cast<std::size_t>(phi_.rows()); }
  std::size_t k() const noexcept { return static_cast<std::size_t>(phi_.cols()); }
  BasisMeta meta() const { return {n(), k(), kind_}; }

  /// Spectral embedding of node i: row i of Phi.
  Eigen::VectorXd embedding(NodeIndex i) const { return phi_.row(static_cast<Eigen::Index>(i)).transpose(); }

  /// Keeps the first `k` pairs.
  Eigenbasis truncated(std::size_t k) const {
    if (k < 1 || k > this->k()) throw InvalidArgument("eigenbasis: cannot truncate to " + std::to_string(k));
    const auto kk = static_cast<Eigen::Index>(k);
    return Eigenbasis(phi_.leftCols(kk), lambda_.head(kk), kind_);
  }

  /// Index ranges [first, last) of runs whose consecutive eigenvalue gaps
  /// are all <= gap_tol. Only runs of length >= 2 are reported.
  std::vector<std::pair<std::size_t, std::size_t>> multiplicity_blocks(double gap_tol = 1e-6) const {
    std::vector<std::pair<std::size_t, std::size_t>> blocks;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= k(); ++i) {
      const bool split = i == k() || lambda_(static_cast<Eigen::Index>(i)) - lambda_(static_cast<Eigen::Index>(i - 1)) > gap_tol;
      if (split) {
        if (i - start >= 2) blocks.emplace_back(start, i);
        start = i;
      }
    }
    return blocks;
  }

  bool simple_spectrum(double gap_tol = 1e-6) const { return multiplicity_blocks(gap_tol).empty(); }

 private:
  Eigen::MatrixXd phi_;
  Eigen::VectorXd lambda_;
  LaplacianKind kind_ = LaplacianKind::normalized;
};

enum class SolverKind { automatic, dense, lanczos };

struct EigenOptions {
  SolverKind solver = SolverKind::automatic;
  /// `automatic` uses the dense solver up to this many nodes.
  std::size_t dense_threshold = 2048;
  detail::LanczosOptions lanczos{};
};

/// max |L - L^T|.
inline double asymmetry(const Eigen::SparseMatrix<double>& l) {
  const Eigen::SparseMatrix<double> d = l - Eigen::SparseMatrix<double>(l.transpose());
  double worst = 0.0;
  for (Eigen::Index c = 0; c < d.outerSize(); ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(d, c); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  return worst;
}

/// k smallest eigenpairs of a symmetric Laplacian.
inline Eigenbasis eigendecompose(const Eigen::SparseMatrix<double>& l, std::size_t k,
                                 LaplacianKind kind = LaplacianKind::normalized, const EigenOptions& opt = {}) {
  const auto n = static_cast<std::size_t>(l.rows());
  if (l.rows() != l.cols()) throw DimensionMismatch("eigendecompose: matrix is not square");
  if (k < 1 || k > n) throw InvalidArgument("eigendecompose: k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  if (asymmetry(l) > 1e-10) throw InvalidArgument("eigendecompose: matrix is not symmetric");

  const bool dense = opt.solver == SolverKind::dense ||
                     (opt.solver == SolverKind::automatic && (n <= opt.dense_threshold || k == n));
  Eigen::MatrixXd phi;
  Eigen::VectorXd lambda;
  const auto kk = static_cast<Eigen::Index>(k);
  if (dense) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(l), Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecompose: dense solver failed");
    phi = es.eigenvectors().leftCols(kk);
    lambda = es.eigenvalues().head(kk);
  } else {
    auto pairs = detail::lanczos_smallest(l, k, opt.lanczos);
    phi = std::move(pairs.vectors);
    lambda = std::move(pairs.values);
  }
  canonicalize_signs(phi);
  return Eigenbasis(std::move(phi), std::move(lambda), kind);
}

inline Eigenbasis eigendecompose(const Graph& g, std::size_t k, LaplacianKind kind = LaplacianKind::normalized,
                                 const EigenOptions& opt = {}) {
  return eigendecompose(laplacian(g, kind), k, kind, opt);
}

inline Eigenbasis eigendecompose(const Graph& g, const EigenCount& k, LaplacianKind kind = LaplacianKind::normalized,
                                 const EigenOptions& opt = {}) {
  return eigendecompose(g, k.resolve(g.num_nodes()), kind, opt);
}

/// Per-pair residuals ||L phi - lambda phi||_2.
inline Eigen::VectorXd residuals(const Eigen::SparseMatrix<double>& l, const Eigenbasis& b) {
  const Eigen::MatrixXd r = l * b.vectors() - b.vectors() * b.values().asDiagonal();
  return r.colwise().norm().transpose();
}

inline constexpr std::size_t kDefaultRwpeDim = 16;

/// Random-walk positional encoding: column p-1 holds diag((D^{-1} A)^p),
/// the p-step return probabilities, for p = 1..d.
inline Eigen::MatrixXd rw_positional_encoding(const Graph& g, std::size_t d = kDefaultRwpeDim) {
  if (d < 1) throw InvalidArgument("rw_positional_encoding: d must be >= 1");
  const std::size_t n = g.num_nodes();
  for (NodeIndex i = 0; i < n; ++i) {
    if (g.degree(i) == 0) throw InvalidArgument("rw_positional_encoding: node '" + g.id(i) + "' is isolated");
  }
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(2 * g.num_edges());
  for (NodeIndex i = 0; i < n; ++i) {
    const double w = 1.0 / static_cast<double>(g.degree(i));
    for (NodeIndex j : g.neighbors(i)) trips.emplace_back(static_cast<int>(i), static_cast<int>(j), w);
  }
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::SparseMatrix<double> walk(nn, nn);
  walk.setFromTriplets(trips.begin(), trips.end());

  Eigen::MatrixXd out(nn, static_cast<Eigen::Index>(d));
  constexpr Eigen::Index kBlock = 256;
  for (Eigen::Index c0 = 0; c0 < nn; c0 += kBlock) {
    const Eigen::Index b = std::min(kBlock, nn - c0);
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(nn, b);
    for (Eigen::Index j = 0; j < b; ++j) x(c0 + j, j) = 1.0;
    for (std::size_t p = 0; p < d; ++p) {
      x = walk * x;
      for (Eigen::Index j = 0; j < b; ++j) out(c0 + j, static_cast<Eigen::Index>(p)) = x(c0 + j, j);
    }
  }
  return out;
}

}  // namespace specmap
