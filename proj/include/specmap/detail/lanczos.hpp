#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "specmap/error.hpp"
#include "specmap/random.hpp"

namespace specmap::detail {

struct LanczosOptions {
  /// Shift-invert shift; L - shift*I must be positive definite.
  double shift = -1e-3;
  /// Per-pair residual tolerance, relative to max(1, |lambda|).
  double tol = 1e-10;
  int max_restarts = 500;
  std::size_t min_subspace = 40;
  std::uint64_t seed = 0x5eed5eedULL;
};

struct EigenPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

/// Removes from `w` its components along the columns of `q` (two passes).
inline void project_out(const Eigen::MatrixXd& q, Eigen::Index cols, Eigen::VectorXd& w) {
  if (cols == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::VectorXd c = q.leftCols(cols).transpose() * w;
    w.noalias() -= q.leftCols(cols) * c;
  }
}

/// k smallest eigenpairs of a sparse symmetric matrix.
///
/// Shift-invert Lanczos with full reorthogonalization and locking: each
/// cycle runs Lanczos on (L - shift I)^{-1} restricted to the orthogonal
/// complement of the already locked vectors, then locks the leading run of
/// Ritz pairs whose residual in L is below tolerance. Restarting from fresh
/// random vectors lets repeated eigenvalues surface one copy per cycle.
/// The search stops once a converged cycle finds nothing below the current
/// k-th eigenvalue.
inline EigenPairs lanczos_smallest(const Eigen::SparseMatrix<double>& l, std::size_t k,
                                   const LanczosOptions& opt = {}) {
  using Eigen::Index;
  using Eigen::MatrixXd;
  using Eigen::VectorXd;

  const Index n = l.rows();
  Eigen::SparseMatrix<double> shifted = l;
  for (Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= opt.shift;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(shifted);
  if (ldlt.info() != Eigen::Success) throw NumericalError("lanczos: factorization of shifted operator failed");

  Rng rng(opt.seed);
  MatrixXd locked(n, 0);
  std::vector<double> locked_vals;
  Index dim = static_cast<Index>(std::max<std::size_t>(opt.min_subspace, 2 * k + 20));

  auto kth_locked = [&] {
    std::vector<double> s = locked_vals;
    std::nth_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k - 1), s.end());
    return s[k - 1];
  };

  for (int cycle = 0;; ++cycle) {
    if (cycle >= opt.max_restarts) {
      throw NumericalError("lanczos: no convergence after " + std::to_string(opt.max_restarts) + " restarts (" +
                           std::to_string(locked_vals.size()) + " of " + std::to_string(k) + " pairs locked)");
    }
    const Index p = locked.cols();
    const Index avail = n - p;
    if (avail == 0) break;
    const Index m_cap = std::min(dim, avail);

    VectorXd v(n);
    double vnorm = 0.0;
    for (int tries = 0; tries < 8 && vnorm < 1e-8; ++tries) {
      for (Index i = 0; i < n; ++i) v(i) = standard_normal(rng);
      project_out(locked, p, v);
      vnorm = v.norm();
    }
    if (vnorm < 1e-8) break;
    v /= vnorm;

    MatrixXd basis(n, m_cap);
    VectorXd alpha(m_cap), beta(m_cap);
    basis.col(0) = v;
    Index m = 0;
    for (Index j = 0; j < m_cap; ++j) {
      VectorXd w = ldlt.solve(VectorXd(basis.col(j)));
      alpha(j) = basis.col(j).dot(w);
      w -= alpha(j) * basis.col(j);
      if (j > 0) w -= beta(j - 1) * basis.col(j - 1);
      project_out(basis, j + 1, w);
      project_out(locked, p, w);
      beta(j) = w.norm();
      m = j + 1;
      if (j + 1 == m_cap) break;
      if (beta(j) <= 1e-12 * std::abs(alpha(j)) + 1e-300) break;
      basis.col(j + 1) = w / beta(j);
    }

    MatrixXd t = MatrixXd::Zero(m, m);
    for (Index j = 0; j < m; ++j) {
      t(j, j) = alpha(j);
      if (j + 1 < m) t(j, j + 1) = t(j + 1, j) = beta(j);
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> tri(t);
    // Largest theta of the inverse operator first, i.e. smallest lambda first.
    std::vector<VectorXd> ritz_vecs;
    std::vector<double> ritz_vals;
    std::vector<char> ok;
    for (Index c = m - 1; c >= 0; --c) {
      VectorXd y = basis.leftCols(m) * tri.eigenvectors().col(c);
      y.normalize();
      const VectorXd ly = l * y;
      const double lam = y.dot(ly);
      const double res = (ly - lam * y).norm();
      ritz_vecs.push_back(std::move(y));
      ritz_vals.push_back(lam);
      ok.push_back(res <= opt.tol * std::max(1.0, std::abs(lam)));
    }
    std::size_t prefix = 0;
    while (prefix < ok.size() && ok[prefix]) ++prefix;

    std::size_t accept = 0;
    bool finished = false;
    if (locked_vals.size() < k) {
      accept = prefix;
    } else if (prefix > 0) {
      const double lk = kth_locked();
      const double eps = 1e-12 * std::max(1.0, std::abs(lk));
      while (accept < prefix && ritz_vals[accept] < lk - eps) ++accept;
      finished = accept == 0;
    }
    if (prefix == 0) dim = std::min<Index>(2 * dim, n);

    for (std::size_t a = 0; a < accept; ++a) {
      VectorXd y = ritz_vecs[a];
      project_out(locked, locked.cols(), y);
      y.normalize();
      locked.conservativeResize(n, locked.cols() + 1);
      locked.col(locked.cols() - 1) = y;
      locked_vals.push_back(ritz_vals[a]);
    }
    if (finished) break;
  }
  if (locked_vals.size() < k) throw NumericalError("lanczos: fewer eigenpairs than requested");

  std::vector<std::size_t> order(locked_vals.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return locked_vals[a] < locked_vals[b]; });
  EigenPairs out{VectorXd(static_cast<Index>(k)), MatrixXd(n, static_cast<Index>(k))};
  for (std::size_t i = 0; i < k; ++i) {
    out.values(static_cast<Index>(i)) = locked_vals[order[i]];
    out.vectors.col(static_cast<Index>(i)) = locked.col(static_cast<Index>(order[i]));
  }
  return out;
}

}  // namespace specmap::detail
