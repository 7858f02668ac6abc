#include <algorithm>
#include <cmath>
#include <string>

#include "gtab/error.hpp"
#include "gtab/rng.hpp"
#include "gtab/structural.hpp"

namespace gtab::detail {

namespace {

// Columns of `basis` are orthonormal. Two passes of classical Gram-Schmidt.
void orthogonalize(Vector& w, const Eigen::MatrixXd& basis, Eigen::Index cols,
                   const SymOp& op) {
  for (int pass = 0; pass < 2; ++pass) {
    if (cols > 0) {
      const auto b = basis.leftCols(cols);
      w.noalias() -= b * (b.transpose() * w);
    }
    if (op.project) op.project(w);
  }
}

}  // namespace

LaplacianEmbedding lanczos_largest(const SymOp& op, std::size_t k, const LanczosOptions& opts) {
  const auto n = static_cast<Eigen::Index>(op.dim);
  LaplacianEmbedding out;
  if (k == 0 || n == 0) {
    out.vectors = Matrix(n, 0);
    return out;
  }
  const auto m = static_cast<Eigen::Index>(
      std::min<std::size_t>(opts.krylov_dim ? opts.krylov_dim : std::max<std::size_t>(4 * k, 100),
                            op.dim));

  Eigen::MatrixXd locked(n, static_cast<Eigen::Index>(k));
  std::vector<double> locked_vals;
  Eigen::Index n_locked = 0;

  Rng rng(opts.seed);
  Vector start(n);
  for (Eigen::Index i = 0; i < n; ++i) start[i] = rng.normal();

  Eigen::MatrixXd basis(n, m + 1);
  Vector alpha(m), beta(m), w(n), bw(n);
  double last_residual = 0.0;

  for (std::size_t restart = 0; restart <= opts.max_restarts; ++restart) {
    orthogonalize(start, locked, n_locked, op);
    double norm = start.norm();
    if (norm < 1e-12) {
      // Restart vector collapsed; try a fresh random direction once.
      for (Eigen::Index i = 0; i < n; ++i) start[i] = rng.normal();
      orthogonalize(start, locked, n_locked, op);
      norm = start.norm();
      if (norm < 1e-12) break;  // subspace exhausted
    }
    basis.col(0) = start / norm;

    Eigen::Index steps = m;
    for (Eigen::Index j = 0; j < m; ++j) {
      op.apply(basis.col(j), w);
      if (op.project) op.project(w);
      alpha[j] = basis.col(j).dot(w);
      w -= alpha[j] * basis.col(j);
      if (j > 0) w -= beta[j - 1] * basis.col(j - 1);
      for (int pass = 0; pass < 2; ++pass) {
        const auto b = basis.leftCols(j + 1);
        w.noalias() -= b * (b.transpose() * w);
        if (n_locked > 0) {
          const auto q = locked.leftCols(n_locked);
          w.noalias() -= q * (q.transpose() * w);
        }
        if (op.project) op.project(w);
      }
      beta[j] = w.norm();
      if (beta[j] < 1e-12 * std::max(1.0, std::abs(alpha[j]))) {
        steps = j + 1;
        break;
      }
      if (j + 1 < m + 1) basis.col(j + 1) = w / beta[j];
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(alpha.head(steps), beta.head(std::max<Eigen::Index>(steps - 1, 0)),
                               Eigen::ComputeEigenvectors);
    const Vector theta = tri.eigenvalues();
    const Eigen::MatrixXd& s = tri.eigenvectors();

    const auto need = static_cast<Eigen::Index>(k) - n_locked;
    const Eigen::Index cand = std::min(need, steps);
    Vector next = Vector::Zero(n);
    bool any_pending = false;
    for (Eigen::Index c = 0; c < cand; ++c) {
      const Eigen::Index idx = steps - 1 - c;
      Vector y = basis.leftCols(steps) * s.col(idx);
      orthogonalize(y, locked, n_locked, op);
      y.normalize();
      op.apply(y, bw);
      if (op.project) op.project(bw);
      const double rq = y.dot(bw);
      const double res = (bw - rq * y).norm();
      if (res < opts.tol) {
        locked.col(n_locked++) = y;
        locked_vals.push_back(rq);
      } else {
        last_residual = std::max(last_residual, res);
        next += y;
        any_pending = true;
      }
    }
    if (n_locked == static_cast<Eigen::Index>(k)) break;
    if (any_pending) {
      start = next;
    } else {
      for (Eigen::Index i = 0; i < n; ++i) start[i] = rng.normal();
    }
    if (restart == opts.max_restarts) {
      throw NumericError("lanczos: " + std::to_string(n_locked) + " of " + std::to_string(k) +
                         " eigenpairs converged after " + std::to_string(opts.max_restarts) +
                         " restarts (last residual " + std::to_string(last_residual) + ")");
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n_locked));
  for (Eigen::Index i = 0; i < n_locked; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return locked_vals[static_cast<std::size_t>(a)] > locked_vals[static_cast<std::size_t>(b)];
  });
  out.vectors = Matrix(n, n_locked);
  for (Eigen::Index c = 0; c < n_locked; ++c) {
    out.vectors.col(c) = locked.col(order[static_cast<std::size_t>(c)]);
    out.eigenvalues.push_back(locked_vals[static_cast<std::size_t>(order[static_cast<std::size_t>(c)])]);
  }
  return out;
}

}  // namespace gtab::detail
