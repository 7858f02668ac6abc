#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gtab/graph.hpp"
#include "gtab/types.hpp"

namespace gtab {

struct StructuralConfig {
  double pagerank_damping = 0.85;
  double pagerank_tol = 1e-9;
  std::size_t pagerank_max_iter = 1000;
  /// Number of Laplacian eigenvectors; 0 disables the block.
  std::size_t n_eigenvectors = 8;
  double eig_tol = 1e-8;
  /// Graphs with at most this many non-isolated nodes use a dense
  /// eigensolver, larger ones use restarted Lanczos.
  std::size_t dense_max_nodes = 2000;

  /// Throws InputError on out-of-range values.
  void validate() const;
};

struct StructuralFeatures {
  std::vector<double> degree;
  std::vector<double> pagerank;
  /// n x K, unit-norm columns.
  Matrix lap_eigs;
  /// Eigenvalue of each lap_eigs column, ascending.
  std::vector<double> lap_eigenvalues;

  std::size_t n_columns() const { return 2 + static_cast<std::size_t>(lap_eigs.cols()); }
  /// Columns in the fixed order [degree, pagerank, eig_1..eig_K].
  Matrix as_matrix() const;
  std::vector<std::string> column_names() const;
};

struct LaplacianEmbedding {
  Matrix vectors;                   // n x K
  std::vector<double> eigenvalues;  // ascending
};

std::vector<double> degrees(const Graph& g);

/// PageRank by power iteration on the row-normalized adjacency. Dangling
/// nodes spread their mass uniformly. Every sum goes through an
/// order-independent accumulator, so the result is bitwise identical for any
/// thread count and commutes exactly with node relabeling. Throws
/// NumericError on non-convergence.
std::vector<double> pagerank(const Graph& g, const StructuralConfig& cfg);

/// Eigenvectors of the symmetric normalized Laplacian for the K smallest
/// eigenvalues once one zero eigenpair per connected component has been
/// removed. Each column's largest-magnitude entry is positive. Isolated nodes
/// get zeros. Throws NumericError if fewer than K such eigenpairs exist.
LaplacianEmbedding laplacian_eigenvectors(const Graph& g, const StructuralConfig& cfg);

StructuralFeatures structural_features(const Graph& g, const StructuralConfig& cfg);

/// y = L x for the symmetric normalized Laplacian (rows of isolated nodes are
/// zero).
void apply_normalized_laplacian(const Graph& g, const Eigen::Ref<const Vector>& x,
                                 Eigen::Ref<Vector> y);

/// Flips `v` so that its largest-magnitude entry (lowest index on ties) is
/// positive.
void fix_sign(Eigen::Ref<Vector> v);

namespace serial {
/// Single-threaded reference with the same arithmetic as gtab::pagerank.
std::vector<double> pagerank(const Graph& g, const StructuralConfig& cfg);
}  // namespace serial

namespace detail {

struct LanczosOptions {
  std::size_t krylov_dim = 0;  // 0 = chosen from k
  std::size_t max_restarts = 500;
  double tol = 1e-8;
  std::uint64_t seed = 0x1a2c05;
};

/// Symmetric linear operator on R^dim. `project`, when set, is the orthogonal
/// projector onto the subspace the search is restricted to.
struct SymOp {
  std::size_t dim = 0;
  std::function<void(const Vector&, Vector&)> apply;
  std::function<void(Vector&)> project;
};

/// Largest `k` eigenpairs of `op` (within the projected subspace) by Lanczos
/// with full reorthogonalization, locking of converged Ritz pairs and
/// explicit restarts. A pair is accepted once its true residual is below
/// `opts.tol`. Returns pairs in descending eigenvalue order; may return fewer
/// than `k` if the subspace is exhausted. Throws NumericError when the restart
/// budget runs out.
LaplacianEmbedding lanczos_largest(const SymOp& op, std::size_t k, const LanczosOptions& opts);

}  // namespace detail

}  // namespace gtab
