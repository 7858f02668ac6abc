#pragma once

// Random inputs and brute-force reference implementations for the tests.
// Everything here works on dense matrices or plain loops and shares no code
// with the library beyond its data types.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gtab/dataset.hpp"
#include "gtab/graph.hpp"
#include "gtab/rng.hpp"
#include "gtab/types.hpp"

namespace testing {

using gtab::Graph;
using gtab::Matrix;
using gtab::Rng;

/// Erdos-Renyi G(n, p).
Graph random_graph(std::size_t n, double p, Rng& rng);
/// Sparse random graph with about `avg_degree` neighbors per node, built in
/// O(n * avg_degree).
Graph sparse_random_graph(std::size_t n, double avg_degree, Rng& rng);
Graph path_graph(std::size_t n);
Graph cycle_graph(std::size_t n);
Graph complete_graph(std::size_t n);

/// Numerical values are multiples of 1/8 in [-64, 64] so that any summation
/// order is exact; categorical columns draw from `vocab` tokens.
gtab::FeatureTable random_features(std::size_t n, std::size_t n_num, std::size_t n_cat,
                                   std::size_t vocab, double missing_rate, Rng& rng);

/// Random graph, features and labels. Classes are balanced-ish and every
/// class has at least 3 nodes.
gtab::Dataset random_dataset(std::size_t n, double p, gtab::TaskKind kind, std::size_t n_classes,
                             std::uint64_t seed);

Matrix dense_adjacency(const Graph& g);

// Oracles.

/// Mean, max and min over neighbors from the dense adjacency, plain loops.
Matrix oracle_nfa_numerical(const Graph& g, const std::vector<double>& col);
Matrix oracle_nfa_categorical(const Graph& g, const std::vector<std::int32_t>& codes, std::size_t vocab);

/// Solves the PageRank linear system directly by Gaussian elimination.
std::vector<double> oracle_pagerank(const Graph& g, double damping);

/// Dense symmetric normalized Laplacian.
Matrix oracle_laplacian(const Graph& g);
/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations,
/// ascending; eigenvectors as columns of `vectors` when non-null.
std::vector<double> jacobi_eigen(Matrix a, Matrix* vectors = nullptr);

/// Solves a x = b by Gaussian elimination with partial pivoting.
std::vector<double> gauss_solve(Matrix a, std::vector<double> b);

/// Forward pass of the mean-aggregation network with a dense propagation
/// matrix.
Matrix oracle_gnn(const Graph& g, const Matrix& x, const std::vector<Matrix>& weights,
                  const std::vector<std::vector<double>>& biases);

/// Mean over positives of the precision among all items scoring at least as
/// high as that positive.
double oracle_average_precision(const std::vector<double>& scores, const std::vector<int>& labels);

/// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

}  // namespace testing
