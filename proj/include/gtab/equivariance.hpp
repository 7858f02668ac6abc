#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gtab/dataset.hpp"
#include "gtab/pipeline.hpp"

namespace gtab {

struct CheckResult {
  std::string name;
  double tolerance = 0.0;
  double max_deviation = 0.0;
  bool passed = false;
  /// Statistical checks compare Monte Carlo estimates; their deviation is in
  /// standard errors and they are retried once with fresh draws on failure.
  bool statistical = false;
};

struct SymmetryReport {
  std::string check;
  std::vector<CheckResult> results;

  bool passed() const;
  /// {check, passed, results: [{name, tolerance, max_deviation, status, statistical}]}
  nlohmann::ordered_json to_json() const;
};

struct HarnessOptions {
  FeaturizeOptions featurize;
  SplitRatios ratios;
  std::size_t knn_k = 5;
  LinearOptions linear;
  /// Draws per side for the distributional PEARL check; 0 skips it.
  std::size_t statistical_draws = 4096;
  /// Family-wise bound in standard errors. Every encoding entry is tested,
  /// so the per-entry threshold is Bonferroni-adjusted to the same false
  /// alarm rate as a single test at this many sigmas.
  double statistical_sigmas = 4.0;
};

/// Reorders feature columns (output column j is input column order[j]).
/// Checks that NFA groups move with their source columns and that the test
/// metric of both built-in predictors is unchanged.
SymmetryReport check_feature_permutation(const HarnessOptions& opts, const Dataset& ds,
                                         std::span<const std::size_t> order, std::uint64_t seed);
SymmetryReport check_feature_permutation(const HarnessOptions& opts, const Dataset& ds,
                                         std::uint64_t seed);

/// Relabels nodes (old i becomes new_id[i]). Degrees, PageRank and NFA must
/// commute exactly, the Laplacian eigenvector block as a projector, and
/// gnn_forward for permuted inputs.
SymmetryReport check_node_permutation(const HarnessOptions& opts, const Dataset& ds,
                                      std::span<const NodeId> new_id, std::uint64_t seed);
SymmetryReport check_node_permutation(const HarnessOptions& opts, const Dataset& ds,
                                      std::uint64_t seed);

/// Exhaustive label-shuffled k-NN and linear predictors must be equivariant
/// under every class bijection. Requires a classification task with at most
/// 4 classes.
SymmetryReport check_label_permutation(const HarnessOptions& opts, const Dataset& ds,
                                       std::uint64_t seed);

/// max |a - b| over entries; a missing marker facing a value counts as
/// infinite deviation, two missing markers as zero.
double max_abs_deviation(const Matrix& a, const Matrix& b);

}  // namespace gtab
