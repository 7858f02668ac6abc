#pragma once

#include <span>
#include <string>
#include <vector>

#include "gtab/dataset.hpp"
#include "gtab/graph.hpp"
#include "gtab/types.hpp"

namespace gtab {

enum class NfaStat { mean, max, min, cat_freq };

/// Where an aggregated column came from.
struct NfaColumnInfo {
  std::string source;
  NfaStat stat = NfaStat::mean;
  std::string category;  // cat_freq only

  /// "source.mean", "source.max", "source.min" or "source.freq=category".
  std::string name() const;
  friend bool operator==(const NfaColumnInfo&, const NfaColumnInfo&) = default;
};

/// Neighborhood aggregates, n x (sum of per-source widths). Rows with no
/// usable neighbor hold the missing marker.
struct NfaTable {
  Matrix values;
  std::vector<NfaColumnInfo> provenance;

  std::size_t n_columns() const { return provenance.size(); }
};

/// Mean, max and min of the non-missing neighbor values of each node, as the
/// three columns of an n x 3 matrix. Neighbor values are sorted before a
/// pairwise summation, so the result does not depend on neighbor order.
Matrix nfa_numerical(const Graph& g, std::span<const double> column);

/// Share of each category among the neighbors with a non-missing value,
/// n x vocab_size.
Matrix nfa_categorical(const Graph& g, std::span<const std::int32_t> codes,
                       std::size_t vocab_size);

/// Aggregates every feature column, in column order.
NfaTable compute_nfa(const Graph& g, const FeatureTable& features);

namespace serial {
Matrix nfa_numerical(const Graph& g, std::span<const double> column);
Matrix nfa_categorical(const Graph& g, std::span<const std::int32_t> codes,
                       std::size_t vocab_size);
}  // namespace serial

/// Pairwise (tree) summation: runs of up to 8 are summed left to right,
/// longer runs are split in half.
double pairwise_sum(std::span<const double> v);

}  // namespace gtab
