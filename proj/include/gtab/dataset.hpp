#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gtab/graph.hpp"
#include "gtab/types.hpp"

namespace gtab {

enum class FeatureKind { numerical, categorical };

/// Token used for a missing categorical value on disk.
inline constexpr std::string_view kMissingToken = "\xE2\x88\x85";  // U+2205

/// One node-feature column. Numerical columns use `values` (NaN = missing);
/// categorical columns use `codes` (kMissingCode = missing) indexing into
/// `vocabulary`, which is sorted and duplicate-free.
struct FeatureColumn {
  std::string name;
  FeatureKind kind = FeatureKind::numerical;
  std::vector<double> values;
  std::vector<std::int32_t> codes;
  std::vector<std::string> vocabulary;

  std::size_t size() const {
    return kind == FeatureKind::numerical ? values.size() : codes.size();
  }

  static FeatureColumn numerical(std::string name, std::vector<double> values);
  /// Builds a categorical column from raw strings; the missing token and the
  /// empty string are treated as missing.
  static FeatureColumn categorical(std::string name, std::span<const std::string> raw);
  static FeatureColumn categorical(std::string name, std::vector<std::int32_t> codes,
                                   std::vector<std::string> vocabulary);
};

/// Column store of node features.
class FeatureTable {
 public:
  FeatureTable() = default;
  explicit FeatureTable(std::size_t n_rows) : n_rows_(n_rows) {}

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_columns() const { return columns_.size(); }
  const std::vector<FeatureColumn>& columns() const { return columns_; }
  const FeatureColumn& column(std::size_t i) const { return columns_.at(i); }

  /// Throws InputError on a length mismatch or an out-of-vocabulary code.
  void add(FeatureColumn col);

  /// Row `i` moves to row new_id[i].
  FeatureTable permuted_rows(std::span<const NodeId> new_id) const;
  /// Output column j is input column order[j].
  FeatureTable reordered_columns(std::span<const std::size_t> order) const;

  friend bool operator==(const FeatureTable& a, const FeatureTable& b);

 private:
  std::size_t n_rows_ = 0;
  std::vector<FeatureColumn> columns_;
};

enum class TaskKind { binary, multiclass, regression };

std::string_view to_string(TaskKind k);
TaskKind parse_task_kind(std::string_view s);

inline bool is_classification(TaskKind k) { return k != TaskKind::regression; }

/// Prediction targets. Class indices are stored as doubles; NaN marks an
/// unlabeled node, which may not appear in any split part.
struct TaskSpec {
  TaskKind kind = TaskKind::regression;
  std::vector<double> targets;
  std::size_t n_classes = 0;
  std::string target_name = "target";

  /// Throws InputError if a label is out of range or not integral.
  void validate() const;
};

struct Split {
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;
  std::uint64_t seed = 0;

  /// Disjointness, range and non-emptiness. Throws InputError.
  void validate(std::size_t n_nodes) const;
  friend bool operator==(const Split&, const Split&) = default;
};

struct SplitRatios {
  double train = 0.1;
  double val = 0.1;
  double test = 0.8;
};

struct Dataset {
  Graph graph;
  FeatureTable features;
  TaskSpec task;

  std::size_t n_nodes() const { return graph.n_nodes(); }
  /// Throws InputError when the parts disagree on the node count.
  void validate() const;
  /// Relabels nodes consistently across graph, features and targets.
  Dataset permuted(std::span<const NodeId> new_id) const;
};

struct DatasetStats {
  std::size_t n_nodes = 0;
  std::size_t n_edges = 0;
  std::size_t n_features = 0;
  double mean_degree = 0.0;
  /// Absent for regression, or when no edge joins two labeled nodes.
  std::optional<double> edge_homophily;
};

struct LoadReport {
  std::size_t self_loops_dropped = 0;
  std::size_t input_edges = 0;
};

/// Reads an edge list, a feature table (which also holds the target column)
/// and a JSON meta document. See README for the formats.
Dataset load_dataset(const std::filesystem::path& edge_path,
                     const std::filesystem::path& feature_path,
                     const std::filesystem::path& meta_path, LoadReport* report = nullptr);

/// Writes `edges.csv`, `features.csv` and `meta.json` into `dir`.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);
/// Loads the layout written by save_dataset.
Dataset load_dataset_dir(const std::filesystem::path& dir, LoadReport* report = nullptr);

/// Random (optionally stratified) split over labeled nodes. Each class (or
/// the whole labeled set) is shuffled by `seed` and sliced contiguously into
/// floor(ratio * size) nodes per part; leftovers go one each to train, val,
/// test in turn. Index sets are returned sorted.
Split make_split(const Dataset& ds, SplitRatios ratios, bool stratified, std::uint64_t seed);

void save_split(const Split& s, const std::filesystem::path& path);
Split load_split(const std::filesystem::path& path);

DatasetStats dataset_stats(const Dataset& ds);

}  // namespace gtab
