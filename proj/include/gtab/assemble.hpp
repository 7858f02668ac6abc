#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gtab/dataset.hpp"
#include "gtab/nfa.hpp"
#include "gtab/structural.hpp"
#include "gtab/types.hpp"

namespace gtab {

/// Principal components of one feature block, fitted on train rows only.
struct PcaModel {
  std::string block;
  Vector mean;                 // per input column, used for centering and imputation
  Matrix components;           // d_in x d_keep, orthonormal columns
  Vector explained_variance;   // descending

  std::size_t d_in() const { return static_cast<std::size_t>(components.rows()); }
  std::size_t d_keep() const { return static_cast<std::size_t>(components.cols()); }
  friend bool operator==(const PcaModel& a, const PcaModel& b) {
    return a.block == b.block && a.mean == b.mean && a.components == b.components &&
           a.explained_variance == b.explained_variance;
  }
};

/// Fits on `rows` (missing entries replaced by the column mean). Components
/// are the top eigenvectors of the sample covariance, each flipped so its
/// largest-magnitude entry is positive. Throws InputError if d_keep exceeds
/// min(rows, cols) and NumericError if every column is constant.
PcaModel pca_fit(const Matrix& rows, std::size_t d_keep, std::string block = {});

/// (rows - mean) * components, with missing entries imputed by the mean.
Matrix pca_transform(const PcaModel& model, const Matrix& rows);

enum class Block { orig, nfa, sf, pearl };

std::string_view to_string(Block b);
Block parse_block(std::string_view s);

struct ColumnMeta {
  Block block = Block::orig;
  std::string name;
  friend bool operator==(const ColumnMeta&, const ColumnMeta&) = default;
};

struct AssembleOptions {
  bool use_nfa = true;
  bool use_sf = true;
  bool use_pearl = true;
  /// A block wider than this is reduced by PCA (orig and nfa only).
  std::size_t pca_threshold = 128;
  std::size_t pca_dims = 64;
};

/// [orig | nfa | sf | pearl], each block optional.
struct AugmentedTable {
  Matrix values;
  std::vector<ColumnMeta> columns;
  std::vector<PcaModel> pca;

  std::size_t width(Block b) const;
};

/// Numerical columns as-is, categorical columns one-hot over their full
/// vocabulary (a missing category gives a row of missing markers).
Matrix encode_original(const FeatureTable& features, std::vector<std::string>* names = nullptr);

/// Blocks that are disabled in `opts` may be null.
AugmentedTable assemble_features(const Dataset& ds, const NfaTable* nfa,
                                 const StructuralFeatures* sf, const Matrix* pearl,
                                 const Split& split, const AssembleOptions& opts);

/// CSV with a `block.name` header, plus a JSON sidecar describing the blocks,
/// the PCA models and whatever the caller puts in `provenance`.
void write_augmented(const AugmentedTable& t, const std::filesystem::path& csv_path,
                     const std::filesystem::path& sidecar_path,
                     const nlohmann::ordered_json& provenance);

/// Reads the CSV written by write_augmented (PCA models are not restored).
AugmentedTable read_augmented(const std::filesystem::path& csv_path);

}  // namespace gtab
