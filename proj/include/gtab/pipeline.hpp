#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gtab/assemble.hpp"
#include "gtab/dataset.hpp"
#include "gtab/metrics.hpp"
#include "gtab/pearl.hpp"
#include "gtab/predictors.hpp"
#include "gtab/structural.hpp"

namespace gtab {

struct FeaturizeOptions {
  AssembleOptions assemble;
  StructuralConfig structural;
  PearlConfig pearl;
  /// 0 keeps the shared untrained encoder; otherwise PEARL is trained on the
  /// train split for this many full-batch steps.
  std::size_t pearl_train_epochs = 0;
  double pearl_learning_rate = 0.01;
  /// Overrides init_weights when set.
  std::shared_ptr<const PearlWeights> pearl_weights;
};

/// Every block the options enable, computed once.
struct FeatureBlocks {
  std::optional<NfaTable> nfa;
  std::optional<StructuralFeatures> sf;
  std::optional<Matrix> pearl;
  std::optional<PearlWeights> pearl_weights;
};

FeatureBlocks compute_blocks(const Dataset& ds, const Split& split, const FeaturizeOptions& opts);

AugmentedTable featurize(const Dataset& ds, const Split& split, const FeaturizeOptions& opts);

/// Options and seeds, for the sidecar document.
nlohmann::ordered_json featurize_provenance(const FeaturizeOptions& opts, const Split& split);

/// Train rows (optionally followed by validation rows) and test rows of an
/// augmented table.
PredictRequest make_request(const AugmentedTable& table, const Dataset& ds, const Split& split,
                            bool val_in_context = false);

/// Metric for the task: average precision (binary), accuracy (multiclass) or
/// R^2 (regression) over `nodes`.
MetricResult evaluate_prediction(const Dataset& ds, std::span<const NodeId> nodes,
                                 const Prediction& pred);

enum class PredictorKind { knn, linear, bridge };
PredictorKind parse_predictor_kind(std::string_view s);

struct PredictorOptions {
  PredictorKind kind = PredictorKind::knn;
  std::size_t k = 5;
  LinearOptions linear;
  /// Class permutations averaged per prediction; 0 disables the wrapper.
  std::size_t label_shuffles = 10;
  std::filesystem::path bridge_dir;
  std::chrono::milliseconds bridge_timeout{600000};
  bool val_in_context = false;
};

std::shared_ptr<const Predictor> make_predictor(const PredictorOptions& opts, TaskKind task,
                                                std::uint64_t seed);

struct EvaluationReport {
  std::string predictor;
  std::string metric;
  std::vector<std::uint64_t> seeds;
  std::vector<double> values;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over seeds

  nlohmann::ordered_json to_json() const;
};

/// Runs the predictor once per seed (seed, seed + 1, ...); the seed drives the
/// predictor's own randomness.
EvaluationReport evaluate_seeds(const AugmentedTable& table, const Dataset& ds, const Split& split,
                                const PredictorOptions& opts, std::size_t n_seeds,
                                std::uint64_t first_seed);

struct AblationRow {
  std::string label;
  std::size_t width = 0;
  EvaluationReport report;
};

/// The five component variants, in order: full, w/o NFA, w/o SF & PEARL,
/// w/o SF, w/o PEARL.
std::vector<std::pair<std::string, AssembleOptions>> ablation_variants(const AssembleOptions& base);

std::vector<AblationRow> run_ablation(const Dataset& ds, const Split& split,
                                      const FeaturizeOptions& opts, const PredictorOptions& popts,
                                      std::size_t n_seeds, std::uint64_t first_seed);

std::string format_ablation_table(const std::vector<AblationRow>& rows);

/// Two-block stochastic block model with pure-noise node features; the label
/// is the block.
struct SbmOptions {
  std::size_t n_nodes = 1000;
  double p_in = 0.016;
  double p_out = 0.004;
  std::size_t n_numerical = 4;
  std::size_t n_categorical = 1;
  std::size_t categories = 3;
  double missing_rate = 0.0;
  std::uint64_t seed = 0;
};

Dataset make_sbm_dataset(const SbmOptions& opts);

}  // namespace gtab
