#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gtab/dataset.hpp"
#include "gtab/graph.hpp"
#include "gtab/types.hpp"

namespace gtab {

/// Seed of the untrained encoder shared by every dataset in in-context mode.
inline constexpr std::uint64_t kSharedWeightSeed = 0x9e3779b97f4a7c15ULL;

struct PearlConfig {
  std::size_t n_draws = 8;  // random feature draws averaged per encoding
  std::size_t d_in = 16;
  std::size_t d_hidden = 64;
  std::size_t d_out = 16;
  std::size_t n_layers = 2;
  std::uint64_t weight_seed = kSharedWeightSeed;
  std::uint64_t draw_seed = 0;

  void validate() const;
};

/// h_out = h_in * weight + bias, weight is fan_in x fan_out.
struct DenseLayer {
  Matrix weight;
  Vector bias;
  friend bool operator==(const DenseLayer& a, const DenseLayer& b) {
    return a.weight == b.weight && a.bias == b.bias;
  }
};

struct PearlWeights {
  std::vector<DenseLayer> layers;
  std::uint64_t seed = 0;

  std::size_t d_in() const { return static_cast<std::size_t>(layers.front().weight.rows()); }
  std::size_t d_out() const { return static_cast<std::size_t>(layers.back().weight.cols()); }
  friend bool operator==(const PearlWeights&, const PearlWeights&) = default;
};

/// Glorot-uniform weights drawn from `cfg.weight_seed`, zero biases. Values
/// are rounded to single precision so the binary format stores them exactly.
PearlWeights init_weights(const PearlConfig& cfg);

/// Row i becomes the mean of rows {i} and N(i).
Matrix mean_aggregate(const Graph& g, const Matrix& h);

/// Adjoint of mean_aggregate: row j becomes the sum over i in {j} and N(j) of
/// row i divided by (deg(i) + 1).
Matrix mean_aggregate_transpose(const Graph& g, const Matrix& h);

/// Message passing network: each layer aggregates with mean_aggregate, then
/// applies its dense layer; ReLU between layers, linear output, no
/// normalization or residual path. Throws NumericError on a non-finite output.
Matrix gnn_forward(const Graph& g, const Matrix& node_features, const PearlWeights& w);

/// Standard normal n x d matrix for draw number `draw` of `draw_seed`.
Matrix random_node_features(std::size_t n, std::size_t d, std::uint64_t draw_seed,
                            std::uint64_t draw);

/// Average of gnn_forward over draws 0..n_draws-1. Draws run in parallel and
/// are summed in draw order.
Matrix pearl_encode(const Graph& g, const PearlConfig& cfg, const PearlWeights& w);

/// Binary weight file: "PRLW", u32 version, u32 layer count, u64 seed,
/// u32 dims (layer count + 1), then per layer the row-major weight and the
/// bias as float32. All integers and floats little-endian.
void save_weights(const PearlWeights& w, const std::filesystem::path& path);
PearlWeights load_weights(const std::filesystem::path& path);

namespace serial {
Matrix mean_aggregate(const Graph& g, const Matrix& h);
}  // namespace serial

// Trainable mode: a linear (regression) or softmax (classification) head on
// top of the averaged encoding, trained jointly by full-batch gradient steps.

struct PearlHead {
  Matrix weight;  // d_out x n_outputs
  Vector bias;
};

struct PearlGradients {
  std::vector<DenseLayer> layers;
  PearlHead head;
};

struct PearlTrainOptions {
  double learning_rate = 0.01;
  std::size_t epochs = 50;
};

struct PearlTrainResult {
  PearlWeights weights;
  PearlHead head;
  std::vector<double> loss;  // per epoch, before the update
};

/// Loss of the head on the train nodes for the draws of `epoch`, and its
/// gradient when `grads` is non-null. Mean cross-entropy for classification,
/// mean squared error for regression.
double pearl_loss(const Graph& g, const PearlConfig& cfg, const PearlWeights& w,
                  const PearlHead& head, std::span<const NodeId> train_nodes,
                  const TaskSpec& task, std::size_t epoch, PearlGradients* grads);

PearlTrainResult train_pearl(const Graph& g, const PearlConfig& cfg, PearlWeights init,
                             std::span<const NodeId> train_nodes, const TaskSpec& task,
                             const PearlTrainOptions& opts);

}  // namespace gtab
