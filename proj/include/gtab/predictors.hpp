#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gtab/dataset.hpp"
#include "gtab/types.hpp"

namespace gtab {

struct PredictRequest {
  Matrix train_x;
  std::vector<double> train_y;
  Matrix test_x;
  TaskKind task = TaskKind::regression;
  std::size_t n_classes = 0;
  /// Optional column names, forwarded to the bridge.
  std::vector<std::string> feature_names;

  void validate() const;
};

/// Classification: one probability row per test row. Regression: one column.
struct Prediction {
  TaskKind task = TaskKind::regression;
  Matrix values;

  /// Argmax per row, lowest class on ties.
  std::vector<std::size_t> predicted_classes() const;
  /// Probability of class 1 (binary) or the regression value.
  std::vector<double> scores() const;
  /// Throws NumericError unless every classification row is a probability
  /// vector within 1e-6.
  void validate() const;
};

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual Prediction predict(const PredictRequest& req) const = 0;
  virtual std::string name() const = 0;
};

/// k nearest neighbors after z-scoring with train statistics (missing values
/// become the train mean). Distance ties go to the lower train index.
Prediction knn_predict(const PredictRequest& req, std::size_t k);

struct LinearOptions {
  double l2 = 1e-3;
  double learning_rate = 0.5;
  std::size_t epochs = 500;
};

/// Ridge regression in closed form, or multinomial logistic regression by
/// full-batch gradient descent from zero weights. Inputs are z-scored with
/// train statistics; the intercept is not penalized.
Prediction linear_train_predict(const PredictRequest& req, const LinearOptions& opts);

/// The class permutations label_shuffle_wrap averages over: all of them in
/// lexicographic order when n_classes! <= n_shuffles, otherwise the identity
/// followed by n_shuffles - 1 seeded random permutations.
std::vector<std::vector<std::size_t>> shuffle_permutations(std::size_t n_classes,
                                                           std::size_t n_shuffles,
                                                           std::uint64_t seed);

/// Runs `inner` once per class permutation on relabeled targets, maps the
/// probability columns back and averages. Classification only.
Prediction label_shuffle_wrap(const Predictor& inner, const PredictRequest& req,
                              std::size_t n_shuffles, std::uint64_t seed);

class KnnPredictor final : public Predictor {
 public:
  explicit KnnPredictor(std::size_t k) : k_(k) {}
  Prediction predict(const PredictRequest& req) const override { return knn_predict(req, k_); }
  std::string name() const override { return "knn"; }

 private:
  std::size_t k_;
};

class LinearPredictor final : public Predictor {
 public:
  explicit LinearPredictor(LinearOptions opts = {}) : opts_(opts) {}
  Prediction predict(const PredictRequest& req) const override {
    return linear_train_predict(req, opts_);
  }
  std::string name() const override { return "linear"; }

 private:
  LinearOptions opts_;
};

/// Applies label_shuffle_wrap for classification, passes regression through.
class LabelShuffleWrapper final : public Predictor {
 public:
  LabelShuffleWrapper(std::shared_ptr<const Predictor> inner, std::size_t n_shuffles,
                      std::uint64_t seed)
      : inner_(std::move(inner)), n_shuffles_(n_shuffles), seed_(seed) {}
  Prediction predict(const PredictRequest& req) const override;
  std::string name() const override { return inner_->name() + "+shuffle"; }

 private:
  std::shared_ptr<const Predictor> inner_;
  std::size_t n_shuffles_;
  std::uint64_t seed_;
};

namespace serial {
Prediction knn_predict(const PredictRequest& req, std::size_t k);
}  // namespace serial

}  // namespace gtab
