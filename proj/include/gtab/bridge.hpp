#pragma once

#include <chrono>
#include <filesystem>
#include <string>

#include "gtab/predictors.hpp"

namespace gtab {

/// Limits of the external in-context backbone.
struct BridgeLimits {
  std::size_t max_classes = 10;
  std::size_t max_train_rows = 10000;
};

/// Throws InputError when the request exceeds the backbone's limits.
void check_bridge_limits(const PredictRequest& req, const BridgeLimits& limits = {});

/// Writes a request directory `endpoint/request_id` containing train.csv
/// (features plus a final `__target__` column), test.csv, meta.json and, last,
/// an empty READY file. Returns the directory.
std::filesystem::path write_bridge_request(const PredictRequest& req,
                                           const std::filesystem::path& endpoint,
                                           const std::string& request_id);

/// Parses `predictions.csv` from a request directory whose DONE sentinel
/// exists. Throws BridgeError on a malformed response.
Prediction read_bridge_response(const std::filesystem::path& request_dir,
                                const PredictRequest& req);

/// Full round trip: limits, request, polling with backoff, response.
Prediction bridge_predict(const PredictRequest& req, const std::filesystem::path& endpoint,
                          std::chrono::milliseconds timeout, const BridgeLimits& limits = {});

class BridgePredictor final : public Predictor {
 public:
  BridgePredictor(std::filesystem::path endpoint, std::chrono::milliseconds timeout)
      : endpoint_(std::move(endpoint)), timeout_(timeout) {}
  Prediction predict(const PredictRequest& req) const override {
    return bridge_predict(req, endpoint_, timeout_);
  }
  std::string name() const override { return "bridge"; }

 private:
  std::filesystem::path endpoint_;
  std::chrono::milliseconds timeout_;
};

}  // namespace gtab
