#include "gtab/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "gtab/error.hpp"

namespace gtab {

double average_precision(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InputError("average_precision: length mismatch");
  std::size_t positives = 0;
  for (int l : labels) positives += l != 0;
  if (positives == 0) throw InputError("average_precision: no positive labels");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const double total = static_cast<double>(positives);
  double ap = 0.0;
  std::size_t seen = 0, seen_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t group_pos = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      group_pos += labels[order[j]] != 0;
      ++j;
    }
    seen += j - i;
    seen_pos += group_pos;
    if (group_pos > 0) {
      const double precision = static_cast<double>(seen_pos) / static_cast<double>(seen);
      ap += (static_cast<double>(group_pos) / total) * precision;
    }
    i = j;
  }
  return ap;
}

double accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> labels) {
  if (predicted.size() != labels.size()) throw InputError("accuracy: length mismatch");
  if (predicted.empty()) throw InputError("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double r2(std::span<const double> predicted, std::span<const double> target) {
  if (predicted.size() != target.size()) throw InputError("r2: length mismatch");
  if (target.size() < 2) throw InputError("r2: need at least 2 values");
  double mean = 0.0;
  for (double t : target) mean += t;
  mean /= static_cast<double>(target.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    ss_res += (target[i] - predicted[i]) * (target[i] - predicted[i]);
    ss_tot += (target[i] - mean) * (target[i] - mean);
  }
  if (!(ss_tot > 0.0)) throw InputError("r2: target has zero variance");
  return 1.0 - ss_res / ss_tot;
}

}  // namespace gtab
