#pragma once

#include <span>
#include <string>

namespace gtab {

struct MetricResult {
  std::string name;  // average_precision | accuracy | r2
  double value = 0.0;
  std::size_t n_eval = 0;
};

/// Average precision over thresholds at the distinct scores: the sum, over
/// groups of tied scores in descending order, of the recall gained by the
/// group times the precision with the whole group included. Throws
/// InputError when there is no positive label.
double average_precision(std::span<const double> scores, std::span<const int> labels);

/// Fraction of equal entries. Throws InputError on empty or mismatched input.
double accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> labels);

/// 1 - SS_res / SS_tot. Throws InputError for n < 2 or constant targets.
double r2(std::span<const double> predicted, std::span<const double> target);

}  // namespace gtab
