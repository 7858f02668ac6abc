#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include <Eigen/Dense>

namespace gtab {

/// Node-by-feature matrices are stored row-major so that a node's row is
/// contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using NodeId = std::uint32_t;

/// Missing numerical value. Categorical columns use kMissingCode instead.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline constexpr std::int32_t kMissingCode = -1;

inline bool is_missing(double v) { return std::isnan(v); }

/// Bitwise equality that treats two missing markers as equal.
inline bool same_value(double a, double b) {
  return (is_missing(a) && is_missing(b)) || a == b;
}

}  // namespace gtab
