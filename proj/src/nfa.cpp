#include "gtab/nfa.hpp"

#include <algorithm>

#include "gtab/error.hpp"

namespace gtab {

std::string NfaColumnInfo::name() const {
  switch (stat) {
    case NfaStat::mean: return source + ".mean";
    case NfaStat::max: return source + ".max";
    case NfaStat::min: return source + ".min";
    case NfaStat::cat_freq: return source + ".freq=" + category;
  }
  return source;
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

namespace {

void aggregate_numerical_row(const Graph& g, std::span<const double> column, NodeId v,
                             std::vector<double>& buf, Matrix& out) {
  buf.clear();
  for (NodeId u : g.neighbors(v)) {
    if (!is_missing(column[u])) buf.push_back(column[u]);
  }
  if (buf.empty()) {
    out.row(v).setConstant(kMissing);
    return;
  }
  std::sort(buf.begin(), buf.end());
  out(v, 0) = pairwise_sum(buf) / static_cast<double>(buf.size());
  out(v, 1) = buf.back();
  out(v, 2) = buf.front();
}

void aggregate_categorical_row(const Graph& g, std::span<const std::int32_t> codes, NodeId v,
                               std::vector<std::size_t>& counts, Matrix& out) {
  std::fill(counts.begin(), counts.end(), 0);
  std::size_t seen = 0;
  for (NodeId u : g.neighbors(v)) {
    if (codes[u] == kMissingCode) continue;
    ++counts[static_cast<std::size_t>(codes[u])];
    ++seen;
  }
  if (seen == 0) {
    out.row(v).setConstant(kMissing);
    return;
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    out(v, static_cast<Eigen::Index>(c)) =
        static_cast<double>(counts[c]) / static_cast<double>(seen);
  }
}

void check_length(const Graph& g, std::size_t len) {
  if (len != g.n_nodes()) throw InputError("feature column length differs from node count");
}

}  // namespace

Matrix nfa_numerical(const Graph& g, std::span<const double> column) {
  check_length(g, column.size());
  const auto n = static_cast<std::ptrdiff_t>(g.n_nodes());
  Matrix out(n, 3);
#pragma omp parallel
  {
    std::vector<double> buf;
#pragma omp for schedule(dynamic, 256)
    for (std::ptrdiff_t v = 0; v < n; ++v) {
      aggregate_numerical_row(g, column, static_cast<NodeId>(v), buf, out);
    }
  }
  return out;
}

Matrix nfa_categorical(const Graph& g, std::span<const std::int32_t> codes,
                       std::size_t vocab_size) {
  check_length(g, codes.size());
  const auto n = static_cast<std::ptrdiff_t>(g.n_nodes());
  Matrix out(n, static_cast<Eigen::Index>(vocab_size));
#pragma omp parallel
  {
    std::vector<std::size_t> counts(vocab_size);
#pragma omp for schedule(dynamic, 256)
    for (std::ptrdiff_t v = 0; v < n; ++v) {
      aggregate_categorical_row(g, codes, static_cast<NodeId>(v), counts, out);
    }
  }
  return out;
}

namespace serial {

Matrix nfa_numerical(const Graph& g, std::span<const double> column) {
  check_length(g, column.size());
  Matrix out(static_cast<Eigen::Index>(g.n_nodes()), 3);
  std::vector<double> buf;
  for (std::size_t v = 0; v < g.n_nodes(); ++v) {
    aggregate_numerical_row(g, column, static_cast<NodeId>(v), buf, out);
  }
  return out;
}

Matrix nfa_categorical(const Graph& g, std::span<const std::int32_t> codes,
                       std::size_t vocab_size) {
  check_length(g, codes.size());
  Matrix out(static_cast<Eigen::Index>(g.n_nodes()), static_cast<Eigen::Index>(vocab_size));
  std::vector<std::size_t> counts(vocab_size);
  for (std::size_t v = 0; v < g.n_nodes(); ++v) {
    aggregate_categorical_row(g, codes, static_cast<NodeId>(v), counts, out);
  }
  return out;
}

}  // namespace serial

NfaTable compute_nfa(const Graph& g, const FeatureTable& features) {
  if (features.n_rows() != g.n_nodes()) {
    throw InputError("feature table and graph disagree on the node count");
  }
  std::vector<Matrix> blocks;
  NfaTable table;
  Eigen::Index width = 0;
  for (const FeatureColumn& col : features.columns()) {
    if (col.kind == FeatureKind::numerical) {
      blocks.push_back(nfa_numerical(g, col.values));
      for (NfaStat s : {NfaStat::mean, NfaStat::max, NfaStat::min}) {
        table.provenance.push_back({col.name, s, {}});
      }
    } else {
      blocks.push_back(nfa_categorical(g, col.codes, col.vocabulary.size()));
      for (const auto& cat : col.vocabulary) {
        table.provenance.push_back({col.name, NfaStat::cat_freq, cat});
      }
    }
    width += blocks.back().cols();
  }
  table.values.resize(static_cast<Eigen::Index>(g.n_nodes()), width);
  Eigen::Index at = 0;
  for (const Matrix& b : blocks) {
    table.values.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  return table;
}

}  // namespace gtab
