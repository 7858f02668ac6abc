#include "gtab/equivariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "gtab/error.hpp"
#include "gtab/nfa.hpp"
#include "gtab/rng.hpp"

namespace gtab {

bool SymmetryReport::passed() const {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

nlohmann::ordered_json SymmetryReport::to_json() const {
  nlohmann::ordered_json j;
  j["check"] = check;
  j["passed"] = passed();
  j["results"] = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    j["results"].push_back({{"name", r.name},
                            {"tolerance", r.tolerance},
                            {"max_deviation", std::isfinite(r.max_deviation) ? nlohmann::ordered_json(r.max_deviation)
                                                                             : nlohmann::ordered_json("inf")},
                            {"status", r.passed ? "PASS" : "FAIL"},
                            {"statistical", r.statistical}});
  }
  return j;
}

double max_abs_deviation(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return std::numeric_limits<double>::infinity();
  double dev = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double x = a(i, j), y = b(i, j);
      if (is_missing(x) != is_missing(y)) return std::numeric_limits<double>::infinity();
      if (!is_missing(x)) dev = std::max(dev, std::abs(x - y));
    }
  }
  return dev;
}

namespace {

CheckResult make_result(std::string name, double tol, double dev, bool statistical = false) {
  return {std::move(name), tol, dev, dev <= tol, statistical};
}

// Row i of `m` moves to row new_id[i].
Matrix permute_rows(const Matrix& m, std::span<const NodeId> new_id) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.row(new_id[static_cast<std::size_t>(i)]) = m.row(i);
  return out;
}

Matrix column_matrix(const std::vector<double>& v) {
  return Eigen::Map<const Matrix>(v.data(), static_cast<Eigen::Index>(v.size()), 1);
}

double metric_with(const Dataset& ds, const Split& split, const AugmentedTable& table,
                   const Predictor& p) {
  const PredictRequest req = make_request(table, ds, split);
  return evaluate_prediction(ds, split.test, p.predict(req)).value;
}

// Per-test z threshold that keeps the two-sided false alarm rate of `m`
// tests at that of a single test at `sigmas`.
double bonferroni_sigmas(double sigmas, std::size_t m) {
  const double target = std::erfc(sigmas / std::numbers::sqrt2) / static_cast<double>(std::max<std::size_t>(m, 1));
  double lo = sigmas, hi = sigmas + 20.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (std::erfc(mid / std::numbers::sqrt2) > target ? lo : hi) = mid;
  }
  return hi;
}

// Largest z-score of the per-entry difference between the Monte Carlo means of
// encode(PG) and P * encode(G), each from `draws` independent draws.
double pearl_distribution_z(const Graph& g, const Graph& pg, std::span<const NodeId> new_id,
                            const PearlWeights& w, std::size_t draws, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(g.n_nodes());
  const auto d = static_cast<Eigen::Index>(w.d_out());
  Matrix s1 = Matrix::Zero(n, d), q1 = Matrix::Zero(n, d), s2 = s1, q2 = s1;
  for (std::size_t r = 0; r < draws; ++r) {
    const Matrix a = permute_rows(gnn_forward(g, random_node_features(g.n_nodes(), w.d_in(), seed, r), w), new_id);
    const Matrix b = gnn_forward(pg, random_node_features(g.n_nodes(), w.d_in(), seed + 1, r), w);
    s1 += a;
    q1 += a.cwiseProduct(a);
    s2 += b;
    q2 += b.cwiseProduct(b);
  }
  const double m = static_cast<double>(draws);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double m1 = s1(i, j) / m, m2 = s2(i, j) / m;
      const double v1 = std::max(0.0, q1(i, j) / m - m1 * m1) * m / (m - 1);
      const double v2 = std::max(0.0, q2(i, j) / m - m2 * m2) * m / (m - 1);
      const double se = std::sqrt(v1 / m + v2 / m);
      const double diff = std::abs(m1 - m2);
      if (se == 0.0) {
        if (diff > 1e-12) return std::numeric_limits<double>::infinity();
        continue;
      }
      worst = std::max(worst, diff / se);
    }
  }
  return worst;
}

}  // namespace

SymmetryReport check_feature_permutation(const HarnessOptions& opts, const Dataset& ds,
                                         std::span<const std::size_t> order, std::uint64_t seed) {
  const std::size_t n_cols = ds.features.n_columns();
  {
    std::vector<std::size_t> sorted(order.begin(), order.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t j = 0; j < sorted.size(); ++j) {
      if (sorted.size() != n_cols || sorted[j] != j) throw InputError("column order is not a permutation");
    }
  }
  Dataset permuted = ds;
  permuted.features = ds.features.reordered_columns(order);

  SymmetryReport rep{"feature_permutation", {}};
  const NfaTable base = compute_nfa(ds.graph, ds.features);
  const NfaTable moved = compute_nfa(permuted.graph, permuted.features);
  // Start column of each source column's group in the unpermuted output.
  std::vector<Eigen::Index> start(n_cols + 1, 0);
  for (std::size_t j = 0; j < n_cols; ++j) {
    const auto& c = ds.features.column(j);
    start[j + 1] = start[j] + (c.kind == FeatureKind::numerical ? 3 : static_cast<Eigen::Index>(c.vocabulary.size()));
  }
  Matrix expected(base.values.rows(), base.values.cols());
  std::vector<NfaColumnInfo> expected_prov;
  Eigen::Index at = 0;
  for (std::size_t j : order) {
    const Eigen::Index w = start[j + 1] - start[j];
    expected.middleCols(at, w) = base.values.middleCols(start[j], w);
    for (Eigen::Index k = 0; k < w; ++k) expected_prov.push_back(base.provenance[static_cast<std::size_t>(start[j] + k)]);
    at += w;
  }
  double nfa_dev = max_abs_deviation(expected, moved.values);
  if (expected_prov != moved.provenance) nfa_dev = std::numeric_limits<double>::infinity();
  rep.results.push_back(make_result("nfa_groups_permute", 0.0, nfa_dev));

  const Split split = make_split(ds, opts.ratios, is_classification(ds.task.kind), seed);
  const AugmentedTable t0 = featurize(ds, split, opts.featurize);
  const AugmentedTable t1 = featurize(permuted, split, opts.featurize);
  const KnnPredictor knn(opts.knn_k);
  const LinearPredictor linear(opts.linear);
  rep.results.push_back(make_result("knn_metric_invariant", 1e-6,
                                    std::abs(metric_with(ds, split, t0, knn) - metric_with(permuted, split, t1, knn))));
  rep.results.push_back(make_result("linear_metric_invariant", 1e-6,
                                    std::abs(metric_with(ds, split, t0, linear) -
                                             metric_with(permuted, split, t1, linear))));
  return rep;
}

SymmetryReport check_feature_permutation(const HarnessOptions& opts, const Dataset& ds,
                                         std::uint64_t seed) {
  Rng rng(seed, 1);
  const auto order = random_permutation<std::size_t>(ds.features.n_columns(), rng);
  return check_feature_permutation(opts, ds, order, seed);
}

SymmetryReport check_node_permutation(const HarnessOptions& opts, const Dataset& ds,
                                      std::span<const NodeId> new_id, std::uint64_t seed) {
  validate_permutation(new_id, ds.n_nodes());
  const Dataset pds = ds.permuted(new_id);
  const Graph& g = ds.graph;
  const Graph& pg = pds.graph;
  SymmetryReport rep{"node_permutation", {}};

  rep.results.push_back(make_result(
      "degree_commutes", 0.0,
      max_abs_deviation(permute_rows(column_matrix(degrees(g)), new_id), column_matrix(degrees(pg)))));

  const StructuralConfig& scfg = opts.featurize.structural;
  rep.results.push_back(make_result("pagerank_commutes", 0.0,
                                    max_abs_deviation(permute_rows(column_matrix(pagerank(g, scfg)), new_id),
                                                      column_matrix(pagerank(pg, scfg)))));

  rep.results.push_back(make_result(
      "nfa_commutes", 0.0,
      max_abs_deviation(permute_rows(compute_nfa(g, ds.features).values, new_id),
                        compute_nfa(pg, pds.features).values)));

  if (scfg.n_eigenvectors > 0) {
    const Matrix v = permute_rows(laplacian_eigenvectors(g, scfg).vectors, new_id);
    const Matrix pv = laplacian_eigenvectors(pg, scfg).vectors;
    const double dev = (v * v.transpose() - pv * pv.transpose()).norm();
    rep.results.push_back(make_result("laplacian_projector_commutes", 1e-6, dev));
  }

  const PearlWeights w = opts.featurize.pearl_weights ? *opts.featurize.pearl_weights
                                                      : init_weights(opts.featurize.pearl);
  const Matrix x = random_node_features(g.n_nodes(), w.d_in(), seed, 0);
  rep.results.push_back(make_result(
      "gnn_forward_commutes", 1e-5,
      max_abs_deviation(permute_rows(gnn_forward(g, x, w), new_id), gnn_forward(pg, permute_rows(x, new_id), w))));

  if (opts.statistical_draws > 1) {
    const double bound = bonferroni_sigmas(opts.statistical_sigmas, g.n_nodes() * w.d_out());
    double z = pearl_distribution_z(g, pg, new_id, w, opts.statistical_draws, seed * 4 + 100);
    if (!(z <= bound)) z = pearl_distribution_z(g, pg, new_id, w, opts.statistical_draws, seed * 4 + 102);
    rep.results.push_back(make_result("pearl_encode_commutes_in_distribution", bound, z, true));
  }
  return rep;
}

SymmetryReport check_node_permutation(const HarnessOptions& opts, const Dataset& ds,
                                      std::uint64_t seed) {
  Rng rng(seed, 2);
  const auto new_id = random_permutation<NodeId>(ds.n_nodes(), rng);
  return check_node_permutation(opts, ds, new_id, seed);
}

SymmetryReport check_label_permutation(const HarnessOptions& opts, const Dataset& ds,
                                       std::uint64_t seed) {
  if (!is_classification(ds.task.kind)) throw InputError("label permutation check needs a classification task");
  const std::size_t c = ds.task.n_classes;
  if (c > 4) throw InputError("label permutation check is exhaustive and limited to 4 classes");
  std::size_t n_perms = 1;
  for (std::size_t i = 2; i <= c; ++i) n_perms *= i;

  const Split split = make_split(ds, opts.ratios, true, seed);
  const AugmentedTable table = featurize(ds, split, opts.featurize);
  const PredictRequest req = make_request(table, ds, split);

  SymmetryReport rep{"label_permutation", {}};
  const KnnPredictor knn(opts.knn_k);
  const LinearPredictor linear(opts.linear);
  for (const Predictor* inner : {static_cast<const Predictor*>(&knn), static_cast<const Predictor*>(&linear)}) {
    const Prediction base = label_shuffle_wrap(*inner, req, n_perms, seed);
    double dev = 0.0;
    std::vector<std::size_t> sigma(c);
    std::iota(sigma.begin(), sigma.end(), 0);
    do {
      PredictRequest relabeled = req;
      for (auto& y : relabeled.train_y) y = static_cast<double>(sigma[static_cast<std::size_t>(y)]);
      const Prediction out = label_shuffle_wrap(*inner, relabeled, n_perms, seed);
      for (std::size_t k = 0; k < c; ++k) {
        dev = std::max(dev, (out.values.col(static_cast<Eigen::Index>(sigma[k])) -
                             base.values.col(static_cast<Eigen::Index>(k))).cwiseAbs().maxCoeff());
      }
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    rep.results.push_back(make_result(inner->name() + "_shuffle_equivariant", 1e-6, dev));
  }
  return rep;
}

}  // namespace gtab
