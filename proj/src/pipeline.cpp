#include "gtab/pipeline.hpp"

#include <cmath>
#include <algorithm>
#include <cstdio>
#include <sstream>

#include "gtab/bridge.hpp"
#include "gtab/error.hpp"
#include "gtab/nfa.hpp"
#include "gtab/rng.hpp"

namespace gtab {

FeatureBlocks compute_blocks(const Dataset& ds, const Split& split, const FeaturizeOptions& opts) {
  FeatureBlocks b;
  if (opts.assemble.use_nfa) b.nfa = compute_nfa(ds.graph, ds.features);
  if (opts.assemble.use_sf) b.sf = structural_features(ds.graph, opts.structural);
  if (opts.assemble.use_pearl) {
    PearlWeights w = opts.pearl_weights ? *opts.pearl_weights : init_weights(opts.pearl);
    if (opts.pearl_train_epochs > 0) {
      PearlTrainOptions topts{opts.pearl_learning_rate, opts.pearl_train_epochs};
      w = train_pearl(ds.graph, opts.pearl, std::move(w), split.train, ds.task, topts).weights;
    }
    b.pearl = pearl_encode(ds.graph, opts.pearl, w);
    b.pearl_weights = std::move(w);
  }
  return b;
}

namespace {

AugmentedTable assemble_from(const Dataset& ds, const Split& split, const FeatureBlocks& b,
                             const AssembleOptions& a) {
  return assemble_features(ds, b.nfa ? &*b.nfa : nullptr, b.sf ? &*b.sf : nullptr,
                           b.pearl ? &*b.pearl : nullptr, split, a);
}

}  // namespace

AugmentedTable featurize(const Dataset& ds, const Split& split, const FeaturizeOptions& opts) {
  return assemble_from(ds, split, compute_blocks(ds, split, opts), opts.assemble);
}

nlohmann::ordered_json featurize_provenance(const FeaturizeOptions& opts, const Split& split) {
  nlohmann::ordered_json j;
  j["split_seed"] = split.seed;
  j["use_nfa"] = opts.assemble.use_nfa;
  j["use_sf"] = opts.assemble.use_sf;
  j["use_pearl"] = opts.assemble.use_pearl;
  j["pca_threshold"] = opts.assemble.pca_threshold;
  j["pca_dims"] = opts.assemble.pca_dims;
  j["structural"] = {{"pagerank_damping", opts.structural.pagerank_damping},
                     {"pagerank_tol", opts.structural.pagerank_tol},
                     {"n_eigenvectors", opts.structural.n_eigenvectors},
                     {"eig_tol", opts.structural.eig_tol}};
  j["pearl"] = {{"n_draws", opts.pearl.n_draws},
                {"d_in", opts.pearl.d_in},
                {"d_hidden", opts.pearl.d_hidden},
                {"d_out", opts.pearl.d_out},
                {"n_layers", opts.pearl.n_layers},
                {"weight_seed", opts.pearl_weights ? opts.pearl_weights->seed : opts.pearl.weight_seed},
                {"draw_seed", opts.pearl.draw_seed},
                {"train_epochs", opts.pearl_train_epochs},
                {"learning_rate", opts.pearl_learning_rate}};
  return j;
}

PredictRequest make_request(const AugmentedTable& table, const Dataset& ds, const Split& split,
                            bool val_in_context) {
  if (static_cast<std::size_t>(table.values.rows()) != ds.n_nodes()) {
    throw InputError("augmented table has " + std::to_string(table.values.rows()) +
                     " rows but the dataset has " + std::to_string(ds.n_nodes()) + " nodes");
  }
  std::vector<NodeId> context = split.train;
  if (val_in_context) context.insert(context.end(), split.val.begin(), split.val.end());
  PredictRequest req;
  req.task = ds.task.kind;
  req.n_classes = ds.task.n_classes;
  req.train_x.resize(static_cast<Eigen::Index>(context.size()), table.values.cols());
  req.test_x.resize(static_cast<Eigen::Index>(split.test.size()), table.values.cols());
  for (std::size_t i = 0; i < context.size(); ++i) {
    req.train_x.row(static_cast<Eigen::Index>(i)) = table.values.row(context[i]);
    req.train_y.push_back(ds.task.targets[context[i]]);
  }
  for (std::size_t i = 0; i < split.test.size(); ++i) {
    req.test_x.row(static_cast<Eigen::Index>(i)) = table.values.row(split.test[i]);
  }
  for (const auto& c : table.columns) req.feature_names.push_back(std::string(to_string(c.block)) + "." + c.name);
  return req;
}

MetricResult evaluate_prediction(const Dataset& ds, std::span<const NodeId> nodes,
                                 const Prediction& pred) {
  if (static_cast<std::size_t>(pred.values.rows()) != nodes.size()) {
    throw InputError("prediction row count differs from the evaluated node count");
  }
  MetricResult m;
  m.n_eval = nodes.size();
  switch (ds.task.kind) {
    case TaskKind::binary: {
      std::vector<int> labels;
      for (NodeId v : nodes) labels.push_back(ds.task.targets[v] == 1.0 ? 1 : 0);
      const auto scores = pred.scores();
      m.name = "average_precision";
      m.value = average_precision(scores, labels);
      break;
    }
    case TaskKind::multiclass: {
      std::vector<std::size_t> labels;
      for (NodeId v : nodes) labels.push_back(static_cast<std::size_t>(ds.task.targets[v]));
      const auto predicted = pred.predicted_classes();
      m.name = "accuracy";
      m.value = accuracy(predicted, labels);
      break;
    }
    case TaskKind::regression: {
      std::vector<double> target;
      for (NodeId v : nodes) target.push_back(ds.task.targets[v]);
      const auto values = pred.scores();
      m.name = "r2";
      m.value = r2(values, target);
      break;
    }
  }
  return m;
}

PredictorKind parse_predictor_kind(std::string_view s) {
  if (s == "knn") return PredictorKind::knn;
  if (s == "linear") return PredictorKind::linear;
  if (s == "bridge") return PredictorKind::bridge;
  throw InputError("unknown predictor '" + std::string(s) + "'");
}

std::shared_ptr<const Predictor> make_predictor(const PredictorOptions& opts, TaskKind task,
                                                std::uint64_t seed) {
  std::shared_ptr<const Predictor> base;
  switch (opts.kind) {
    case PredictorKind::knn: base = std::make_shared<KnnPredictor>(opts.k); break;
    case PredictorKind::linear: base = std::make_shared<LinearPredictor>(opts.linear); break;
    case PredictorKind::bridge:
      base = std::make_shared<BridgePredictor>(opts.bridge_dir, opts.bridge_timeout);
      break;
  }
  if (is_classification(task) && opts.label_shuffles > 0) {
    return std::make_shared<LabelShuffleWrapper>(base, opts.label_shuffles, seed);
  }
  return base;
}

nlohmann::ordered_json EvaluationReport::to_json() const {
  nlohmann::ordered_json j;
  j["predictor"] = predictor;
  j["metric"] = metric;
  j["mean"] = mean;
  j["std"] = std;
  j["seeds"] = seeds;
  j["values"] = values;
  return j;
}

EvaluationReport evaluate_seeds(const AugmentedTable& table, const Dataset& ds, const Split& split,
                                const PredictorOptions& opts, std::size_t n_seeds,
                                std::uint64_t first_seed) {
  if (n_seeds == 0) throw InputError("n_seeds must be at least 1");
  const PredictRequest req = make_request(table, ds, split, opts.val_in_context);
  EvaluationReport rep;
  for (std::size_t s = 0; s < n_seeds; ++s) {
    const std::uint64_t seed = first_seed + s;
    auto predictor = make_predictor(opts, ds.task.kind, seed);
    rep.predictor = predictor->name();
    Prediction p = predictor->predict(req);
    p.validate();
    MetricResult m = evaluate_prediction(ds, split.test, p);
    rep.metric = m.name;
    rep.seeds.push_back(seed);
    rep.values.push_back(m.value);
  }
  // Offsets from the first value keep a constant series exact (mean equal to
  // the value, std exactly zero).
  const double base = rep.values.front();
  const double n = static_cast<double>(n_seeds);
  double shift = 0.0;
  for (double v : rep.values) shift += v - base;
  rep.mean = base + shift / n;
  double ss = 0.0;
  for (double v : rep.values) ss += (v - base) * (v - base);
  rep.std = std::sqrt(std::max(0.0, ss / n - (shift / n) * (shift / n)));
  return rep;
}

std::vector<std::pair<std::string, AssembleOptions>> ablation_variants(const AssembleOptions& base) {
  auto with = [&](bool nfa, bool sf, bool pearl) {
    AssembleOptions a = base;
    a.use_nfa = nfa;
    a.use_sf = sf;
    a.use_pearl = pearl;
    return a;
  };
  return {{"full", with(true, true, true)},
          {"w/o NFA", with(false, true, true)},
          {"w/o SF & PEARL", with(true, false, false)},
          {"w/o SF", with(true, false, true)},
          {"w/o PEARL", with(true, true, false)}};
}

std::vector<AblationRow> run_ablation(const Dataset& ds, const Split& split,
                                      const FeaturizeOptions& opts, const PredictorOptions& popts,
                                      std::size_t n_seeds, std::uint64_t first_seed) {
  FeaturizeOptions all = opts;
  all.assemble.use_nfa = all.assemble.use_sf = all.assemble.use_pearl = true;
  const FeatureBlocks blocks = compute_blocks(ds, split, all);
  std::vector<AblationRow> rows;
  for (const auto& [label, a] : ablation_variants(opts.assemble)) {
    const AugmentedTable t = assemble_from(ds, split, blocks, a);
    rows.push_back({label, static_cast<std::size_t>(t.values.cols()),
                    evaluate_seeds(t, ds, split, popts, n_seeds, first_seed)});
  }
  return rows;
}

std::string format_ablation_table(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  const std::string metric = rows.empty() ? "metric" : rows.front().report.metric;
  char line[160];
  std::snprintf(line, sizeof(line), "%-16s %6s  %s (mean +- std)\n", "variant", "width", metric.c_str());
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%-16s %6zu  %.2f +- %.2f\n", r.label.c_str(), r.width,
                  100.0 * r.report.mean, 100.0 * r.report.std);
    out << line;
  }
  return out.str();
}

Dataset make_sbm_dataset(const SbmOptions& opts) {
  const std::size_t n = opts.n_nodes;
  Rng rng(opts.seed);
  std::vector<int> block(n);
  for (std::size_t i = 0; i < n; ++i) block[i] = static_cast<int>(i % 2);
  rng.shuffle(block);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = block[i] == block[j] ? opts.p_in : opts.p_out;
      if (rng.uniform() < p) edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j)});
    }
  }
  Dataset ds;
  ds.graph = Graph::from_edges(n, edges);
  ds.features = FeatureTable(n);
  for (std::size_t f = 0; f < opts.n_numerical; ++f) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform() < opts.missing_rate ? kMissing : rng.normal();
    ds.features.add(FeatureColumn::numerical("x" + std::to_string(f), std::move(v)));
  }
  for (std::size_t f = 0; f < opts.n_categorical; ++f) {
    std::vector<std::string> raw(n);
    for (auto& s : raw) {
      s = rng.uniform() < opts.missing_rate ? std::string(kMissingToken)
                                            : "c" + std::to_string(rng.index(opts.categories));
    }
    ds.features.add(FeatureColumn::categorical("cat" + std::to_string(f), raw));
  }
  ds.task.kind = TaskKind::binary;
  ds.task.n_classes = 2;
  ds.task.target_name = "block";
  ds.task.targets.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.task.targets[i] = block[i];
  ds.validate();
  return ds;
}

}  // namespace gtab
