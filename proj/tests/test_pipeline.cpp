#include <doctest.h>

#include "gtab/equivariance.hpp"
#include "gtab/error.hpp"
#include "gtab/pipeline.hpp"
#include "support.hpp"

using namespace gtab;

TEST_CASE("evaluate_seeds with a deterministic predictor has zero spread") {
  const Dataset ds = testing::random_dataset(60, 0.1, TaskKind::multiclass, 3, 81);
  const Split split = make_split(ds, {0.4, 0.2, 0.4}, true, 0);
  FeaturizeOptions fo;
  fo.structural.n_eigenvectors = 2;
  const AugmentedTable t = featurize(ds, split, fo);
  PredictorOptions po;
  po.label_shuffles = 0;
  const EvaluationReport rep = evaluate_seeds(t, ds, split, po, 5, 10);
  CHECK(rep.values.size() == 5);
  CHECK(rep.std == 0.0);
  CHECK(rep.mean == rep.values[0]);
  CHECK(rep.metric == "accuracy");
  CHECK(rep.seeds == std::vector<std::uint64_t>{10, 11, 12, 13, 14});
  const auto j = rep.to_json();
  CHECK(j.contains("mean"));
  CHECK(j.contains("std"));
}

TEST_CASE("metric follows the task") {
  const Dataset bin = testing::random_dataset(60, 0.1, TaskKind::binary, 2, 82);
  const Dataset reg = testing::random_dataset(60, 0.1, TaskKind::regression, 0, 83);
  FeaturizeOptions fo;
  fo.structural.n_eigenvectors = 2;
  PredictorOptions po;
  po.kind = PredictorKind::linear;
  const Split sb = make_split(bin, {0.4, 0.2, 0.4}, true, 0);
  CHECK(evaluate_seeds(featurize(bin, sb, fo), bin, sb, po, 1, 0).metric == "average_precision");
  const Split sr = make_split(reg, {0.4, 0.2, 0.4}, false, 0);
  CHECK(evaluate_seeds(featurize(reg, sr, fo), reg, sr, po, 1, 0).metric == "r2");
}

TEST_CASE("ablation variants and table") {
  const auto v = ablation_variants({});
  REQUIRE(v.size() == 5);
  CHECK(v[0].first == "full");
  CHECK(v[1].first == "w/o NFA");
  CHECK(v[2].first == "w/o SF & PEARL");
  CHECK(v[3].first == "w/o SF");
  CHECK(v[4].first == "w/o PEARL");
  CHECK((v[2].second.use_nfa && !v[2].second.use_sf && !v[2].second.use_pearl));
  CHECK((!v[1].second.use_nfa && v[1].second.use_sf && v[1].second.use_pearl));

  SbmOptions so;
  so.n_nodes = 200;
  so.p_in = 0.06;
  so.p_out = 0.01;
  const Dataset ds = make_sbm_dataset(so);
  const Split split = make_split(ds, {}, true, 1);
  FeaturizeOptions fo;
  fo.structural.n_eigenvectors = 2;
  const auto rows = run_ablation(ds, split, fo, {}, 2, 0);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].width > rows[2].width);
  const std::string table = format_ablation_table(rows);
  for (const auto& [label, _] : v) CHECK(table.find(label) != std::string::npos);
}

TEST_CASE("featurize is deterministic and w/o SF & PEARL equals the flag combination") {
  const Dataset ds = testing::random_dataset(50, 0.1, TaskKind::binary, 2, 84);
  const Split split = make_split(ds, {0.4, 0.2, 0.4}, true, 0);
  FeaturizeOptions fo;
  fo.structural.n_eigenvectors = 2;
  const AugmentedTable a = featurize(ds, split, fo);
  const AugmentedTable b = featurize(ds, split, fo);
  CHECK(a.values.cwiseEqual(b.values).count() + (a.values.array().isNaN()).count() == a.values.size());
  fo.assemble.use_sf = fo.assemble.use_pearl = false;
  const AugmentedTable c = featurize(ds, split, fo);
  FeaturizeOptions fo2 = fo;
  fo2.assemble = ablation_variants(FeaturizeOptions{}.assemble)[2].second;
  CHECK(max_abs_deviation(c.values, featurize(ds, split, fo2).values) == 0.0);
}

TEST_CASE("trained PEARL mode runs and changes the block") {
  const Dataset ds = testing::random_dataset(50, 0.1, TaskKind::binary, 2, 85);
  const Split split = make_split(ds, {0.4, 0.2, 0.4}, true, 0);
  FeaturizeOptions fo;
  fo.structural.n_eigenvectors = 2;
  const FeatureBlocks shared = compute_blocks(ds, split, fo);
  fo.pearl_train_epochs = 5;
  const FeatureBlocks trained = compute_blocks(ds, split, fo);
  REQUIRE(trained.pearl.has_value());
  CHECK_FALSE(*trained.pearl_weights == *shared.pearl_weights);
}

TEST_CASE("sbm generator") {
  SbmOptions so;
  so.n_nodes = 300;
  so.seed = 4;
  const Dataset a = make_sbm_dataset(so);
  const Dataset b = make_sbm_dataset(so);
  CHECK(a.graph == b.graph);
  CHECK(a.features == b.features);
  CHECK(a.task.n_classes == 2);
  const auto stats = dataset_stats(a);
  CHECK(*stats.edge_homophily > 0.65);
}
