#include <doctest.h>

#include <omp.h>

#include "gtab/equivariance.hpp"
#include "gtab/nfa.hpp"
#include "gtab/pearl.hpp"
#include "gtab/predictors.hpp"
#include "gtab/structural.hpp"
#include "support.hpp"

using namespace gtab;

TEST_CASE("parallel kernels equal their serial references bitwise for any thread count") {
  Rng rng(91);
  const Graph g = testing::sparse_random_graph(5000, 8, rng);
  const FeatureTable ft = testing::random_features(5000, 1, 1, 6, 0.1, rng);
  std::vector<double> x(5000);
  for (auto& v : x) v = rng.normal();
  const Matrix h = random_node_features(5000, 8, 1, 0);
  PredictRequest req;
  req.task = TaskKind::multiclass;
  req.n_classes = 3;
  req.train_x = random_node_features(400, 5, 2, 0);
  req.test_x = random_node_features(300, 5, 3, 0);
  for (int i = 0; i < 400; ++i) req.train_y.push_back(i % 3);
  const StructuralConfig cfg;
  const PearlConfig pc;
  const PearlWeights w = init_weights(pc);

  const auto pr = serial::pagerank(g, cfg);
  const Matrix nfa = serial::nfa_numerical(g, x);
  const auto& cat = ft.column(1);
  const Matrix nfac = serial::nfa_categorical(g, cat.codes, cat.vocabulary.size());
  const Matrix agg = serial::mean_aggregate(g, h);
  const Matrix knn = serial::knn_predict(req, 7).values;
  omp_set_num_threads(1);
  const Matrix enc1 = pearl_encode(g, pc, w);
  for (int threads : {1, 2, 4, 7}) {
    omp_set_num_threads(threads);
    CHECK(pagerank(g, cfg) == pr);
    CHECK(max_abs_deviation(nfa_numerical(g, x), nfa) == 0.0);
    CHECK(max_abs_deviation(nfa_categorical(g, cat.codes, cat.vocabulary.size()), nfac) == 0.0);
    CHECK(mean_aggregate(g, h) == agg);
    CHECK(knn_predict(req, 7).values == knn);
    CHECK(pearl_encode(g, pc, w) == enc1);
  }
}
