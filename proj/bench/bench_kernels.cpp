// Serial reference kernels against their OpenMP versions.
// Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include "gtab/nfa.hpp"
#include "gtab/pearl.hpp"
#include "gtab/predictors.hpp"
#include "gtab/rng.hpp"
#include "gtab/structural.hpp"

namespace {

using namespace gtab;

Graph make_graph(std::size_t n, double avg_degree) {
  Rng rng(n);
  std::vector<Edge> edges;
  for (std::size_t e = 0; e < static_cast<std::size_t>(avg_degree * double(n) / 2); ++e) {
    edges.push_back({static_cast<NodeId>(rng.index(n)), static_cast<NodeId>(rng.index(n))});
  }
  return Graph::from_edges(n, edges);
}

std::vector<double> make_column(std::size_t n) {
  Rng rng(7);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

PredictRequest make_request(std::size_t n_train, std::size_t n_test) {
  PredictRequest r;
  r.task = TaskKind::multiclass;
  r.n_classes = 4;
  r.train_x = random_node_features(n_train, 32, 1, 0);
  r.test_x = random_node_features(n_test, 32, 2, 0);
  for (std::size_t i = 0; i < n_train; ++i) r.train_y.push_back(double(i % 4));
  return r;
}

template <bool Parallel>
void BM_NfaNumerical(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Graph g = make_graph(n, 20);
  const auto col = make_column(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? nfa_numerical(g, col) : serial::nfa_numerical(g, col));
  }
}

template <bool Parallel>
void BM_PageRank(benchmark::State& state) {
  const Graph g = make_graph(static_cast<std::size_t>(state.range(0)), 20);
  const StructuralConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(Parallel ? pagerank(g, cfg) : serial::pagerank(g, cfg));
}

template <bool Parallel>
void BM_MeanAggregate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Graph g = make_graph(n, 20);
  const Matrix h = random_node_features(n, 64, 3, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? mean_aggregate(g, h) : serial::mean_aggregate(g, h));
  }
}

template <bool Parallel>
void BM_Knn(benchmark::State& state) {
  const PredictRequest req = make_request(static_cast<std::size_t>(state.range(0)), 2000);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? knn_predict(req, 5) : serial::knn_predict(req, 5));
  }
}

}  // namespace

BENCHMARK(BM_NfaNumerical<false>)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NfaNumerical<true>)->Arg(100000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_PageRank<false>)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PageRank<true>)->Arg(100000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MeanAggregate<false>)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MeanAggregate<true>)->Arg(100000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Knn<false>)->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Knn<true>)->Arg(5000)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
