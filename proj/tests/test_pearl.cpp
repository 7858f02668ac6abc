#include <doctest.h>

#include <cmath>
#include <fstream>

#include "gtab/equivariance.hpp"
#include "gtab/error.hpp"
#include "gtab/pearl.hpp"
#include "support.hpp"

using namespace gtab;

namespace {

std::vector<Matrix> weight_list(const PearlWeights& w) {
  std::vector<Matrix> out;
  for (const auto& l : w.layers) out.push_back(l.weight);
  return out;
}

std::vector<std::vector<double>> bias_list(const PearlWeights& w) {
  std::vector<std::vector<double>> out;
  for (const auto& l : w.layers) out.emplace_back(l.bias.data(), l.bias.data() + l.bias.size());
  return out;
}

PearlConfig small_config() {
  PearlConfig cfg;
  cfg.d_in = 4;
  cfg.d_hidden = 6;
  cfg.d_out = 3;
  cfg.n_layers = 2;
  cfg.n_draws = 3;
  return cfg;
}

}  // namespace

TEST_CASE("weights: shapes, Glorot range, float precision, seed dependence") {
  PearlConfig cfg;
  cfg.n_layers = 3;
  const PearlWeights w = init_weights(cfg);
  REQUIRE(w.layers.size() == 3);
  CHECK(w.layers[0].weight.rows() == 16);
  CHECK(w.layers[0].weight.cols() == 64);
  CHECK(w.layers[2].weight.cols() == 16);
  const double limit = std::sqrt(6.0 / (16 + 64));
  CHECK(w.layers[0].weight.cwiseAbs().maxCoeff() <= limit);
  for (Eigen::Index i = 0; i < w.layers[1].weight.size(); ++i) {
    const double x = w.layers[1].weight.data()[i];
    CHECK(static_cast<double>(static_cast<float>(x)) == x);
  }
  CHECK(w.layers[0].bias.isZero());
  CHECK(init_weights(cfg) == w);
  cfg.weight_seed = 1;
  CHECK_FALSE(init_weights(cfg) == w);
}

TEST_CASE("gnn_forward matches the dense propagation oracle") {
  Rng rng(31);
  for (std::size_t layers : {1u, 2u, 3u}) {
    PearlConfig cfg = small_config();
    cfg.n_layers = layers;
    PearlWeights w = init_weights(cfg);
    for (auto& l : w.layers) l.bias = Vector::Random(l.bias.size());
    const Graph g = testing::random_graph(25, 0.15, rng);
    const Matrix x = random_node_features(25, cfg.d_in, 7, 0);
    const Matrix got = gnn_forward(g, x, w);
    const Matrix want = testing::oracle_gnn(g, x, weight_list(w), bias_list(w));
    CHECK(max_abs_deviation(got, want) < 1e-12);
  }
}

TEST_CASE("mean_aggregate_transpose is the adjoint") {
  Rng rng(32);
  const Graph g = testing::random_graph(30, 0.2, rng);
  const Matrix x = random_node_features(30, 3, 1, 0);
  const Matrix y = random_node_features(30, 3, 2, 0);
  const double lhs = (mean_aggregate(g, x).array() * y.array()).sum();
  const double rhs = (x.array() * mean_aggregate_transpose(g, y).array()).sum();
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  CHECK(max_abs_deviation(mean_aggregate(g, x), serial::mean_aggregate(g, x)) == 0.0);
}

TEST_CASE("random features: deterministic per (seed, draw), roughly standard normal") {
  const Matrix a = random_node_features(200, 10, 5, 3);
  CHECK(a == random_node_features(200, 10, 5, 3));
  CHECK_FALSE(a == random_node_features(200, 10, 5, 4));
  CHECK_FALSE(a == random_node_features(200, 10, 6, 3));
  CHECK(std::abs(a.mean()) < 0.1);
  CHECK(std::abs((a.array() * a.array()).mean() - 1.0) < 0.1);
}

TEST_CASE("pearl_encode is the mean of the per-draw outputs") {
  Rng rng(33);
  const PearlConfig cfg = small_config();
  const PearlWeights w = init_weights(cfg);
  const Graph g = testing::random_graph(20, 0.2, rng);
  Matrix sum = Matrix::Zero(20, cfg.d_out);
  for (std::size_t r = 0; r < cfg.n_draws; ++r) sum += gnn_forward(g, random_node_features(20, cfg.d_in, cfg.draw_seed, r), w);
  const Matrix enc = pearl_encode(g, cfg, w);
  CHECK(max_abs_deviation(enc, sum / double(cfg.n_draws)) < 1e-12);
  CHECK(enc == pearl_encode(g, cfg, w));
}

TEST_CASE("weight file round trip and corruption") {
  testing::TempDir tmp;
  PearlConfig cfg;
  const PearlWeights w = init_weights(cfg);
  save_weights(w, tmp.path / "w.bin");
  CHECK(load_weights(tmp.path / "w.bin") == w);
  CHECK(std::filesystem::file_size(tmp.path / "w.bin") ==
        4 + 4 + 4 + 8 + 4 * 3 + 4 * (16 * 64 + 64 + 64 * 16 + 16));
  std::filesystem::resize_file(tmp.path / "w.bin", 100);
  CHECK_THROWS_AS(load_weights(tmp.path / "w.bin"), InputError);
  std::ofstream(tmp.path / "bad.bin") << "NOPE";
  CHECK_THROWS_AS(load_weights(tmp.path / "bad.bin"), InputError);
}

TEST_CASE("pearl_loss gradient matches finite differences") {
  Rng rng(34);
  const Graph g = testing::random_graph(15, 0.25, rng);
  const PearlConfig cfg = small_config();
  std::vector<NodeId> train{0, 2, 3, 5, 8, 9, 12};
  for (TaskKind kind : {TaskKind::multiclass, TaskKind::regression}) {
    TaskSpec task;
    task.kind = kind;
    task.n_classes = kind == TaskKind::multiclass ? 3 : 0;
    for (std::size_t i = 0; i < 15; ++i) task.targets.push_back(kind == TaskKind::multiclass ? double(i % 3) : rng.normal());
    PearlWeights w = init_weights(cfg);
    for (auto& l : w.layers) l.bias = Vector::Constant(l.bias.size(), 0.05);
    PearlHead head;
    const Eigen::Index outs = kind == TaskKind::multiclass ? 3 : 1;
    head.weight = Matrix::Random(cfg.d_out, outs);
    head.bias = Vector::Random(outs);
    PearlGradients grads;
    pearl_loss(g, cfg, w, head, train, task, 1, &grads);
    const double h = 1e-6;
    for (std::size_t l = 0; l < w.layers.size(); ++l) {
      for (Eigen::Index k : {Eigen::Index(0), w.layers[l].weight.size() / 2, w.layers[l].weight.size() - 1}) {
        PearlWeights wp = w, wm = w;
        wp.layers[l].weight.data()[k] += h;
        wm.layers[l].weight.data()[k] -= h;
        const double fd = (pearl_loss(g, cfg, wp, head, train, task, 1, nullptr) -
                           pearl_loss(g, cfg, wm, head, train, task, 1, nullptr)) / (2 * h);
        CHECK(grads.layers[l].weight.data()[k] == doctest::Approx(fd).epsilon(1e-5).scale(1e-3));
      }
      PearlWeights wp = w, wm = w;
      wp.layers[l].bias[0] += h;
      wm.layers[l].bias[0] -= h;
      const double fd = (pearl_loss(g, cfg, wp, head, train, task, 1, nullptr) -
                         pearl_loss(g, cfg, wm, head, train, task, 1, nullptr)) / (2 * h);
      CHECK(grads.layers[l].bias[0] == doctest::Approx(fd).epsilon(1e-5).scale(1e-3));
    }
    PearlHead hp = head, hm = head;
    hp.weight(1, 0) += h;
    hm.weight(1, 0) -= h;
    const double fd = (pearl_loss(g, cfg, w, hp, train, task, 1, nullptr) -
                       pearl_loss(g, cfg, w, hm, train, task, 1, nullptr)) / (2 * h);
    CHECK(grads.head.weight(1, 0) == doctest::Approx(fd).epsilon(1e-5).scale(1e-3));
  }
}

TEST_CASE("training lowers the loss and is deterministic") {
  Rng rng(35);
  const Graph g = testing::random_graph(60, 0.1, rng);
  PearlConfig cfg = small_config();
  cfg.n_draws = 4;
  TaskSpec task;
  task.kind = TaskKind::regression;
  for (std::size_t i = 0; i < 60; ++i) task.targets.push_back(static_cast<double>(g.degree(static_cast<NodeId>(i))));
  std::vector<NodeId> train;
  for (NodeId i = 0; i < 60; i += 2) train.push_back(i);
  PearlTrainOptions opts;
  opts.epochs = 100;
  opts.learning_rate = 0.01;
  const auto a = train_pearl(g, cfg, init_weights(cfg), train, task, opts);
  const auto b = train_pearl(g, cfg, init_weights(cfg), train, task, opts);
  REQUIRE(a.loss.size() == 100);
  CHECK(a.loss.back() < 0.5 * a.loss.front());
  CHECK(a.weights == b.weights);
  CHECK(a.loss == b.loss);
}

TEST_CASE("config validation") {
  PearlConfig cfg;
  cfg.n_draws = 0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  const Graph g = testing::path_graph(3);
  PearlWeights w = init_weights(PearlConfig{});
  CHECK_THROWS_AS(gnn_forward(g, Matrix::Zero(3, 5), w), InputError);
}
