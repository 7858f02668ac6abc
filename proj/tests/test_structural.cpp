#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gtab/error.hpp"
#include "gtab/structural.hpp"
#include "support.hpp"

using namespace gtab;

namespace {

std::size_t count_components(const Graph& g) {
  std::size_t c = 0;
  g.connected_components(&c);
  return c;
}

void check_against_dense(const Graph& g, const StructuralConfig& cfg) {
  const LaplacianEmbedding emb = laplacian_eigenvectors(g, cfg);
  const Matrix l = testing::oracle_laplacian(g);
  const auto all = testing::jacobi_eigen(l);
  const std::size_t zeros = count_components(g);
  REQUIRE(emb.vectors.cols() == static_cast<Eigen::Index>(cfg.n_eigenvectors));
  for (std::size_t k = 0; k < cfg.n_eigenvectors; ++k) {
    const Vector v = emb.vectors.col(static_cast<Eigen::Index>(k));
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK((l * v - emb.eigenvalues[k] * v).norm() < 1e-6);
    CHECK(std::abs(emb.eigenvalues[k] - all[zeros + k]) < 1e-6);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    CHECK(v[arg] > 0);
  }
}

}  // namespace

TEST_CASE("pagerank on small graphs") {
  const StructuralConfig cfg;
  const auto tri = pagerank(testing::complete_graph(3), cfg);
  for (double p : tri) CHECK(std::abs(p - 1.0 / 3.0) < 1e-8);
  std::vector<Edge> star{{0, 1}, {0, 2}, {0, 3}};
  const auto pr = pagerank(Graph::from_edges(5, star), cfg);
  CHECK(std::abs(std::accumulate(pr.begin(), pr.end(), 0.0) - 1.0) < 1e-12);
  CHECK(pr[0] > pr[1]);
  CHECK(pr[1] == pr[2]);
}

TEST_CASE("pagerank matches the linear-system oracle") {
  Rng rng(21);
  const StructuralConfig cfg;
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + rng.index(199);
    const Graph g = testing::random_graph(n, rng.uniform(0.0, 0.1), rng);
    const auto got = pagerank(g, cfg);
    const auto want = testing::oracle_pagerank(g, cfg.pagerank_damping);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(got[i] - want[i]) < 1e-8);
    CHECK(got == serial::pagerank(g, cfg));
  }
}

TEST_CASE("pagerank non-convergence is a numeric error") {
  StructuralConfig cfg;
  cfg.pagerank_max_iter = 2;
  cfg.pagerank_tol = 1e-15;
  Rng rng(1);
  CHECK_THROWS_AS(pagerank(testing::random_graph(50, 0.1, rng), cfg), NumericError);
}

TEST_CASE("degrees") {
  std::vector<Edge> e{{0, 1}, {1, 2}};
  CHECK(degrees(Graph::from_edges(4, e)) == std::vector<double>{1, 2, 1, 0});
}

TEST_CASE("laplacian eigenvectors on the path and cycle match closed forms") {
  StructuralConfig cfg;
  cfg.n_eigenvectors = 3;
  const std::size_t n = 10;
  // P_n normalized Laplacian eigenvalues: 1 - cos(pi k / (n - 1)).
  const auto emb = laplacian_eigenvectors(testing::path_graph(n), cfg);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(std::abs(emb.eigenvalues[k] - (1.0 - std::cos(M_PI * double(k + 1) / double(n - 1)))) < 1e-9);
  }
  const auto cyc = laplacian_eigenvectors(testing::cycle_graph(n), cfg);
  CHECK(std::abs(cyc.eigenvalues[0] - (1.0 - std::cos(2 * M_PI / n))) < 1e-9);
}

TEST_CASE("laplacian eigenvectors match the Jacobi oracle") {
  Rng rng(22);
  StructuralConfig cfg;
  cfg.n_eigenvectors = 6;
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = 20 + rng.index(100);
    check_against_dense(testing::random_graph(n, 0.15, rng), cfg);
  }
}

TEST_CASE("zero eigenpairs are excluded per component, isolated nodes get zeros") {
  StructuralConfig cfg;
  cfg.n_eigenvectors = 2;
  std::vector<Edge> e;
  for (NodeId i = 0; i < 5; ++i) e.push_back({i, static_cast<NodeId>((i + 1) % 5)});
  for (NodeId i = 5; i < 9; ++i) e.push_back({i, static_cast<NodeId>(i + 1)});
  const Graph g = Graph::from_edges(11, e);  // C5, P5, one isolated node
  const auto emb = laplacian_eigenvectors(g, cfg);
  for (double lam : emb.eigenvalues) CHECK(lam > 1e-6);
  CHECK(emb.vectors.row(10).norm() == 0.0);
  check_against_dense(g, cfg);
  cfg.n_eigenvectors = 9;  // 10 non-isolated nodes, 2 components
  CHECK_THROWS_AS(laplacian_eigenvectors(g, cfg), NumericError);
}

TEST_CASE("lanczos path agrees with the dense path") {
  Rng rng(23);
  StructuralConfig dense;
  dense.n_eigenvectors = 5;
  StructuralConfig sparse = dense;
  sparse.dense_max_nodes = 0;
  for (int t = 0; t < 4; ++t) {
    const Graph g = testing::random_graph(150, 0.05, rng);
    const auto a = laplacian_eigenvectors(g, dense);
    const auto b = laplacian_eigenvectors(g, sparse);
    const Matrix l = testing::oracle_laplacian(g);
    for (std::size_t k = 0; k < 5; ++k) {
      CHECK(std::abs(a.eigenvalues[k] - b.eigenvalues[k]) < 1e-7);
      const Vector v = b.vectors.col(static_cast<Eigen::Index>(k));
      CHECK((l * v - b.eigenvalues[k] * v).norm() < 1e-6);
    }
    // Same spanned subspace when the spectrum is separated.
    const Matrix pa = a.vectors * a.vectors.transpose();
    const Matrix pb = b.vectors * b.vectors.transpose();
    if (a.eigenvalues[4] + 1e-4 < testing::jacobi_eigen(l)[count_components(g) + 5]) {
      CHECK((pa - pb).norm() < 1e-5);
    }
  }
}

TEST_CASE("structural feature matrix layout") {
  Rng rng(24);
  StructuralConfig cfg;
  cfg.n_eigenvectors = 2;
  const Graph g = testing::random_graph(30, 0.2, rng);
  const auto sf = structural_features(g, cfg);
  const Matrix m = sf.as_matrix();
  CHECK(m.cols() == 4);
  CHECK(sf.column_names() == std::vector<std::string>{"degree", "pagerank", "lap_eig_1", "lap_eig_2"});
  CHECK(m(3, 0) == static_cast<double>(g.degree(3)));
  CHECK(m(3, 1) == sf.pagerank[3]);
}

TEST_CASE("fix_sign picks the largest entry, lowest index on ties") {
  Vector v(3);
  v << 0.5, -0.5, 0.1;
  fix_sign(v);
  CHECK(v[0] == 0.5);
  v << -0.5, 0.5, 0.1;
  fix_sign(v);
  CHECK(v[0] == 0.5);
  CHECK(v[1] == -0.5);
}
