#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace testing {

using gtab::Edge;
using gtab::NodeId;

Graph random_graph(std::size_t n, double p, Rng& rng) {
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      if (rng.uniform() < p) edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
    }
  }
  return Graph::from_edges(n, edges);
}

Graph sparse_random_graph(std::size_t n, double avg_degree, Rng& rng) {
  const auto m = static_cast<std::size_t>(avg_degree * static_cast<double>(n) / 2.0);
  std::vector<Edge> edges;
  edges.reserve(m);
  for (std::size_t e = 0; e < m; ++e) {
    edges.push_back({static_cast<NodeId>(rng.index(n)), static_cast<NodeId>(rng.index(n))});
  }
  return Graph::from_edges(n, edges);
}

Graph path_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(i + 1)});
  return Graph::from_edges(n, edges);
}

Graph cycle_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>((i + 1) % n)});
  return Graph::from_edges(n, edges);
}

Graph complete_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
  }
  return Graph::from_edges(n, edges);
}

gtab::FeatureTable random_features(std::size_t n, std::size_t n_num, std::size_t n_cat,
                                   std::size_t vocab, double missing_rate, Rng& rng) {
  gtab::FeatureTable t(n);
  for (std::size_t j = 0; j < n_num; ++j) {
    std::vector<double> v(n);
    for (auto& x : v) {
      x = rng.uniform() < missing_rate ? gtab::kMissing
                                       : static_cast<double>(static_cast<int>(rng.index(1025)) - 512) / 8.0;
    }
    t.add(gtab::FeatureColumn::numerical("num" + std::to_string(j), std::move(v)));
  }
  for (std::size_t j = 0; j < n_cat; ++j) {
    std::vector<std::string> raw(n);
    for (auto& s : raw) {
      s = rng.uniform() < missing_rate ? std::string(gtab::kMissingToken) : "v" + std::to_string(rng.index(vocab));
    }
    t.add(gtab::FeatureColumn::categorical("cat" + std::to_string(j), raw));
  }
  return t;
}

gtab::Dataset random_dataset(std::size_t n, double p, gtab::TaskKind kind, std::size_t n_classes,
                             std::uint64_t seed) {
  Rng rng(seed);
  gtab::Dataset ds;
  ds.graph = random_graph(n, p, rng);
  ds.features = random_features(n, 3, 1, 4, 0.1, rng);
  ds.task.kind = kind;
  ds.task.targets.resize(n);
  if (gtab::is_classification(kind)) {
    ds.task.n_classes = n_classes;
    for (std::size_t i = 0; i < n; ++i) ds.task.targets[i] = static_cast<double>(i % n_classes);
    rng.shuffle(ds.task.targets);
  } else {
    for (auto& y : ds.task.targets) y = rng.normal();
  }
  ds.validate();
  return ds;
}

Matrix dense_adjacency(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.n_nodes());
  Matrix a = Matrix::Zero(n, n);
  for (const Edge& e : g.edge_list()) {
    a(e.src, e.dst) = 1.0;
    a(e.dst, e.src) = 1.0;
  }
  return a;
}

Matrix oracle_nfa_numerical(const Graph& g, const std::vector<double>& col) {
  const Matrix a = dense_adjacency(g);
  const auto n = a.rows();
  Matrix out(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0, mx = -std::numeric_limits<double>::infinity(), mn = std::numeric_limits<double>::infinity();
    int cnt = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (a(i, j) == 0.0 || std::isnan(col[static_cast<std::size_t>(j)])) continue;
      const double v = col[static_cast<std::size_t>(j)];
      sum += v;
      mx = std::max(mx, v);
      mn = std::min(mn, v);
      ++cnt;
    }
    if (cnt == 0) {
      out.row(i).setConstant(gtab::kMissing);
    } else {
      out(i, 0) = sum / cnt;
      out(i, 1) = mx;
      out(i, 2) = mn;
    }
  }
  return out;
}

Matrix oracle_nfa_categorical(const Graph& g, const std::vector<std::int32_t>& codes, std::size_t vocab) {
  const Matrix a = dense_adjacency(g);
  const auto n = a.rows();
  Matrix out = Matrix::Zero(n, static_cast<Eigen::Index>(vocab));
  for (Eigen::Index i = 0; i < n; ++i) {
    int cnt = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (a(i, j) == 0.0 || codes[static_cast<std::size_t>(j)] < 0) continue;
      out(i, codes[static_cast<std::size_t>(j)]) += 1.0;
      ++cnt;
    }
    if (cnt == 0) {
      out.row(i).setConstant(gtab::kMissing);
    } else {
      out.row(i) /= cnt;
    }
  }
  return out;
}

std::vector<double> gauss_solve(Matrix a, std::vector<double> b) {
  const auto n = a.rows();
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index piv = c;
    for (Eigen::Index r = c + 1; r < n; ++r) {
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    }
    a.row(c).swap(a.row(piv));
    std::swap(b[static_cast<std::size_t>(c)], b[static_cast<std::size_t>(piv)]);
    for (Eigen::Index r = c + 1; r < n; ++r) {
      const double f = a(r, c) / a(c, c);
      for (Eigen::Index k = c; k < n; ++k) a(r, k) -= f * a(c, k);
      b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(c)];
    }
  }
  std::vector<double> x(static_cast<std::size_t>(n));
  for (Eigen::Index r = n - 1; r >= 0; --r) {
    double s = b[static_cast<std::size_t>(r)];
    for (Eigen::Index k = r + 1; k < n; ++k) s -= a(r, k) * x[static_cast<std::size_t>(k)];
    x[static_cast<std::size_t>(r)] = s / a(r, r);
  }
  return x;
}

std::vector<double> oracle_pagerank(const Graph& g, double damping) {
  // x = d * (A D^-1 x + (dangling mass) / n) + (1 - d) / n, with sum(x) = 1.
  const Matrix a = dense_adjacency(g);
  const auto n = a.rows();
  const double nn = static_cast<double>(n);
  Matrix m = Matrix::Identity(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double deg = a.row(j).sum();
    for (Eigen::Index i = 0; i < n; ++i) {
      m(i, j) -= damping * (deg > 0 ? a(i, j) / deg : 1.0 / nn);
    }
  }
  std::vector<double> rhs(static_cast<std::size_t>(n), (1.0 - damping) / nn);
  return gauss_solve(m, rhs);
}

Matrix oracle_laplacian(const Graph& g) {
  const Matrix a = dense_adjacency(g);
  const auto n = a.rows();
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double di = a.row(i).sum();
    if (di > 0) l(i, i) = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (a(i, j) != 0.0) l(i, j) = -1.0 / std::sqrt(di * a.row(j).sum());
    }
  }
  return l;
}

std::vector<double> jacobi_eigen(Matrix a, Matrix* vectors) {
  const auto n = a.rows();
  Matrix v = Matrix::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });
  std::vector<double> vals;
  if (vectors) *vectors = Matrix(n, n);
  for (std::size_t k = 0; k < order.size(); ++k) {
    vals.push_back(a(order[k], order[k]));
    if (vectors) vectors->col(static_cast<Eigen::Index>(k)) = v.col(order[k]);
  }
  return vals;
}

Matrix oracle_gnn(const Graph& g, const Matrix& x, const std::vector<Matrix>& weights,
                  const std::vector<std::vector<double>>& biases) {
  Matrix p = dense_adjacency(g) + Matrix::Identity(x.rows(), x.rows());
  for (Eigen::Index i = 0; i < p.rows(); ++i) p.row(i) /= p.row(i).sum();
  Matrix h = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const Matrix agg = p * h;
    Matrix next(agg.rows(), weights[l].cols());
    for (Eigen::Index i = 0; i < next.rows(); ++i) {
      for (Eigen::Index o = 0; o < next.cols(); ++o) {
        double s = biases[l][static_cast<std::size_t>(o)];
        for (Eigen::Index k = 0; k < agg.cols(); ++k) s += agg(i, k) * weights[l](k, o);
        next(i, o) = (l + 1 < weights.size()) ? std::max(0.0, s) : s;
      }
    }
    h = next;
  }
  return h;
}

double oracle_average_precision(const std::vector<double>& scores, const std::vector<int>& labels) {
  double total = 0.0;
  int positives = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    ++positives;
    int above = 0, above_pos = 0;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (scores[j] >= scores[i]) {
        ++above;
        above_pos += labels[j] == 1;
      }
    }
    total += static_cast<double>(above_pos) / above;
  }
  return total / positives;
}

TempDir::TempDir() {
  static int counter = 0;
  Rng rng(static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count()));
  path = std::filesystem::temp_directory_path() /
         ("gtab-test-" + std::to_string(rng.next() % 1000000007) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(path);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path, ec);
}

}  // namespace testing
