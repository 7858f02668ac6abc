#include "gtab/structural.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gtab/error.hpp"
#include "gtab/exact_sum.hpp"

namespace gtab {

void StructuralConfig::validate() const {
  if (!(pagerank_damping > 0.0 && pagerank_damping < 1.0)) {
    throw InputError("pagerank damping must lie in (0, 1)");
  }
  if (!(pagerank_tol > 0.0) || !(eig_tol > 0.0)) throw InputError("tolerances must be positive");
  if (pagerank_max_iter == 0) throw InputError("pagerank_max_iter must be at least 1");
}

Matrix StructuralFeatures::as_matrix() const {
  const auto n = static_cast<Eigen::Index>(degree.size());
  Matrix m(n, static_cast<Eigen::Index>(n_columns()));
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, 0) = degree[static_cast<std::size_t>(i)];
    m(i, 1) = pagerank[static_cast<std::size_t>(i)];
  }
  if (lap_eigs.cols() > 0) m.rightCols(lap_eigs.cols()) = lap_eigs;
  return m;
}

std::vector<std::string> StructuralFeatures::column_names() const {
  std::vector<std::string> names{"degree", "pagerank"};
  for (Eigen::Index k = 0; k < lap_eigs.cols(); ++k) {
    names.push_back("lap_eig_" + std::to_string(k + 1));
  }
  return names;
}

std::vector<double> degrees(const Graph& g) {
  std::vector<double> d(g.n_nodes());
  for (std::size_t v = 0; v < d.size(); ++v) d[v] = static_cast<double>(g.degree(static_cast<NodeId>(v)));
  return d;
}

namespace {

[[noreturn]] void pagerank_failed(const StructuralConfig& cfg, double residual) {
  throw NumericError("pagerank did not converge in " + std::to_string(cfg.pagerank_max_iter) +
                     " iterations (last L1 change " + std::to_string(residual) + ")");
}

}  // namespace

std::vector<double> pagerank(const Graph& g, const StructuralConfig& cfg) {
  cfg.validate();
  const std::size_t n = g.n_nodes();
  if (n == 0) return {};
  const double d = cfg.pagerank_damping;
  const double inv_n = 1.0 / static_cast<double>(n);
  const auto sn = static_cast<std::ptrdiff_t>(n);
  std::vector<double> x(n, inv_n), y(n), share(n);
  double residual = 0.0;

  for (std::size_t iter = 0; iter < cfg.pagerank_max_iter; ++iter) {
    ExactSum dangling, total, change;
#pragma omp parallel
    {
      ExactSum local;
#pragma omp for schedule(static)
      for (std::ptrdiff_t v = 0; v < sn; ++v) {
        const std::size_t deg = g.degree(static_cast<NodeId>(v));
        if (deg == 0) {
          share[v] = 0.0;
          local.add(x[v]);
        } else {
          share[v] = x[v] / static_cast<double>(deg);
        }
      }
#pragma omp critical
      dangling += local;
    }
    const double base = (1.0 - d) * inv_n + d * dangling.value() * inv_n;
#pragma omp parallel
    {
      ExactSum local;
#pragma omp for schedule(dynamic, 1024)
      for (std::ptrdiff_t v = 0; v < sn; ++v) {
        ExactSum in;
        for (NodeId u : g.neighbors(static_cast<NodeId>(v))) in.add(share[u]);
        y[v] = base + d * in.value();
        local.add(y[v]);
      }
#pragma omp critical
      total += local;
    }
    const double mass = total.value();
#pragma omp parallel
    {
      ExactSum local;
#pragma omp for schedule(static)
      for (std::ptrdiff_t v = 0; v < sn; ++v) {
        y[v] /= mass;
        local.add(std::abs(y[v] - x[v]));
      }
#pragma omp critical
      change += local;
    }
    x.swap(y);
    residual = change.value();
    if (residual < cfg.pagerank_tol) return x;
  }
  pagerank_failed(cfg, residual);
}

namespace serial {

std::vector<double> pagerank(const Graph& g, const StructuralConfig& cfg) {
  cfg.validate();
  const std::size_t n = g.n_nodes();
  if (n == 0) return {};
  const double d = cfg.pagerank_damping;
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> x(n, inv_n), y(n), share(n);
  double residual = 0.0;
  for (std::size_t iter = 0; iter < cfg.pagerank_max_iter; ++iter) {
    ExactSum dangling, total, change;
    for (std::size_t v = 0; v < n; ++v) {
      const std::size_t deg = g.degree(static_cast<NodeId>(v));
      share[v] = deg == 0 ? 0.0 : x[v] / static_cast<double>(deg);
      if (deg == 0) dangling.add(x[v]);
    }
    const double base = (1.0 - d) * inv_n + d * dangling.value() * inv_n;
    for (std::size_t v = 0; v < n; ++v) {
      ExactSum in;
      for (NodeId u : g.neighbors(static_cast<NodeId>(v))) in.add(share[u]);
      y[v] = base + d * in.value();
      total.add(y[v]);
    }
    const double mass = total.value();
    for (std::size_t v = 0; v < n; ++v) {
      y[v] /= mass;
      change.add(std::abs(y[v] - x[v]));
    }
    x.swap(y);
    residual = change.value();
    if (residual < cfg.pagerank_tol) return x;
  }
  pagerank_failed(cfg, residual);
}

}  // namespace serial

void apply_normalized_laplacian(const Graph& g, const Eigen::Ref<const Vector>& x,
                                Eigen::Ref<Vector> y) {
  const auto n = static_cast<std::ptrdiff_t>(g.n_nodes());
#pragma omp parallel for schedule(dynamic, 1024)
  for (std::ptrdiff_t v = 0; v < n; ++v) {
    const std::size_t dv = g.degree(static_cast<NodeId>(v));
    if (dv == 0) {
      y[v] = 0.0;
      continue;
    }
    double acc = 0.0;
    for (NodeId u : g.neighbors(static_cast<NodeId>(v))) {
      acc += x[u] / std::sqrt(static_cast<double>(g.degree(u)));
    }
    y[v] = x[v] - acc / std::sqrt(static_cast<double>(dv));
  }
}

void fix_sign(Eigen::Ref<Vector> v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  }
  if (v.size() > 0 && v[best] < 0) v = -v;
}

namespace {

// Orthonormal basis of the zero eigenspace: sqrt(degree) restricted to each
// component with at least one edge.
struct TrivialSpace {
  std::vector<std::size_t> component;  // per node
  Vector weight;                       // normalized sqrt(degree) per node, 0 if isolated
  std::size_t n_components = 0;        // components with edges
  std::size_t n_active = 0;            // nodes with degree > 0
  std::size_t n_labels = 0;            // all components, isolated nodes included
};

TrivialSpace trivial_space(const Graph& g) {
  TrivialSpace t;
  std::size_t count = 0;
  t.component = g.connected_components(&count);
  t.n_labels = count;
  const std::size_t n = g.n_nodes();
  std::vector<double> norm2(count, 0.0);
  std::vector<char> has_edges(count, 0);
  t.weight = Vector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t v = 0; v < n; ++v) {
    const auto deg = static_cast<double>(g.degree(static_cast<NodeId>(v)));
    if (deg == 0) continue;
    ++t.n_active;
    has_edges[t.component[v]] = 1;
    t.weight[static_cast<Eigen::Index>(v)] = std::sqrt(deg);
    norm2[t.component[v]] += deg;
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (t.weight[static_cast<Eigen::Index>(v)] != 0) {
      t.weight[static_cast<Eigen::Index>(v)] /= std::sqrt(norm2[t.component[v]]);
    }
  }
  for (char h : has_edges) t.n_components += h;
  return t;
}

LaplacianEmbedding dense_solve(const Graph& g, const TrivialSpace& t, std::size_t k) {
  const std::size_t n = g.n_nodes();
  std::vector<Eigen::Index> local(n, -1);
  std::vector<std::size_t> active;
  for (std::size_t v = 0; v < n; ++v) {
    if (g.degree(static_cast<NodeId>(v)) > 0) {
      local[v] = static_cast<Eigen::Index>(active.size());
      active.push_back(v);
    }
  }
  const auto na = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(na, na);
  for (Eigen::Index a = 0; a < na; ++a) {
    const auto v = static_cast<NodeId>(active[static_cast<std::size_t>(a)]);
    const double sv = std::sqrt(static_cast<double>(g.degree(v)));
    for (NodeId u : g.neighbors(v)) {
      lap(a, local[u]) = -1.0 / (sv * std::sqrt(static_cast<double>(g.degree(u))));
    }
  }
  // Lift the trivial eigenpairs above the spectrum ([0, 2]).
  std::vector<std::vector<Eigen::Index>> members;
  for (Eigen::Index a = 0; a < na; ++a) {
    const std::size_t c = t.component[active[static_cast<std::size_t>(a)]];
    if (members.size() <= c) members.resize(c + 1);
    members[c].push_back(a);
  }
  for (const auto& mem : members) {
    for (Eigen::Index a : mem) {
      const double wa = t.weight[static_cast<Eigen::Index>(active[static_cast<std::size_t>(a)])];
      for (Eigen::Index b : mem) {
        lap(a, b) += 3.0 * wa * t.weight[static_cast<Eigen::Index>(active[static_cast<std::size_t>(b)])];
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap);
  if (es.info() != Eigen::Success) throw NumericError("dense Laplacian eigensolver failed");
  LaplacianEmbedding out;
  out.vectors = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  for (std::size_t c = 0; c < k; ++c) {
    for (Eigen::Index a = 0; a < na; ++a) {
      out.vectors(static_cast<Eigen::Index>(active[static_cast<std::size_t>(a)]),
                  static_cast<Eigen::Index>(c)) = es.eigenvectors()(a, static_cast<Eigen::Index>(c));
    }
    out.eigenvalues.push_back(es.eigenvalues()[static_cast<Eigen::Index>(c)]);
  }
  return out;
}

LaplacianEmbedding lanczos_solve(const Graph& g, const TrivialSpace& t, std::size_t k,
                                 std::size_t available, double tol) {
  const auto n = static_cast<Eigen::Index>(g.n_nodes());
  detail::SymOp op;
  op.dim = g.n_nodes();
  // 2I - L maps the smallest nontrivial eigenvalues of L to the largest.
  op.apply = [&g](const Vector& x, Vector& y) {
    y.resize(x.size());
    apply_normalized_laplacian(g, x, y);
    y = 2.0 * x - y;
  };
  op.project = [&t, n](Vector& x) {
    std::vector<double> coef(t.n_labels, 0.0);
    for (Eigen::Index v = 0; v < n; ++v) coef[t.component[static_cast<std::size_t>(v)]] += t.weight[v] * x[v];
    for (Eigen::Index v = 0; v < n; ++v) {
      if (t.weight[v] == 0) {
        x[v] = 0.0;  // isolated node: its indicator is a trivial eigenvector
      } else {
        x[v] -= coef[t.component[static_cast<std::size_t>(v)]] * t.weight[v];
      }
    }
  };
  detail::LanczosOptions opts;
  opts.tol = 0.5 * tol;
  // A small buffer guards against locking a pair ahead of a smaller one.
  const std::size_t want = std::min(k + 2, available);
  LaplacianEmbedding raw = detail::lanczos_largest(op, want, opts);
  if (raw.eigenvalues.size() < k) {
    throw NumericError("lanczos found only " + std::to_string(raw.eigenvalues.size()) +
                       " nontrivial eigenpairs");
  }
  LaplacianEmbedding out;
  out.vectors = raw.vectors.leftCols(static_cast<Eigen::Index>(k));
  for (std::size_t c = 0; c < k; ++c) out.eigenvalues.push_back(2.0 - raw.eigenvalues[c]);
  return out;
}

}  // namespace

LaplacianEmbedding laplacian_eigenvectors(const Graph& g, const StructuralConfig& cfg) {
  cfg.validate();
  const std::size_t k = cfg.n_eigenvectors;
  const auto n = static_cast<Eigen::Index>(g.n_nodes());
  if (k == 0) return {Matrix(n, 0), {}};
  const TrivialSpace t = trivial_space(g);
  const std::size_t available = t.n_active - t.n_components;
  if (k > available) {
    throw NumericError("requested " + std::to_string(k) + " Laplacian eigenvectors but only " +
                       std::to_string(available) + " nontrivial eigenpairs are available");
  }
  LaplacianEmbedding out = t.n_active <= cfg.dense_max_nodes
                               ? dense_solve(g, t, k)
                               : lanczos_solve(g, t, k, available, cfg.eig_tol);

  Vector lv(n);
  for (std::size_t c = 0; c < k; ++c) {
    auto col = out.vectors.col(static_cast<Eigen::Index>(c));
    Vector v = col;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (g.degree(static_cast<NodeId>(i)) == 0) v[i] = 0.0;
    }
    v.normalize();
    fix_sign(v);
    apply_normalized_laplacian(g, v, lv);
    const double lambda = v.dot(lv);
    const double residual = (lv - lambda * v).norm();
    if (!(residual < cfg.eig_tol)) {
      throw NumericError("Laplacian eigenvector " + std::to_string(c + 1) + " has residual " +
                         std::to_string(residual) + " above tolerance");
    }
    col = v;
    out.eigenvalues[c] = lambda;
  }
  return out;
}

StructuralFeatures structural_features(const Graph& g, const StructuralConfig& cfg) {
  StructuralFeatures sf;
  sf.degree = degrees(g);
  sf.pagerank = pagerank(g, cfg);
  LaplacianEmbedding emb = laplacian_eigenvectors(g, cfg);
  sf.lap_eigs = std::move(emb.vectors);
  sf.lap_eigenvalues = std::move(emb.eigenvalues);
  return sf;
}

}  // namespace gtab
