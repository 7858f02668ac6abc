#include "gtab/pearl.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <omp.h>

#include "gtab/error.hpp"
#include "gtab/rng.hpp"

namespace gtab {

void PearlConfig::validate() const {
  if (n_draws == 0 || d_in == 0 || d_hidden == 0 || d_out == 0 || n_layers == 0) {
    throw InputError("PEARL dimensions, depth and draw count must all be at least 1");
  }
}

namespace {

std::vector<std::size_t> layer_dims(const PearlConfig& cfg) {
  std::vector<std::size_t> dims{cfg.d_in};
  for (std::size_t l = 1; l < cfg.n_layers; ++l) dims.push_back(cfg.d_hidden);
  dims.push_back(cfg.d_out);
  return dims;
}

void check_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw NumericError(std::string(what) + " produced a non-finite value");
}

}  // namespace

PearlWeights init_weights(const PearlConfig& cfg) {
  cfg.validate();
  const auto dims = layer_dims(cfg);
  Rng rng(cfg.weight_seed);
  PearlWeights w;
  w.seed = cfg.weight_seed;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const auto fan_in = static_cast<Eigen::Index>(dims[l]);
    const auto fan_out = static_cast<Eigen::Index>(dims[l + 1]);
    const double scale = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    DenseLayer layer{Matrix(fan_in, fan_out), Vector::Zero(fan_out)};
    for (Eigen::Index i = 0; i < fan_in; ++i) {
      for (Eigen::Index j = 0; j < fan_out; ++j) {
        layer.weight(i, j) = static_cast<float>(rng.uniform(-scale, scale));
      }
    }
    w.layers.push_back(std::move(layer));
  }
  return w;
}

Matrix mean_aggregate(const Graph& g, const Matrix& h) {
  const auto n = static_cast<std::ptrdiff_t>(g.n_nodes());
  Matrix out(h.rows(), h.cols());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::ptrdiff_t v = 0; v < n; ++v) {
    auto row = out.row(v);
    row = h.row(v);
    const auto nb = g.neighbors(static_cast<NodeId>(v));
    for (NodeId u : nb) row += h.row(u);
    row /= static_cast<double>(nb.size() + 1);
  }
  return out;
}

Matrix mean_aggregate_transpose(const Graph& g, const Matrix& h) {
  const auto n = static_cast<std::ptrdiff_t>(g.n_nodes());
  Matrix out(h.rows(), h.cols());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::ptrdiff_t v = 0; v < n; ++v) {
    auto row = out.row(v);
    row = h.row(v) / static_cast<double>(g.degree(static_cast<NodeId>(v)) + 1);
    for (NodeId u : g.neighbors(static_cast<NodeId>(v))) {
      row += h.row(u) / static_cast<double>(g.degree(u) + 1);
    }
  }
  return out;
}

namespace serial {

Matrix mean_aggregate(const Graph& g, const Matrix& h) {
  Matrix out(h.rows(), h.cols());
  for (std::size_t v = 0; v < g.n_nodes(); ++v) {
    const auto r = static_cast<Eigen::Index>(v);
    out.row(r) = h.row(r);
    const auto nb = g.neighbors(static_cast<NodeId>(v));
    for (NodeId u : nb) out.row(r) += h.row(u);
    out.row(r) /= static_cast<double>(nb.size() + 1);
  }
  return out;
}

}  // namespace serial

namespace {

void check_shapes(const Graph& g, const Matrix& x, const PearlWeights& w) {
  if (w.layers.empty()) throw InputError("PEARL weights have no layers");
  if (static_cast<std::size_t>(x.rows()) != g.n_nodes()) {
    throw InputError("node feature rows differ from node count");
  }
  if (static_cast<std::size_t>(x.cols()) != w.d_in()) {
    throw InputError("node feature width differs from the first layer's input width");
  }
  for (std::size_t l = 1; l < w.layers.size(); ++l) {
    if (w.layers[l].weight.rows() != w.layers[l - 1].weight.cols()) {
      throw InputError("PEARL layer shapes do not chain");
    }
  }
}

Matrix forward_unchecked(const Graph& g, const Matrix& x, const PearlWeights& w,
                         std::vector<Matrix>* aggregated, std::vector<Matrix>* pre_act) {
  Matrix h = x;
  for (std::size_t l = 0; l < w.layers.size(); ++l) {
    const DenseLayer& layer = w.layers[l];
    Matrix agg = mean_aggregate(g, h);
    Matrix z = agg * layer.weight;
    z.rowwise() += layer.bias.transpose();
    const bool last = l + 1 == w.layers.size();
    h = last ? z : Matrix(z.cwiseMax(0.0));
    if (aggregated) aggregated->push_back(std::move(agg));
    if (pre_act) pre_act->push_back(std::move(z));
  }
  return h;
}

}  // namespace

Matrix gnn_forward(const Graph& g, const Matrix& node_features, const PearlWeights& w) {
  check_shapes(g, node_features, w);
  Matrix out = forward_unchecked(g, node_features, w, nullptr, nullptr);
  check_finite(out, "gnn_forward");
  return out;
}

Matrix random_node_features(std::size_t n, std::size_t d, std::uint64_t draw_seed,
                            std::uint64_t draw) {
  Rng rng(draw_seed, draw);
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
  }
  return x;
}

namespace {

// Sum of gnn_forward over draws [first, first + count) of `draw_seed`,
// accumulated in draw order regardless of how draws are scheduled.
Matrix sum_over_draws(const Graph& g, const PearlWeights& w, std::uint64_t draw_seed,
                      std::uint64_t first, std::size_t count) {
  const std::size_t n = g.n_nodes();
  Matrix acc = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(w.d_out()));
  const std::size_t chunk = std::max<std::size_t>(1, 2 * static_cast<std::size_t>(omp_get_max_threads()));
  std::vector<Matrix> outs(chunk);
  for (std::size_t base = 0; base < count; base += chunk) {
    const auto len = static_cast<std::ptrdiff_t>(std::min(chunk, count - base));
    bool failed = false;
#pragma omp parallel for schedule(dynamic, 1) if (len > 1)
    for (std::ptrdiff_t r = 0; r < len; ++r) {
      const Matrix x = random_node_features(n, w.d_in(), draw_seed, first + base + static_cast<std::size_t>(r));
      outs[static_cast<std::size_t>(r)] = forward_unchecked(g, x, w, nullptr, nullptr);
      if (!outs[static_cast<std::size_t>(r)].allFinite()) {
#pragma omp atomic write
        failed = true;
      }
    }
    if (failed) throw NumericError("gnn_forward produced a non-finite value");
    for (std::ptrdiff_t r = 0; r < len; ++r) acc += outs[static_cast<std::size_t>(r)];
  }
  return acc;
}

}  // namespace

Matrix pearl_encode(const Graph& g, const PearlConfig& cfg, const PearlWeights& w) {
  cfg.validate();
  if (w.d_in() != cfg.d_in) throw InputError("PEARL weights do not match the configured d_in");
  check_shapes(g, Matrix(static_cast<Eigen::Index>(g.n_nodes()), static_cast<Eigen::Index>(cfg.d_in)), w);
  Matrix acc = sum_over_draws(g, w, cfg.draw_seed, 0, cfg.n_draws);
  acc /= static_cast<double>(cfg.n_draws);
  return acc;
}

namespace {

constexpr char kMagic[4] = {'P', 'R', 'L', 'W'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t b = 0; b < sizeof(T); ++b) {
    out.put(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * b)) & 0xff));
  }
}

template <class T>
T get(std::istream& in) {
  std::uint64_t v = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) {
    const int c = in.get();
    if (c == EOF) throw InputError("PEARL weight file is truncated");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * b);
  }
  return static_cast<T>(v);
}

void put_float(std::ostream& out, double v) { put(out, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
double get_float(std::istream& in) { return std::bit_cast<float>(get<std::uint32_t>(in)); }

}  // namespace

void save_weights(const PearlWeights& w, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path.string() + ": cannot write");
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(w.layers.size()));
  put<std::uint64_t>(out, w.seed);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(w.d_in()));
  for (const auto& l : w.layers) put<std::uint32_t>(out, static_cast<std::uint32_t>(l.weight.cols()));
  for (const auto& l : w.layers) {
    for (Eigen::Index i = 0; i < l.weight.rows(); ++i) {
      for (Eigen::Index j = 0; j < l.weight.cols(); ++j) put_float(out, l.weight(i, j));
    }
    for (Eigen::Index j = 0; j < l.bias.size(); ++j) put_float(out, l.bias[j]);
  }
}

PearlWeights load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string() + ": cannot open file");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw InputError(path.string() + ": not a PEARL weight file");
  }
  if (get<std::uint32_t>(in) != kVersion) throw InputError(path.string() + ": unsupported version");
  const auto n_layers = get<std::uint32_t>(in);
  PearlWeights w;
  w.seed = get<std::uint64_t>(in);
  std::vector<std::uint32_t> dims(n_layers + 1);
  for (auto& d : dims) d = get<std::uint32_t>(in);
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    DenseLayer layer{Matrix(dims[l], dims[l + 1]), Vector(dims[l + 1])};
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) layer.weight(i, j) = get_float(in);
    }
    for (Eigen::Index j = 0; j < layer.bias.size(); ++j) layer.bias[j] = get_float(in);
    w.layers.push_back(std::move(layer));
  }
  return w;
}

double pearl_loss(const Graph& g, const PearlConfig& cfg, const PearlWeights& w,
                  const PearlHead& head, std::span<const NodeId> train_nodes,
                  const TaskSpec& task, std::size_t epoch, PearlGradients* grads) {
  cfg.validate();
  const std::size_t n = g.n_nodes();
  const std::uint64_t first = static_cast<std::uint64_t>(epoch) * cfg.n_draws;
  const double inv_m = 1.0 / static_cast<double>(cfg.n_draws);
  const Matrix enc = sum_over_draws(g, w, cfg.draw_seed, first, cfg.n_draws) * inv_m;

  const auto n_train = static_cast<Eigen::Index>(train_nodes.size());
  if (n_train == 0) throw InputError("PEARL training needs at least one train node");
  Matrix et(n_train, enc.cols());
  for (Eigen::Index t = 0; t < n_train; ++t) et.row(t) = enc.row(train_nodes[static_cast<std::size_t>(t)]);
  Matrix out = et * head.weight;
  out.rowwise() += head.bias.transpose();

  double loss = 0.0;
  Matrix d_out(out.rows(), out.cols());
  for (Eigen::Index t = 0; t < n_train; ++t) {
    const double y = task.targets[train_nodes[static_cast<std::size_t>(t)]];
    if (is_missing(y)) throw InputError("PEARL training node has no target");
    if (is_classification(task.kind)) {
      const double mx = out.row(t).maxCoeff();
      Eigen::RowVectorXd p = (out.row(t).array() - mx).exp();
      const double z = p.sum();
      p /= z;
      const auto c = static_cast<Eigen::Index>(y);
      loss -= out(t, c) - mx - std::log(z);
      d_out.row(t) = p;
      d_out(t, c) -= 1.0;
    } else {
      const double r = out(t, 0) - y;
      loss += r * r;
      d_out(t, 0) = 2.0 * r;
    }
  }
  loss /= static_cast<double>(n_train);
  if (!grads) return loss;
  d_out /= static_cast<double>(n_train);

  grads->head.weight = et.transpose() * d_out;
  grads->head.bias = d_out.colwise().sum().transpose();
  Matrix d_enc = Matrix::Zero(enc.rows(), enc.cols());
  const Matrix d_et = d_out * head.weight.transpose();
  for (Eigen::Index t = 0; t < n_train; ++t) d_enc.row(train_nodes[static_cast<std::size_t>(t)]) += d_et.row(t);
  d_enc *= inv_m;

  grads->layers.clear();
  for (const auto& l : w.layers) {
    grads->layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
  }
  for (std::size_t r = 0; r < cfg.n_draws; ++r) {
    const Matrix x = random_node_features(n, w.d_in(), cfg.draw_seed, first + r);
    std::vector<Matrix> agg, pre;
    forward_unchecked(g, x, w, &agg, &pre);
    Matrix d_h = d_enc;
    for (std::size_t l = w.layers.size(); l-- > 0;) {
      Matrix d_z = d_h;
      if (l + 1 != w.layers.size()) d_z = d_z.cwiseProduct((pre[l].array() > 0.0).cast<double>().matrix());
      grads->layers[l].weight.noalias() += agg[l].transpose() * d_z;
      grads->layers[l].bias += d_z.colwise().sum().transpose();
      if (l > 0) d_h = mean_aggregate_transpose(g, d_z * w.layers[l].weight.transpose());
    }
  }
  return loss;
}

PearlTrainResult train_pearl(const Graph& g, const PearlConfig& cfg, PearlWeights init,
                             std::span<const NodeId> train_nodes, const TaskSpec& task,
                             const PearlTrainOptions& opts) {
  PearlTrainResult res;
  res.weights = std::move(init);
  const auto n_outputs = static_cast<Eigen::Index>(is_classification(task.kind) ? task.n_classes : 1);
  res.head.weight = Matrix::Zero(static_cast<Eigen::Index>(res.weights.d_out()), n_outputs);
  res.head.bias = Vector::Zero(n_outputs);
  PearlGradients grads;
  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    res.loss.push_back(pearl_loss(g, cfg, res.weights, res.head, train_nodes, task, epoch, &grads));
    for (std::size_t l = 0; l < res.weights.layers.size(); ++l) {
      res.weights.layers[l].weight -= opts.learning_rate * grads.layers[l].weight;
      res.weights.layers[l].bias -= opts.learning_rate * grads.layers[l].bias;
    }
    res.head.weight -= opts.learning_rate * grads.head.weight;
    res.head.bias -= opts.learning_rate * grads.head.bias;
  }
  for (const auto& l : res.weights.layers) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) {
      throw NumericError("PEARL training diverged (non-finite weights)");
    }
  }
  return res;
}

}  // namespace gtab
