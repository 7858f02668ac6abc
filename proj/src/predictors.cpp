#include "gtab/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gtab/error.hpp"
#include "gtab/rng.hpp"

namespace gtab {

void PredictRequest::validate() const {
  if (train_x.rows() == 0) throw InputError("predict: empty train set");
  if (static_cast<std::size_t>(train_x.rows()) != train_y.size()) {
    throw InputError("predict: train rows and targets differ in length");
  }
  if (train_x.cols() != test_x.cols()) throw InputError("predict: train and test widths differ");
  if (!is_classification(task)) return;
  if (n_classes < 2) throw InputError("predict: classification needs at least 2 classes");
  for (double y : train_y) {
    if (!(y >= 0 && y < static_cast<double>(n_classes)) || y != std::floor(y)) {
      throw InputError("predict: class target outside [0, n_classes)");
    }
  }
}

std::vector<std::size_t> Prediction::predicted_classes() const {
  std::vector<std::size_t> out(static_cast<std::size_t>(values.rows()));
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < values.cols(); ++c) {
      if (values(i, c) > values(i, best)) best = c;
    }
    out[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
  }
  return out;
}

std::vector<double> Prediction::scores() const {
  const Eigen::Index col = task == TaskKind::regression ? 0 : 1;
  std::vector<double> out(static_cast<std::size_t>(values.rows()));
  for (Eigen::Index i = 0; i < values.rows(); ++i) out[static_cast<std::size_t>(i)] = values(i, col);
  return out;
}

void Prediction::validate() const {
  if (!values.allFinite()) throw NumericError("prediction contains non-finite values");
  if (!is_classification(task)) return;
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    if (values.row(i).minCoeff() < 0.0 || std::abs(values.row(i).sum() - 1.0) > 1e-6) {
      throw NumericError("prediction row " + std::to_string(i) + " is not a probability vector");
    }
  }
}

namespace {

// Column-wise z-scoring fitted on train rows; missing entries map to 0 (the
// train mean).
struct Standardizer {
  Vector mean, scale;

  explicit Standardizer(const Matrix& x) : mean(Vector::Zero(x.cols())), scale(Vector::Ones(x.cols())) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      double sum = 0.0;
      Eigen::Index cnt = 0;
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        if (!is_missing(x(i, j))) {
          sum += x(i, j);
          ++cnt;
        }
      }
      if (cnt == 0) continue;
      mean[j] = sum / static_cast<double>(cnt);
      double ss = 0.0;
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        if (!is_missing(x(i, j))) ss += (x(i, j) - mean[j]) * (x(i, j) - mean[j]);
      }
      const double sd = std::sqrt(ss / static_cast<double>(cnt));
      if (sd > 0.0) scale[j] = sd;
    }
  }

  Matrix apply(const Matrix& x) const {
    Matrix z(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        z(i, j) = is_missing(x(i, j)) ? 0.0 : (x(i, j) - mean[j]) / scale[j];
      }
    }
    return z;
  }
};

void knn_row(const Matrix& train, const Matrix& test, const PredictRequest& req, std::size_t k,
             Eigen::Index row, std::vector<std::pair<double, std::size_t>>& dist, Matrix& out) {
  const auto n_train = static_cast<std::size_t>(train.rows());
  for (std::size_t t = 0; t < n_train; ++t) {
    dist[t] = {(train.row(static_cast<Eigen::Index>(t)) - test.row(row)).squaredNorm(), t};
  }
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  if (is_classification(req.task)) {
    out.row(row).setZero();
    for (std::size_t r = 0; r < k; ++r) {
      out(row, static_cast<Eigen::Index>(req.train_y[dist[r].second])) += 1.0;
    }
    out.row(row) /= static_cast<double>(k);
  } else {
    double s = 0.0;
    for (std::size_t r = 0; r < k; ++r) s += req.train_y[dist[r].second];
    out(row, 0) = s / static_cast<double>(k);
  }
}

void check_knn(const PredictRequest& req, std::size_t k) {
  req.validate();
  if (k == 0 || k > static_cast<std::size_t>(req.train_x.rows())) {
    throw InputError("knn: k must lie in [1, number of train rows]");
  }
}

Eigen::Index output_width(const PredictRequest& req) {
  return is_classification(req.task) ? static_cast<Eigen::Index>(req.n_classes) : 1;
}

}  // namespace

Prediction knn_predict(const PredictRequest& req, std::size_t k) {
  check_knn(req, k);
  const Standardizer std_(req.train_x);
  const Matrix train = std_.apply(req.train_x);
  const Matrix test = std_.apply(req.test_x);
  Prediction p{req.task, Matrix(test.rows(), output_width(req))};
  const auto n_test = static_cast<std::ptrdiff_t>(test.rows());
#pragma omp parallel
  {
    std::vector<std::pair<double, std::size_t>> dist(static_cast<std::size_t>(train.rows()));
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n_test; ++i) knn_row(train, test, req, k, i, dist, p.values);
  }
  return p;
}

namespace serial {

Prediction knn_predict(const PredictRequest& req, std::size_t k) {
  check_knn(req, k);
  const Standardizer std_(req.train_x);
  const Matrix train = std_.apply(req.train_x);
  const Matrix test = std_.apply(req.test_x);
  Prediction p{req.task, Matrix(test.rows(), output_width(req))};
  std::vector<std::pair<double, std::size_t>> dist(static_cast<std::size_t>(train.rows()));
  for (Eigen::Index i = 0; i < test.rows(); ++i) knn_row(train, test, req, k, i, dist, p.values);
  return p;
}

}  // namespace serial

Prediction linear_train_predict(const PredictRequest& req, const LinearOptions& opts) {
  req.validate();
  if (opts.l2 < 0) throw InputError("linear: l2 must be non-negative");
  const Standardizer std_(req.train_x);
  const Matrix x = std_.apply(req.train_x);
  const Matrix xt = std_.apply(req.test_x);
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const Vector y = Eigen::Map<const Vector>(req.train_y.data(), n);

  if (!is_classification(req.task)) {
    const double y_mean = y.mean();
    const Vector yc = y.array() - y_mean;
    Eigen::MatrixXd gram = x.transpose() * x;
    gram.diagonal().array() += opts.l2;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    // LDLT's rcond() does not see exactly zero pivots, so compare them directly.
    const bool singular =
        d > 0 && !(ldlt.vectorD().cwiseAbs().minCoeff() > 1e-12 * ldlt.vectorD().cwiseAbs().maxCoeff());
    if (ldlt.info() != Eigen::Success || singular) {
      throw NumericError("ridge: normal matrix is singular (use l2 > 0)");
    }
    const Vector beta = d > 0 ? Vector(ldlt.solve(x.transpose() * yc)) : Vector();
    Prediction p{req.task, Matrix(xt.rows(), 1)};
    p.values.col(0) = (d > 0 ? Vector(xt * beta) : Vector::Zero(xt.rows())).array() + y_mean;
    return p;
  }

  const auto c = static_cast<Eigen::Index>(req.n_classes);
  Matrix onehot = Matrix::Zero(n, c);
  for (Eigen::Index i = 0; i < n; ++i) onehot(i, static_cast<Eigen::Index>(y[i])) = 1.0;
  Matrix w = Matrix::Zero(d, c);
  Eigen::RowVectorXd b = Eigen::RowVectorXd::Zero(c);
  auto softmax = [&](const Matrix& feats) {
    Matrix logits = feats * w;
    logits.rowwise() += b;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      const double mx = logits.row(i).maxCoeff();
      logits.row(i) = (logits.row(i).array() - mx).exp();
      logits.row(i) /= logits.row(i).sum();
    }
    return logits;
  };
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t e = 0; e < opts.epochs; ++e) {
    const Matrix resid = softmax(x) - onehot;
    const Matrix grad_w = x.transpose() * resid * inv_n + opts.l2 * w;
    const Eigen::RowVectorXd grad_b = resid.colwise().sum() * inv_n;
    w -= opts.learning_rate * grad_w;
    b -= opts.learning_rate * grad_b;
  }
  if (!w.allFinite()) throw NumericError("logistic regression diverged");
  return Prediction{req.task, softmax(xt)};
}

std::vector<std::vector<std::size_t>> shuffle_permutations(std::size_t n_classes,
                                                           std::size_t n_shuffles,
                                                           std::uint64_t seed) {
  if (n_shuffles == 0) throw InputError("label shuffling needs at least one permutation");
  std::vector<std::size_t> identity(n_classes);
  std::iota(identity.begin(), identity.end(), 0);
  std::size_t factorial = 1;
  bool exhaustive = true;
  for (std::size_t i = 2; i <= n_classes; ++i) {
    factorial *= i;
    if (factorial > n_shuffles) {
      exhaustive = false;
      break;
    }
  }
  std::vector<std::vector<std::size_t>> perms;
  if (exhaustive) {
    auto p = identity;
    do perms.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    return perms;
  }
  perms.push_back(identity);
  Rng rng(seed);
  while (perms.size() < n_shuffles) {
    auto p = identity;
    rng.shuffle(p);
    perms.push_back(std::move(p));
  }
  return perms;
}

Prediction label_shuffle_wrap(const Predictor& inner, const PredictRequest& req,
                              std::size_t n_shuffles, std::uint64_t seed) {
  if (!is_classification(req.task)) throw InputError("label shuffling applies to classification only");
  req.validate();
  const auto perms = shuffle_permutations(req.n_classes, n_shuffles, seed);
  const auto c = static_cast<Eigen::Index>(req.n_classes);
  Prediction out{req.task, Matrix::Zero(req.test_x.rows(), c)};
  PredictRequest relabeled = req;
  for (const auto& perm : perms) {
    for (std::size_t i = 0; i < req.train_y.size(); ++i) {
      relabeled.train_y[i] = static_cast<double>(perm[static_cast<std::size_t>(req.train_y[i])]);
    }
    const Prediction p = inner.predict(relabeled);
    if (p.values.cols() != c || p.values.rows() != req.test_x.rows()) {
      throw NumericError("label shuffling: inner predictor returned the wrong shape");
    }
    for (Eigen::Index k = 0; k < c; ++k) {
      out.values.col(k) += p.values.col(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(k)]));
    }
  }
  out.values /= static_cast<double>(perms.size());
  return out;
}

Prediction LabelShuffleWrapper::predict(const PredictRequest& req) const {
  if (!is_classification(req.task)) return inner_->predict(req);
  return label_shuffle_wrap(*inner_, req, n_shuffles_, seed_);
}

}  // namespace gtab
