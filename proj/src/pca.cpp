#include <string>

#include "gtab/assemble.hpp"
#include "gtab/error.hpp"

namespace gtab {

PcaModel pca_fit(const Matrix& rows, std::size_t d_keep, std::string block) {
  const Eigen::Index n = rows.rows();
  const Eigen::Index d = rows.cols();
  if (d_keep == 0 || d_keep > static_cast<std::size_t>(std::min(n, d))) {
    throw InputError("pca: d_keep=" + std::to_string(d_keep) + " must lie in [1, min(" +
                     std::to_string(n) + ", " + std::to_string(d) + ")]");
  }
  PcaModel m;
  m.block = std::move(block);
  m.mean = Vector::Zero(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double sum = 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!is_missing(rows(i, j))) {
        sum += rows(i, j);
        ++count;
      }
    }
    m.mean[j] = count ? sum / static_cast<double>(count) : 0.0;
  }
  Eigen::MatrixXd centered(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      centered(i, j) = is_missing(rows(i, j)) ? 0.0 : rows(i, j) - m.mean[j];
    }
  }
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;
  if (!(cov.trace() > 0.0)) throw NumericError("pca: every column has zero variance");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw NumericError("pca: eigendecomposition failed");
  const auto k = static_cast<Eigen::Index>(d_keep);
  m.components.resize(d, k);
  m.explained_variance.resize(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const Eigen::Index src = d - 1 - c;  // eigenvalues come ascending
    Vector v = es.eigenvectors().col(src);
    fix_sign(v);
    m.components.col(c) = v;
    m.explained_variance[c] = std::max(0.0, es.eigenvalues()[src]);
  }
  return m;
}

Matrix pca_transform(const PcaModel& model, const Matrix& rows) {
  if (static_cast<std::size_t>(rows.cols()) != model.d_in()) {
    throw InputError("pca_transform: expected " + std::to_string(model.d_in()) +
                     " columns, got " + std::to_string(rows.cols()));
  }
  Matrix centered(rows.rows(), rows.cols());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      centered(i, j) = is_missing(rows(i, j)) ? 0.0 : rows(i, j) - model.mean[j];
    }
  }
  return centered * model.components;
}

}  // namespace gtab
