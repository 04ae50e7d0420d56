#include "j3s/pca.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "j3s/error.hpp"

namespace j3s {

Eigen::Index default_pca_components(Eigen::Index n_rows, Eigen::Index dim) {
  return std::max<Eigen::Index>(1, std::min(n_rows - 1, dim));
}

PcaTransform pca_fit(const Eigen::MatrixXd& rows, Eigen::Index k) {
  const Eigen::Index n = rows.rows();
  const Eigen::Index d = rows.cols();
  if (n < 2) throw Error(ErrorCode::InvalidConfig, "PCA needs at least 2 rows");
  if (k < 1 || k > std::min(n - 1, d)) {
    throw Error(ErrorCode::InvalidConfig, "k = " + std::to_string(k) + " outside [1, " +
                                              std::to_string(std::min(n - 1, d)) + "]");
  }
  if (!rows.allFinite()) throw Error(ErrorCode::InvalidValue, "PCA input has non-finite entries");

  PcaTransform t;
  t.mean = rows.colwise().mean().transpose();
  const Eigen::MatrixXd centered = rows.rowwise() - t.mean.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::MatrixXd V = svd.matrixV();  // d x min(n, d), singular values descending
  t.components = V.leftCols(k).transpose();
  t.explained_variance =
      svd.singularValues().head(k).array().square() / static_cast<double>(n - 1);

  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double a = std::abs(t.components(c, j));
      if (a > best) {
        best = a;
        arg = j;
      }
    }
    if (t.components(c, arg) < 0.0) t.components.row(c) *= -1.0;
  }
  return t;
}

Eigen::MatrixXd pca_apply(const PcaTransform& t, const Eigen::MatrixXd& rows) {
  if (rows.cols() != t.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "rows have dimension " + std::to_string(rows.cols()) +
                                                  ", transform expects " + std::to_string(t.dim()));
  }
  return (rows.rowwise() - t.mean.transpose()) * t.components.transpose();
}

Eigen::VectorXd pca_apply_vector(const PcaTransform& t, const Eigen::VectorXd& x) {
  if (x.size() != t.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "vector has dimension " + std::to_string(x.size()) +
                                                  ", transform expects " + std::to_string(t.dim()));
  }
  return t.components * (x - t.mean);
}

Eigen::VectorXd Projector::apply(const Eigen::VectorXd& x) const {
  if (x.size() != dim_in()) {
    throw Error(ErrorCode::DimensionMismatch, "vector has dimension " + std::to_string(x.size()) +
                                                  ", projector expects " + std::to_string(dim_in()));
  }
  return basis * (x - offset);
}

Eigen::MatrixXd Projector::apply_columns(const Eigen::MatrixXd& cols) const {
  if (cols.rows() != dim_in()) {
    throw Error(ErrorCode::DimensionMismatch, "columns have dimension " +
                                                  std::to_string(cols.rows()) + ", projector expects " +
                                                  std::to_string(dim_in()));
  }
  return basis * (cols.colwise() - offset);
}

Projector centered_projector(const PcaTransform& t) { return Projector{t.components, t.mean}; }

Projector span_projector(const PcaTransform& t) {
  Projector out;
  out.offset = Eigen::VectorXd::Zero(t.dim());
  // Gram-Schmidt the mean against the components, twice for stability.
  Eigen::VectorXd r = t.mean;
  for (int pass = 0; pass < 2; ++pass) r -= t.components.transpose() * (t.components * r);
  const double rn = r.norm();
  const double scale = std::max(1.0, t.mean.norm());
  if (rn > 1e-12 * scale) {
    out.basis.resize(t.k() + 1, t.dim());
    out.basis.topRows(t.k()) = t.components;
    out.basis.row(t.k()) = (r / rn).transpose();
  } else {
    out.basis = t.components;
  }
  return out;
}

}  // namespace j3s
