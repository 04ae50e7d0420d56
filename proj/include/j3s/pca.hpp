#pragma once

#include <Eigen/Dense>

namespace j3s {

/// Centered principal component transform: x -> components * (x - mean).
struct PcaTransform {
  Eigen::VectorXd mean;                // length d
  Eigen::MatrixXd components;          // k x d, orthonormal rows
  Eigen::VectorXd explained_variance;  // length k, non-increasing

  Eigen::Index k() const noexcept { return components.rows(); }
  Eigen::Index dim() const noexcept { return components.cols(); }
};

/// Fits on the rows of an N x d matrix. Requires N >= 2 and
/// 1 <= k <= min(N - 1, d). Each component's largest-magnitude coordinate
/// (lowest index on ties) is made positive.
PcaTransform pca_fit(const Eigen::MatrixXd& rows, Eigen::Index k);

/// min(N - 1, d)
Eigen::Index default_pca_components(Eigen::Index n_rows, Eigen::Index dim);

/// (rows - mean) * components^T, one output row per input row.
Eigen::MatrixXd pca_apply(const PcaTransform& t, const Eigen::MatrixXd& rows);

/// Column-vector convenience: components * (x - mean).
Eigen::VectorXd pca_apply_vector(const PcaTransform& t, const Eigen::VectorXd& x);

/// Linear map x -> basis * (x - offset) applied to dictionary columns and
/// queries before sparse coding.
struct Projector {
  Eigen::MatrixXd basis;  // k x d
  Eigen::VectorXd offset;

  Eigen::Index dim_in() const noexcept { return basis.cols(); }
  Eigen::Index dim_out() const noexcept { return basis.rows(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd apply_columns(const Eigen::MatrixXd& cols) const;
};

/// Centered projection exactly as the PCA transform defines it.
Projector centered_projector(const PcaTransform& t);

/// Orthonormal basis of span{components, mean} with no centering. This is an
/// isometry on the linear span of the fitted rows, so ||q - U a|| changes by
/// the same out-of-span residual for every coefficient vector a.
Projector span_projector(const PcaTransform& t);

}  // namespace j3s
