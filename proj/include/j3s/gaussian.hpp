#pragma once

#include <string>

#include <Eigen/Dense>

#include "j3s/spd.hpp"

namespace j3s {

using ClassId = int;

/// One sample: d x m matrix whose columns are per-image (or per-channel)
/// features, plus its class label.
struct FeatureMatrix {
  Eigen::MatrixXd data;
  ClassId label = 0;
  std::string sample_id;

  Eigen::Index dim() const noexcept { return data.rows(); }
  Eigen::Index count() const noexcept { return data.cols(); }
};

struct GaussianConfig {
  double cov_shrinkage = 0.5;  // regularization weight of the von Neumann term, in (0, 1)
  double beta = 1.0;           // mean/covariance balance in the SPD embedding
  bool use_hellinger = true;
  double eig_floor = kDefaultEigFloor;

  void validate() const;
};

struct GaussianDescriptor {
  Eigen::VectorXd mean;
  SymMatrix robust_cov;
  SymMatrix embedding;
  Eigen::VectorXd stat_vector;
};

/// Explicit Hellinger feature map (entrywise square root). Identity when
/// `enabled` is false.
FeatureMatrix hellinger_map(const FeatureMatrix& x, bool enabled = true);

struct GaussianFit {
  Eigen::VectorXd mean;
  SymMatrix cov;
};

/// Mean and biased (1/m) covariance over the columns of x.
GaussianFit gaussian_fit(const FeatureMatrix& x);

/// Closed-form minimizer of log|S| + tr(S^-1 C) + a * D_vN(I, S): keeps the
/// eigenvectors of C and maps each eigenvalue d to the positive root of
/// a*l^2 + (1-a)*l - d = 0.
SymMatrix robust_covariance(const SymMatrix& c, double cov_shrinkage);

/// The scalar eigenvalue map used by robust_covariance.
double shrink_eigenvalue(double delta, double cov_shrinkage);

/// [[S + b^2 mu mu^T, b mu], [b mu^T, 1]]
SymMatrix embed_spd(const Eigen::VectorXd& mean, const SymMatrix& cov, double beta);

GaussianDescriptor build_descriptor(const FeatureMatrix& x, const GaussianConfig& cfg);

}  // namespace j3s
