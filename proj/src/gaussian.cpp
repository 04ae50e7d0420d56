#include "j3s/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "j3s/error.hpp"

namespace j3s {

void GaussianConfig::validate() const {
  if (!(cov_shrinkage > 0.0 && cov_shrinkage < 1.0)) {
    throw Error(ErrorCode::InvalidConfig,
                "cov_shrinkage must lie in (0,1), got " + std::to_string(cov_shrinkage));
  }
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidConfig, "beta must be positive");
  if (!(eig_floor > 0.0)) throw Error(ErrorCode::InvalidConfig, "eig_floor must be positive");
}

FeatureMatrix hellinger_map(const FeatureMatrix& x, bool enabled) {
  if (!enabled) return x;
  for (Eigen::Index j = 0; j < x.data.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.data.rows(); ++i) {
      if (x.data(i, j) < 0.0) {
        throw Error(ErrorCode::NegativeFeature, "sample '" + x.sample_id + "' has entry " +
                                                    std::to_string(x.data(i, j)) + " at (" +
                                                    std::to_string(i) + "," + std::to_string(j) +
                                                    ")");
      }
    }
  }
  FeatureMatrix out = x;
  out.data = x.data.cwiseSqrt();
  return out;
}

GaussianFit gaussian_fit(const FeatureMatrix& x) {
  const Eigen::Index m = x.count();
  if (m < 2) {
    throw Error(ErrorCode::TooFewColumns,
                "sample '" + x.sample_id + "' has " + std::to_string(m) + " columns, need >= 2");
  }
  if (x.dim() < 1) throw Error(ErrorCode::InvalidInput, "sample '" + x.sample_id + "' is empty");
  if (!x.data.allFinite()) {
    throw Error(ErrorCode::InvalidValue, "sample '" + x.sample_id + "' has non-finite entries");
  }
  GaussianFit fit;
  fit.mean = x.data.rowwise().mean();
  // Phi * J * Phi^T / m with J the m x m centering matrix, i.e. centering over columns.
  const Eigen::MatrixXd centered = x.data.colwise() - fit.mean;
  fit.cov = SymMatrix(centered * centered.transpose() / static_cast<double>(m));
  return fit;
}

double shrink_eigenvalue(double delta, double a) {
  const double half_b = (1.0 - a) / (2.0 * a);
  const double q = delta / a;
  // sqrt(h^2 + q) - h rewritten to avoid cancellation for small q.
  return q / (std::sqrt(half_b * half_b + q) + half_b);
}

SymMatrix robust_covariance(const SymMatrix& c, double cov_shrinkage) {
  if (!(cov_shrinkage > 0.0 && cov_shrinkage < 1.0)) {
    throw Error(ErrorCode::InvalidConfig,
                "cov_shrinkage must lie in (0,1), got " + std::to_string(cov_shrinkage));
  }
  const EigPair eig = sym_eig(c);
  const double scale = std::max(1.0, eig.values.cwiseAbs().maxCoeff());
  Eigen::VectorXd lambda(eig.values.size());
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    double delta = eig.values(k);
    if (delta < -1e-10 * scale) {
      throw Error(ErrorCode::NotPositiveDefinite,
                  "covariance eigenvalue " + std::to_string(delta) + " is negative");
    }
    delta = std::max(delta, 0.0);
    lambda(k) = shrink_eigenvalue(delta, cov_shrinkage);
  }
  return SymMatrix(eig.vectors * lambda.asDiagonal() * eig.vectors.transpose());
}

SymMatrix embed_spd(const Eigen::VectorXd& mean, const SymMatrix& cov, double beta) {
  const Eigen::Index d = mean.size();
  if (cov.size() != d) {
    throw Error(ErrorCode::DimensionMismatch, "mean has length " + std::to_string(d) +
                                                  " but covariance is " +
                                                  std::to_string(cov.size()) + "x" +
                                                  std::to_string(cov.size()));
  }
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidConfig, "beta must be positive");
  const Eigen::VectorXd bm = beta * mean;
  Eigen::MatrixXd p(d + 1, d + 1);
  p.topLeftCorner(d, d) = cov.matrix() + bm * bm.transpose();
  p.topRightCorner(d, 1) = bm;
  p.bottomLeftCorner(1, d) = bm.transpose();
  p(d, d) = 1.0;
  return SymMatrix(p);
}

GaussianDescriptor build_descriptor(const FeatureMatrix& x, const GaussianConfig& cfg) {
  cfg.validate();
  const FeatureMatrix mapped = hellinger_map(x, cfg.use_hellinger);
  GaussianFit fit = gaussian_fit(mapped);
  GaussianDescriptor out;
  out.robust_cov = robust_covariance(fit.cov, cfg.cov_shrinkage);
  out.embedding = embed_spd(fit.mean, out.robust_cov, cfg.beta);
  out.stat_vector = triu_vec(spd_logm(out.embedding, cfg.eig_floor));
  out.mean = std::move(fit.mean);
  return out;
}

}  // namespace j3s
