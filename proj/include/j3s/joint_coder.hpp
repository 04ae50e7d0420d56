#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "j3s/gaussian.hpp"
#include "j3s/pca.hpp"
#include "j3s/unitary.hpp"

namespace j3s {

struct ColumnRange {
  Eigen::Index begin = 0;
  Eigen::Index end = 0;  // exclusive

  Eigen::Index size() const noexcept { return end - begin; }
};

/// One training sample as it enters the dictionaries.
struct Atom {
  Eigen::VectorXd stat;  // triu(log P)
  Eigen::VectorXd spat;  // vec(D)
  ClassId label = 0;
  std::string sample_id;
};

Atom make_atom(const GaussianDescriptor& g, const UnitaryDictionary& u, ClassId label,
               std::string sample_id = {});

enum class PcaMode {
  Off,
  Span,      // principal subspace plus the mean direction, uncentered (default)
  Centered,  // literal centered PCA with min(N-1, d) components
};

struct AssembleOptions {
  PcaMode pca = PcaMode::Off;
  /// Classes that must be present; any without atoms is an EmptyClass error.
  std::vector<ClassId> declared_classes;
  /// Extra columns (e.g. probe descriptors) included in the PCA fit only.
  Eigen::MatrixXd extra_stat_fit;
  Eigen::MatrixXd extra_spat_fit;
};

/// Stacked statistical (U) and spatial (V) dictionaries with contiguous,
/// ascending class ranges. Immutable once assembled.
struct JointDictionary {
  Eigen::MatrixXd U;  // d1 x N
  Eigen::MatrixXd V;  // d2 x N
  Eigen::MatrixXd gram_U;  // U^T U
  Eigen::MatrixXd gram_V;  // V^T V
  std::map<ClassId, ColumnRange> class_ranges;
  std::vector<ClassId> column_labels;
  std::vector<std::string> column_ids;
  std::optional<PcaTransform> pca_stat;
  std::optional<PcaTransform> pca_spat;
  std::optional<Projector> proj_stat;
  std::optional<Projector> proj_spat;

  Eigen::Index atoms() const noexcept { return U.cols(); }
  std::vector<ClassId> classes() const;
};

JointDictionary assemble_dictionaries(const std::vector<Atom>& train,
                                      const AssembleOptions& options = {});

struct Query {
  Eigen::VectorXd stat;
  Eigen::VectorXd spat;
};

/// Maps raw query vectors into the dictionary's coordinate system (PCA
/// projection when present, identity otherwise).
Query project_query(const JointDictionary& dict, const Eigen::VectorXd& stat,
                    const Eigen::VectorXd& spat);

struct J3SParams {
  double theta = 0.6;
  double lambda1 = 1e-3;
  double lambda2 = 1e-3;
  double lambda3 = 1e-3;
  int max_iters = 50;
  double tol = 1e-6;
  double eps = 1e-16;

  void validate() const;
};

struct JointCode {
  Eigen::VectorXd alpha;
  Eigen::VectorXd gamma;
  Eigen::VectorXd g_diag;
  std::vector<double> loss_trace;
  int iterations_used = 0;
  bool converged = false;
};

/// theta*||qs - U a||^2 + (1-theta)*||qp - V g||^2 + l1*||a||^2 + l2*||g||^2
///   + l3 * sum_k ||[a_k, g_k]||_2
double j3s_loss(const Eigen::VectorXd& q_stat, const Eigen::VectorXd& q_spat,
                const Eigen::MatrixXd& U, const Eigen::MatrixXd& V, const Eigen::VectorXd& alpha,
                const Eigen::VectorXd& gamma, const J3SParams& params);

/// (U^T U + l1/theta I + l3/theta G)^-1 U^T q_stat via Cholesky.
Eigen::VectorXd update_alpha(const Eigen::VectorXd& q_stat, const Eigen::MatrixXd& U,
                             const Eigen::VectorXd& g_diag, const J3SParams& params);

/// (V^T V + l2/(1-theta) I + l3/(1-theta) G)^-1 V^T q_spat via Cholesky.
Eigen::VectorXd update_gamma(const Eigen::VectorXd& q_spat, const Eigen::MatrixXd& V,
                             const Eigen::VectorXd& g_diag, const J3SParams& params);

/// G_kk = 1 / (2 ||[a_k, g_k]||_2 + eps)
Eigen::VectorXd update_G(const Eigen::VectorXd& alpha, const Eigen::VectorXd& gamma, double eps);

/// Alternating closed-form minimization over explicit dictionaries.
JointCode solve_columns(const Eigen::VectorXd& q_stat, const Eigen::VectorXd& q_spat,
                        const Eigen::MatrixXd& U, const Eigen::MatrixXd& V,
                        const J3SParams& params);

/// Solve against the whole dictionary, or only the columns of one class.
/// The query must already be in dictionary coordinates (see project_query).
JointCode solve(const Query& query, const JointDictionary& dict, const J3SParams& params,
                std::optional<ClassId> restrict_to = std::nullopt);

}  // namespace j3s
