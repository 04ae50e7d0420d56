#pragma once

#include <vector>

#include <Eigen/Dense>

namespace j3s {

enum class DictInit { Dct, Identity };

/// How a d x m sample matrix is turned into a 2-D field for patch extraction.
enum class PatchLayout {
  Matrix,    // use the d x m matrix as-is
  Mosaic,    // reshape each column to frame_height x (d / frame_height), tile side by side
  PerFrame,  // reshape each column the same way, extract patches per frame and pool them
};

struct PatchConfig {
  int patch_h = 8;
  int patch_w = 8;
  int stride = 4;
  double sparsity_fraction = 0.1;
  int iterations = 20;
  DictInit init = DictInit::Dct;
  PatchLayout layout = PatchLayout::Matrix;
  int frame_height = 0;  // required for Mosaic / PerFrame

  int patch_size() const noexcept { return patch_h * patch_w; }
  /// Number of nonzeros kept per patch code: ceil(sparsity_fraction * p).
  int sparsity() const;
  void validate() const;
};

struct UnitaryDictionary {
  Eigen::MatrixXd D;  // p x p, orthonormal columns; D = W^T
  Eigen::VectorXd spatial_vector;
  double final_objective = 0.0;
  std::vector<double> objective_trace;  // objective after each coding step
  double max_unitarity_residual = 0.0;  // worst ||W^T W - I||_F over all updates
  int degenerate_updates = 0;           // updates where K vanished and W was reset to I
};

struct TransformUpdate {
  Eigen::MatrixXd W;
  bool degenerate = false;
};

/// Sliding-window patches, one column-major vectorized patch per column.
/// Window origins are visited row-major (row offset outer, column offset inner).
Eigen::MatrixXd extract_patches(const Eigen::MatrixXd& image, const PatchConfig& cfg);

/// Builds the 2-D field(s) for a sample according to cfg.layout and
/// extracts patches from them.
Eigen::MatrixXd sample_patches(const Eigen::MatrixXd& sample, const PatchConfig& cfg);

/// Tiles the columns of a d x m matrix, each reshaped column-major to
/// frame_height x (d / frame_height), into one horizontal mosaic.
Eigen::MatrixXd tile_frames(const Eigen::MatrixXd& sample, int frame_height);

/// Keeps the s largest-magnitude entries; ties keep the lower index.
Eigen::VectorXd hard_threshold(const Eigen::VectorXd& v, int s);

/// Column-wise hard_threshold.
Eigen::MatrixXd hard_threshold_columns(const Eigen::MatrixXd& v, int s);

/// Unitary W minimizing ||W * patches - codes||_F^2 (orthogonal Procrustes).
/// If K = patches * codes^T is zero every unitary W is optimal and the
/// identity is returned with `degenerate` set.
TransformUpdate transform_update(const Eigen::MatrixXd& patches, const Eigen::MatrixXd& codes);

/// Orthonormal 2-D DCT-II analysis matrix for column-major h x w patches.
Eigen::MatrixXd dct2_matrix(int h, int w);

/// Alternates per-patch hard-threshold coding and the closed-form transform
/// update; returns D = W^T.
UnitaryDictionary learn_unitary(const Eigen::MatrixXd& sample, const PatchConfig& cfg);

/// Same as learn_unitary but starting from already extracted patches.
UnitaryDictionary learn_unitary_from_patches(const Eigen::MatrixXd& patches, const PatchConfig& cfg);

/// Column-major flattening of D.
Eigen::VectorXd spatial_vector(const Eigen::MatrixXd& D);

double unitarity_residual(const Eigen::MatrixXd& W);

}  // namespace j3s
