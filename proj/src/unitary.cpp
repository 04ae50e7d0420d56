#include "j3s/unitary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "j3s/error.hpp"

namespace j3s {

namespace {

constexpr double kObjectiveTol = 1e-8;

std::string dims(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

double coding_objective(const Eigen::MatrixXd& W, const Eigen::MatrixXd& patches,
                        const Eigen::MatrixXd& codes) {
  return (W * patches - codes).squaredNorm();
}

Eigen::MatrixXd dct1_matrix(int n) {
  Eigen::MatrixXd c(n, n);
  const double pi = std::acos(-1.0);
  for (int k = 0; k < n; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int i = 0; i < n; ++i) c(k, i) = scale * std::cos(pi * (2.0 * i + 1.0) * k / (2.0 * n));
  }
  return c;
}

Eigen::MatrixXd frame(const Eigen::MatrixXd& sample, Eigen::Index col, int frame_height) {
  const Eigen::Index width = sample.rows() / frame_height;
  return Eigen::Map<const Eigen::MatrixXd>(sample.col(col).data(), frame_height, width);
}

void check_frame_height(const Eigen::MatrixXd& sample, int frame_height) {
  if (frame_height <= 0 || sample.rows() % frame_height != 0) {
    throw Error(ErrorCode::InvalidConfig, "frame_height " + std::to_string(frame_height) +
                                              " does not divide feature dimension " +
                                              std::to_string(sample.rows()));
  }
}

}  // namespace

int PatchConfig::sparsity() const {
  return std::max(1, static_cast<int>(std::ceil(sparsity_fraction * patch_size() - 1e-12)));
}

void PatchConfig::validate() const {
  if (patch_h < 1 || patch_w < 1) throw Error(ErrorCode::InvalidConfig, "patch size must be >= 1");
  if (stride < 1) throw Error(ErrorCode::InvalidConfig, "stride must be >= 1");
  if (!(sparsity_fraction > 0.0 && sparsity_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "sparsity_fraction must lie in (0,1]");
  }
  if (iterations < 0) throw Error(ErrorCode::InvalidConfig, "iterations must be >= 0");
}

Eigen::MatrixXd extract_patches(const Eigen::MatrixXd& image, const PatchConfig& cfg) {
  cfg.validate();
  if (image.rows() < cfg.patch_h || image.cols() < cfg.patch_w) {
    throw Error(ErrorCode::PatchTooLarge, "image " + dims(image.rows(), image.cols()) +
                                              " is smaller than patch " +
                                              dims(cfg.patch_h, cfg.patch_w));
  }
  const Eigen::Index rows = (image.rows() - cfg.patch_h) / cfg.stride + 1;
  const Eigen::Index cols = (image.cols() - cfg.patch_w) / cfg.stride + 1;
  Eigen::MatrixXd out(cfg.patch_size(), rows * cols);
  Eigen::Index n = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Eigen::MatrixXd block = image.block(r * cfg.stride, c * cfg.stride, cfg.patch_h, cfg.patch_w);
      out.col(n++) = Eigen::Map<const Eigen::VectorXd>(block.data(), block.size());
    }
  }
  return out;
}

Eigen::MatrixXd tile_frames(const Eigen::MatrixXd& sample, int frame_height) {
  check_frame_height(sample, frame_height);
  const Eigen::Index width = sample.rows() / frame_height;
  Eigen::MatrixXd mosaic(frame_height, width * sample.cols());
  for (Eigen::Index j = 0; j < sample.cols(); ++j) {
    mosaic.middleCols(j * width, width) = frame(sample, j, frame_height);
  }
  return mosaic;
}

Eigen::MatrixXd sample_patches(const Eigen::MatrixXd& sample, const PatchConfig& cfg) {
  switch (cfg.layout) {
    case PatchLayout::Matrix:
      return extract_patches(sample, cfg);
    case PatchLayout::Mosaic:
      return extract_patches(tile_frames(sample, cfg.frame_height), cfg);
    case PatchLayout::PerFrame: {
      check_frame_height(sample, cfg.frame_height);
      std::vector<Eigen::MatrixXd> parts;
      Eigen::Index total = 0;
      for (Eigen::Index j = 0; j < sample.cols(); ++j) {
        parts.push_back(extract_patches(frame(sample, j, cfg.frame_height), cfg));
        total += parts.back().cols();
      }
      Eigen::MatrixXd out(cfg.patch_size(), total);
      Eigen::Index at = 0;
      for (const auto& part : parts) {
        out.middleCols(at, part.cols()) = part;
        at += part.cols();
      }
      return out;
    }
  }
  throw Error(ErrorCode::InvalidConfig, "unknown patch layout");
}

Eigen::VectorXd hard_threshold(const Eigen::VectorXd& v, int s) {
  if (s < 1 || s > v.size()) {
    throw Error(ErrorCode::InvalidConfig, "sparsity " + std::to_string(s) +
                                              " out of range for length " + std::to_string(v.size()));
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(v.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return std::abs(v(a)) > std::abs(v(b)); });
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  for (int k = 0; k < s; ++k) out(order[k]) = v(order[k]);
  return out;
}

Eigen::MatrixXd hard_threshold_columns(const Eigen::MatrixXd& v, int s) {
  Eigen::MatrixXd out(v.rows(), v.cols());
  for (Eigen::Index j = 0; j < v.cols(); ++j) out.col(j) = hard_threshold(v.col(j), s);
  return out;
}

TransformUpdate transform_update(const Eigen::MatrixXd& patches, const Eigen::MatrixXd& codes) {
  if (patches.rows() != codes.rows() || patches.cols() != codes.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "patches " + dims(patches.rows(), patches.cols()) +
                                                  " vs codes " + dims(codes.rows(), codes.cols()));
  }
  const Eigen::Index p = patches.rows();
  const Eigen::MatrixXd K = patches * codes.transpose();
  TransformUpdate out;
  if (K.norm() == 0.0) {
    out.W = Eigen::MatrixXd::Identity(p, p);
    out.degenerate = true;
    return out;
  }
  // K = S diag G^T  =>  argmax tr(W K) over unitary W is G S^T.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(K, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.W = svd.matrixV() * svd.matrixU().transpose();
  return out;
}

Eigen::MatrixXd dct2_matrix(int h, int w) {
  // vec(Ch * P * Cw^T) = (Cw kron Ch) vec(P) for column-major vec.
  const Eigen::MatrixXd ch = dct1_matrix(h);
  const Eigen::MatrixXd cw = dct1_matrix(w);
  Eigen::MatrixXd out(h * w, h * w);
  for (int a = 0; a < w; ++a) {
    for (int b = 0; b < w; ++b) out.block(a * h, b * h, h, h) = cw(a, b) * ch;
  }
  return out;
}

double unitarity_residual(const Eigen::MatrixXd& W) {
  return (W.transpose() * W - Eigen::MatrixXd::Identity(W.cols(), W.cols())).norm();
}

UnitaryDictionary learn_unitary_from_patches(const Eigen::MatrixXd& patches, const PatchConfig& cfg) {
  cfg.validate();
  const int p = cfg.patch_size();
  if (patches.rows() != p) {
    throw Error(ErrorCode::DimensionMismatch, "patches have " + std::to_string(patches.rows()) +
                                                  " rows, patch size is " + std::to_string(p));
  }
  const int s = cfg.sparsity();

  Eigen::MatrixXd W = cfg.init == DictInit::Dct ? dct2_matrix(cfg.patch_h, cfg.patch_w)
                                                : Eigen::MatrixXd::Identity(p, p);
  UnitaryDictionary out;
  out.max_unitarity_residual = unitarity_residual(W);

  Eigen::MatrixXd codes = hard_threshold_columns(W * patches, s);
  double objective = coding_objective(W, patches, codes);
  out.objective_trace.push_back(objective);

  for (int it = 0; it < cfg.iterations; ++it) {
    TransformUpdate step = transform_update(patches, codes);
    if (step.degenerate) ++out.degenerate_updates;
    W = std::move(step.W);
    out.max_unitarity_residual = std::max(out.max_unitarity_residual, unitarity_residual(W));

    codes = hard_threshold_columns(W * patches, s);
    const double next = coding_objective(W, patches, codes);
    out.objective_trace.push_back(next);
    const bool settled = std::abs(objective - next) < kObjectiveTol;
    objective = next;
    if (settled) break;
  }

  out.final_objective = objective;
  out.D = W.transpose();
  out.spatial_vector = spatial_vector(out.D);
  return out;
}

UnitaryDictionary learn_unitary(const Eigen::MatrixXd& sample, const PatchConfig& cfg) {
  return learn_unitary_from_patches(sample_patches(sample, cfg), cfg);
}

Eigen::VectorXd spatial_vector(const Eigen::MatrixXd& D) {
  return Eigen::Map<const Eigen::VectorXd>(D.data(), D.size());
}

}  // namespace j3s
