#pragma once

#include <Eigen/Dense>

namespace j3s {

/// Symmetric real matrix. The stored value is always (A + A^T) / 2 of
/// whatever was passed in, so entries(i, j) == entries(j, i) bit-for-bit.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Eigen::MatrixXd& a);

  static SymMatrix identity(Eigen::Index n);
  static SymMatrix zero(Eigen::Index n);

  Eigen::Index size() const noexcept { return m_.rows(); }
  const Eigen::MatrixXd& matrix() const noexcept { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  Eigen::MatrixXd m_;
};

/// Eigenvalues in non-increasing order with matching orthonormal columns.
struct EigPair {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

inline constexpr double kDefaultEigFloor = 1e-10;

EigPair sym_eig(const SymMatrix& a);

/// Matrix logarithm of an SPD matrix. Eigenvalues below eig_floor are
/// replaced by eig_floor before taking the log; an eigenvalue below
/// -eig_floor means the input is genuinely indefinite and is rejected.
SymMatrix spd_logm(const SymMatrix& p, double eig_floor = kDefaultEigFloor);

/// Upper triangle including the diagonal, row-major: (0,0),(0,1)...(0,n-1),(1,1)...
Eigen::VectorXd triu_vec(const SymMatrix& s);

}  // namespace j3s
