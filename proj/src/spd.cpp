#include "j3s/spd.hpp"

#include <cmath>
#include <string>

#include "j3s/error.hpp"

namespace j3s {

SymMatrix::SymMatrix(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::InvalidInput, "matrix is " + std::to_string(a.rows()) + "x" +
                                             std::to_string(a.cols()) + ", expected square");
  }
  if (!a.allFinite()) throw Error(ErrorCode::InvalidInput, "matrix has non-finite entries");
  m_ = 0.5 * (a + a.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index n) { return SymMatrix(Eigen::MatrixXd::Identity(n, n)); }

SymMatrix SymMatrix::zero(Eigen::Index n) { return SymMatrix(Eigen::MatrixXd::Zero(n, n)); }

EigPair sym_eig(const SymMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a.matrix());
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::InvalidInput, "eigendecomposition did not converge");
  }
  // Eigen returns ascending order; flip to non-increasing.
  EigPair out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

SymMatrix spd_logm(const SymMatrix& p, double eig_floor) {
  if (!(eig_floor > 0.0)) throw Error(ErrorCode::InvalidConfig, "eig_floor must be positive");
  const EigPair eig = sym_eig(p);
  Eigen::VectorXd logs(eig.values.size());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    const double v = eig.values(i);
    if (v < -eig_floor) {
      throw Error(ErrorCode::NotPositiveDefinite,
                  "eigenvalue " + std::to_string(v) + " below -" + std::to_string(eig_floor));
    }
    logs(i) = std::log(std::max(v, eig_floor));
  }
  return SymMatrix(eig.vectors * logs.asDiagonal() * eig.vectors.transpose());
}

Eigen::VectorXd triu_vec(const SymMatrix& s) {
  const Eigen::Index n = s.size();
  Eigen::VectorXd out(n * (n + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) out(k++) = s(i, j);
  }
  return out;
}

}  // namespace j3s
