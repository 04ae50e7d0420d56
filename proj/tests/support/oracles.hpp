#pragma once

// Reference computations used only by tests. None of these call into the
// library; they are deliberately naive so they can check it.

#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Dense>

namespace j3s::testing {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = n(rng);
  return m;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n) {
  return random_matrix(rng, n, 1).col(0);
}

inline Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, Eigen::Index n) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(rng, n, n));
  Eigen::MatrixXd q = qr.householderQ();
  // Fix column signs so the distribution is Haar.
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i)
    if (r(i, i) < 0) q.col(i) *= -1.0;
  return q;
}

/// Random PSD matrix, possibly rank deficient.
inline Eigen::MatrixXd random_psd(std::mt19937_64& rng, Eigen::Index n, Eigen::Index rank) {
  const Eigen::MatrixXd a = random_matrix(rng, n, rank);
  return a * a.transpose();
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
inline Eigen::MatrixXd expm_taylor(const Eigen::MatrixXd& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Eigen::MatrixXd scaled = a / std::pow(2.0, squarings);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Eigen::MatrixXd sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

/// Golden-section minimization of a unimodal function on [lo, hi].
inline double golden_section(const std::function<double(double)>& f, double lo, double hi,
                             double tol = 1e-13) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 400 && (b - a) > tol * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Conjugate gradients on an SPD system, run to machine precision.
inline Eigen::VectorXd cg_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  Eigen::VectorXd r = b;
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  for (int it = 0; it < 20 * b.size() + 100 && rr > 1e-32 * (1.0 + b.squaredNorm()); ++it) {
    const Eigen::VectorXd ap = a * p;
    const double step = rr / p.dot(ap);
    x += step * p;
    r -= step * ap;
    const double next = r.squaredNorm();
    p = r + (next / rr) * p;
    rr = next;
  }
  return x;
}

struct J3SProblem {
  Eigen::VectorXd q_stat, q_spat;
  Eigen::MatrixXd U, V;
  double theta, lambda1, lambda2, lambda3;
};

inline double j3s_objective(const J3SProblem& p, const Eigen::VectorXd& a, const Eigen::VectorXd& g) {
  double l21 = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) l21 += std::hypot(a(k), g(k));
  return p.theta * (p.q_stat - p.U * a).squaredNorm() +
         (1 - p.theta) * (p.q_spat - p.V * g).squaredNorm() + p.lambda1 * a.squaredNorm() +
         p.lambda2 * g.squaredNorm() + p.lambda3 * l21;
}

/// Accelerated proximal gradient on the joint objective; the prox of the
/// l2,1 term is row-wise group soft thresholding of [a_k, g_k].
inline double j3s_prox_gradient(const J3SProblem& p, int steps, Eigen::VectorXd* a_out = nullptr,
                                Eigen::VectorXd* g_out = nullptr) {
  const Eigen::Index n = p.U.cols();
  // Lipschitz constant of the smooth part's gradient.
  const double la = 2 * p.theta * Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(p.U.transpose() * p.U)
                                      .eigenvalues()
                                      .maxCoeff() +
                    2 * p.lambda1;
  const double lg = 2 * (1 - p.theta) *
                        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(p.V.transpose() * p.V)
                            .eigenvalues()
                            .maxCoeff() +
                    2 * p.lambda2;
  const double step = 1.0 / std::max(la, lg);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n), g = a, ya = a, yg = a;
  double t = 1.0;
  double best = j3s_objective(p, a, g);
  Eigen::VectorXd best_a = a, best_g = g;
  for (int it = 0; it < steps; ++it) {
    const Eigen::VectorXd grad_a = 2 * p.theta * p.U.transpose() * (p.U * ya - p.q_stat) + 2 * p.lambda1 * ya;
    const Eigen::VectorXd grad_g = 2 * (1 - p.theta) * p.V.transpose() * (p.V * yg - p.q_spat) + 2 * p.lambda2 * yg;
    Eigen::VectorXd na = ya - step * grad_a;
    Eigen::VectorXd ng = yg - step * grad_g;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double r = std::hypot(na(k), ng(k));
      const double shrink = r > 0 ? std::max(0.0, 1.0 - step * p.lambda3 / r) : 0.0;
      na(k) *= shrink;
      ng(k) *= shrink;
    }
    const double nt = (1 + std::sqrt(1 + 4 * t * t)) / 2;
    ya = na + ((t - 1) / nt) * (na - a);
    yg = ng + ((t - 1) / nt) * (ng - g);
    a = na;
    g = ng;
    t = nt;
    const double f = j3s_objective(p, a, g);
    if (f < best) {
      best = f;
      best_a = a;
      best_g = g;
    }
  }
  if (a_out) *a_out = best_a;
  if (g_out) *g_out = best_g;
  return best;
}

inline J3SProblem random_j3s_problem(std::mt19937_64& rng, Eigen::Index atoms, Eigen::Index d1,
                                     Eigen::Index d2, double lambda3) {
  J3SProblem p;
  p.U = random_matrix(rng, d1, atoms);
  p.V = random_matrix(rng, d2, atoms);
  p.q_stat = random_vector(rng, d1);
  p.q_spat = random_vector(rng, d2);
  std::uniform_real_distribution<double> th(0.2, 0.8);
  p.theta = th(rng);
  p.lambda1 = 1e-3;
  p.lambda2 = 1e-3;
  p.lambda3 = lambda3;
  return p;
}

}  // namespace j3s::testing
