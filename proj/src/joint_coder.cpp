#include "j3s/joint_coder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "j3s/error.hpp"

namespace j3s {

namespace {

using ConstMatRef = Eigen::Ref<const Eigen::MatrixXd>;
using ConstVecRef = Eigen::Ref<const Eigen::VectorXd>;

std::string dims(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

/// (gram + ridge I + weight diag(g)) x = rhs
Eigen::VectorXd regularized_solve(const ConstMatRef& gram, const ConstVecRef& rhs, double ridge,
                                  double weight, const ConstVecRef& g_diag) {
  Eigen::MatrixXd system = gram;
  system.diagonal().array() += ridge + weight * g_diag.array();
  Eigen::LLT<Eigen::MatrixXd> llt(system);
  const bool unregularized = ridge == 0.0 && weight == 0.0;
  if (llt.info() != Eigen::Success || (unregularized && llt.rcond() < 1e-14)) {
    throw Error(ErrorCode::SingularSystem,
                "coding system of size " + std::to_string(gram.rows()) + " is singular");
  }
  return llt.solve(rhs);
}

void check_params_shapes(const ConstVecRef& q, const ConstMatRef& A, const char* what) {
  if (q.size() != A.rows()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " query has length " +
                                                  std::to_string(q.size()) + ", dictionary is " +
                                                  dims(A.rows(), A.cols()));
  }
}

double loss_impl(const ConstVecRef& q_stat, const ConstVecRef& q_spat, const ConstMatRef& U,
                 const ConstMatRef& V, const Eigen::VectorXd& alpha, const Eigen::VectorXd& gamma,
                 const J3SParams& p) {
  const double fit_stat = (q_stat - U * alpha).squaredNorm();
  const double fit_spat = (q_spat - V * gamma).squaredNorm();
  const double l21 = (alpha.array().square() + gamma.array().square()).sqrt().sum();
  return p.theta * fit_stat + (1.0 - p.theta) * fit_spat + p.lambda1 * alpha.squaredNorm() +
         p.lambda2 * gamma.squaredNorm() + p.lambda3 * l21;
}

JointCode irls(const ConstVecRef& q_stat, const ConstVecRef& q_spat, const ConstMatRef& U,
               const ConstMatRef& V, const ConstMatRef& gram_U, const ConstMatRef& gram_V,
               const J3SParams& p) {
  p.validate();
  check_params_shapes(q_stat, U, "statistical");
  check_params_shapes(q_spat, V, "spatial");
  if (U.cols() != V.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "U has " + std::to_string(U.cols()) +
                                                  " columns, V has " + std::to_string(V.cols()));
  }
  const Eigen::Index n = U.cols();
  const Eigen::VectorXd rhs_stat = U.transpose() * q_stat;
  const Eigen::VectorXd rhs_spat = V.transpose() * q_spat;

  JointCode code;
  code.g_diag = Eigen::VectorXd::Ones(n);
  double previous = 0.0;
  for (int it = 1; it <= p.max_iters; ++it) {
    code.alpha = regularized_solve(gram_U, rhs_stat, p.lambda1 / p.theta, p.lambda3 / p.theta,
                                   code.g_diag);
    code.gamma = regularized_solve(gram_V, rhs_spat, p.lambda2 / (1.0 - p.theta),
                                   p.lambda3 / (1.0 - p.theta), code.g_diag);
    code.g_diag = update_G(code.alpha, code.gamma, p.eps);

    const double loss = loss_impl(q_stat, q_spat, U, V, code.alpha, code.gamma, p);
    if (!std::isfinite(loss)) {
      throw Error(ErrorCode::NumericalDivergence,
                  "loss became non-finite at iteration " + std::to_string(it));
    }
    code.loss_trace.push_back(loss);
    code.iterations_used = it;
    if (it > 1 && std::abs(previous - loss) < p.tol) {
      code.converged = true;
      break;
    }
    previous = loss;
  }
  return code;
}

}  // namespace

Atom make_atom(const GaussianDescriptor& g, const UnitaryDictionary& u, ClassId label,
               std::string sample_id) {
  return Atom{g.stat_vector, u.spatial_vector, label, std::move(sample_id)};
}

std::vector<ClassId> JointDictionary::classes() const {
  std::vector<ClassId> out;
  out.reserve(class_ranges.size());
  for (const auto& [id, range] : class_ranges) out.push_back(id);
  return out;
}

JointDictionary assemble_dictionaries(const std::vector<Atom>& train,
                                      const AssembleOptions& options) {
  if (train.empty()) throw Error(ErrorCode::EmptyClass, "no training samples");
  const Eigen::Index d1 = train.front().stat.size();
  const Eigen::Index d2 = train.front().spat.size();
  for (const Atom& a : train) {
    if (a.stat.size() != d1 || a.spat.size() != d2) {
      throw Error(ErrorCode::DimensionMismatch,
                  "sample '" + a.sample_id + "' has dimensions (" + std::to_string(a.stat.size()) +
                      ", " + std::to_string(a.spat.size()) + "), expected (" +
                      std::to_string(d1) + ", " + std::to_string(d2) + ")");
    }
  }
  for (ClassId c : options.declared_classes) {
    const bool present =
        std::any_of(train.begin(), train.end(), [c](const Atom& a) { return a.label == c; });
    if (!present) throw Error(ErrorCode::EmptyClass, "class " + std::to_string(c) + " has no samples");
  }

  // Stable sort by class keeps the input order within each class.
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return train[a].label < train[b].label; });

  const auto n = static_cast<Eigen::Index>(train.size());
  Eigen::MatrixXd S1(d1, n);
  Eigen::MatrixXd S2(d2, n);
  JointDictionary dict;
  for (Eigen::Index j = 0; j < n; ++j) {
    const Atom& a = train[order[static_cast<std::size_t>(j)]];
    S1.col(j) = a.stat;
    S2.col(j) = a.spat;
    dict.column_labels.push_back(a.label);
    dict.column_ids.push_back(a.sample_id);
    auto [it, inserted] = dict.class_ranges.try_emplace(a.label, ColumnRange{j, j + 1});
    if (!inserted) it->second.end = j + 1;
  }

  if (options.pca != PcaMode::Off) {
    auto fit = [&](const Eigen::MatrixXd& cols, const Eigen::MatrixXd& extra) {
      Eigen::MatrixXd rows(cols.cols() + extra.cols(), cols.rows());
      rows.topRows(cols.cols()) = cols.transpose();
      if (extra.cols() > 0) {
        if (extra.rows() != cols.rows()) {
          throw Error(ErrorCode::DimensionMismatch, "extra PCA fit columns have wrong dimension");
        }
        rows.bottomRows(extra.cols()) = extra.transpose();
      }
      if (rows.rows() < 2) throw Error(ErrorCode::InvalidConfig, "PCA needs at least 2 samples");
      return pca_fit(rows, default_pca_components(rows.rows(), rows.cols()));
    };
    dict.pca_stat = fit(S1, options.extra_stat_fit);
    dict.pca_spat = fit(S2, options.extra_spat_fit);
    if (options.pca == PcaMode::Span) {
      dict.proj_stat = span_projector(*dict.pca_stat);
      dict.proj_spat = span_projector(*dict.pca_spat);
    } else {
      dict.proj_stat = centered_projector(*dict.pca_stat);
      dict.proj_spat = centered_projector(*dict.pca_spat);
    }
    dict.U = dict.proj_stat->apply_columns(S1);
    dict.V = dict.proj_spat->apply_columns(S2);
  } else {
    dict.U = std::move(S1);
    dict.V = std::move(S2);
  }
  dict.gram_U = dict.U.transpose() * dict.U;
  dict.gram_V = dict.V.transpose() * dict.V;
  return dict;
}

Query project_query(const JointDictionary& dict, const Eigen::VectorXd& stat,
                    const Eigen::VectorXd& spat) {
  Query q;
  q.stat = dict.proj_stat ? dict.proj_stat->apply(stat) : stat;
  q.spat = dict.proj_spat ? dict.proj_spat->apply(spat) : spat;
  return q;
}

void J3SParams::validate() const {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "theta must lie in (0,1), got " + std::to_string(theta));
  }
  if (!(lambda1 >= 0.0 && lambda2 >= 0.0 && lambda3 >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "lambda1..3 must be non-negative");
  }
  if (max_iters < 1) throw Error(ErrorCode::InvalidConfig, "max_iters must be >= 1");
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidConfig, "tol must be positive");
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidConfig, "eps must be positive");
}

double j3s_loss(const Eigen::VectorXd& q_stat, const Eigen::VectorXd& q_spat,
                const Eigen::MatrixXd& U, const Eigen::MatrixXd& V, const Eigen::VectorXd& alpha,
                const Eigen::VectorXd& gamma, const J3SParams& params) {
  check_params_shapes(q_stat, U, "statistical");
  check_params_shapes(q_spat, V, "spatial");
  if (alpha.size() != U.cols() || gamma.size() != V.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "coefficient length does not match dictionary");
  }
  return loss_impl(q_stat, q_spat, U, V, alpha, gamma, params);
}

Eigen::VectorXd update_alpha(const Eigen::VectorXd& q_stat, const Eigen::MatrixXd& U,
                             const Eigen::VectorXd& g_diag, const J3SParams& params) {
  params.validate();
  check_params_shapes(q_stat, U, "statistical");
  return regularized_solve(U.transpose() * U, U.transpose() * q_stat, params.lambda1 / params.theta,
                           params.lambda3 / params.theta, g_diag);
}

Eigen::VectorXd update_gamma(const Eigen::VectorXd& q_spat, const Eigen::MatrixXd& V,
                             const Eigen::VectorXd& g_diag, const J3SParams& params) {
  params.validate();
  check_params_shapes(q_spat, V, "spatial");
  const double w = 1.0 - params.theta;
  return regularized_solve(V.transpose() * V, V.transpose() * q_spat, params.lambda2 / w,
                           params.lambda3 / w, g_diag);
}

Eigen::VectorXd update_G(const Eigen::VectorXd& alpha, const Eigen::VectorXd& gamma, double eps) {
  if (alpha.size() != gamma.size()) {
    throw Error(ErrorCode::DimensionMismatch, "alpha and gamma lengths differ");
  }
  const Eigen::ArrayXd norms = (alpha.array().square() + gamma.array().square()).sqrt();
  return (1.0 / (2.0 * norms + eps)).matrix();
}

JointCode solve_columns(const Eigen::VectorXd& q_stat, const Eigen::VectorXd& q_spat,
                        const Eigen::MatrixXd& U, const Eigen::MatrixXd& V,
                        const J3SParams& params) {
  const Eigen::MatrixXd gram_U = U.transpose() * U;
  const Eigen::MatrixXd gram_V = V.transpose() * V;
  return irls(q_stat, q_spat, U, V, gram_U, gram_V, params);
}

JointCode solve(const Query& query, const JointDictionary& dict, const J3SParams& params,
                std::optional<ClassId> restrict_to) {
  if (!restrict_to) {
    return irls(query.stat, query.spat, dict.U, dict.V, dict.gram_U, dict.gram_V, params);
  }
  const auto it = dict.class_ranges.find(*restrict_to);
  if (it == dict.class_ranges.end()) {
    throw Error(ErrorCode::EmptyClass, "class " + std::to_string(*restrict_to) + " not in dictionary");
  }
  const ColumnRange r = it->second;
  return irls(query.stat, query.spat, dict.U.middleCols(r.begin, r.size()),
              dict.V.middleCols(r.begin, r.size()),
              dict.gram_U.block(r.begin, r.begin, r.size(), r.size()),
              dict.gram_V.block(r.begin, r.begin, r.size(), r.size()), params);
}

}  // namespace j3s
