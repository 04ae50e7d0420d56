#include "j3s/classifier.hpp"

#include "j3s/error.hpp"

namespace j3s {

double class_error(const Eigen::VectorXd& q_stat, const Eigen::VectorXd& q_spat,
                   const Eigen::Ref<const Eigen::MatrixXd>& U_i,
                   const Eigen::Ref<const Eigen::MatrixXd>& V_i, const Eigen::VectorXd& alpha_i,
                   const Eigen::VectorXd& gamma_i, double theta) {
  if (U_i.rows() != q_stat.size() || V_i.rows() != q_spat.size() || U_i.cols() != alpha_i.size() ||
      V_i.cols() != gamma_i.size()) {
    throw Error(ErrorCode::DimensionMismatch, "class_error operand shapes disagree");
  }
  return theta * (q_stat - U_i * alpha_i).squaredNorm() +
         (1.0 - theta) * (q_spat - V_i * gamma_i).squaredNorm();
}

ClassId argmin_class(const std::map<ClassId, double>& errors) {
  if (errors.empty()) throw Error(ErrorCode::EmptyClass, "no class errors to compare");
  auto best = errors.begin();
  for (auto it = errors.begin(); it != errors.end(); ++it) {
    if (it->second < best->second) best = it;  // strict: earlier (smaller) id wins ties
  }
  return best->first;
}

PredictionReport predict(const Query& query, const JointDictionary& dict, const J3SParams& params,
                         const PredictOptions& options) {
  if (dict.class_ranges.empty()) throw Error(ErrorCode::EmptyClass, "dictionary is empty");
  PredictionReport report;

  if (options.mode == CodingMode::PerClass) {
    for (const auto& [id, r] : dict.class_ranges) {
      const JointCode code = solve(query, dict, params, id);
      report.class_errors[id] =
          class_error(query.stat, query.spat, dict.U.middleCols(r.begin, r.size()),
                      dict.V.middleCols(r.begin, r.size()), code.alpha, code.gamma, params.theta);
      report.per_class_iterations[id] = code.iterations_used;
      if (options.keep_traces) report.loss_traces[id] = code.loss_trace;
    }
  } else {
    const JointCode code = solve(query, dict, params);
    for (const auto& [id, r] : dict.class_ranges) {
      report.class_errors[id] = class_error(
          query.stat, query.spat, dict.U.middleCols(r.begin, r.size()),
          dict.V.middleCols(r.begin, r.size()), code.alpha.segment(r.begin, r.size()),
          code.gamma.segment(r.begin, r.size()), params.theta);
      report.per_class_iterations[id] = code.iterations_used;
      if (options.keep_traces) report.loss_traces[id] = code.loss_trace;
    }
  }
  report.predicted = argmin_class(report.class_errors);
  return report;
}

}  // namespace j3s
