#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "j3s/joint_coder.hpp"

namespace j3s {

enum class CodingMode {
  PerClass,  // one joint solve per class sub-dictionary
  Global,    // one solve over all atoms, errors from per-class sub-vectors
};

struct PredictionReport {
  std::string sample_id;
  ClassId predicted = 0;
  std::optional<ClassId> true_label;
  std::map<ClassId, double> class_errors;
  std::map<ClassId, int> per_class_iterations;
  std::map<ClassId, std::vector<double>> loss_traces;  // filled when requested
};

/// theta * ||q_stat - U_i a_i||^2 + (1 - theta) * ||q_spat - V_i g_i||^2
double class_error(const Eigen::VectorXd& q_stat, const Eigen::VectorXd& q_spat,
                   const Eigen::Ref<const Eigen::MatrixXd>& U_i,
                   const Eigen::Ref<const Eigen::MatrixXd>& V_i, const Eigen::VectorXd& alpha_i,
                   const Eigen::VectorXd& gamma_i, double theta);

/// Smallest error wins; ties go to the smallest class id.
ClassId argmin_class(const std::map<ClassId, double>& errors);

struct PredictOptions {
  CodingMode mode = CodingMode::PerClass;
  bool keep_traces = false;
};

/// Classifies a query already projected into dictionary coordinates.
PredictionReport predict(const Query& query, const JointDictionary& dict, const J3SParams& params,
                         const PredictOptions& options = {});

}  // namespace j3s
