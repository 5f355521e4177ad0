#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gem/tabular.hpp"

namespace gem {

// Two-level class response dummy coded 0/1 (reference class 0).
struct ClassResponse {
  Eigen::VectorXd dummy;             // entries in {0, 1}
  std::string level0;                // label mapped to 0
  std::string level1;                // label mapped to 1

  static ClassResponse from_labels(const std::vector<std::string>& labels);
};

// Orthogonal-scores PLS1 (NIPALS deflation), single dummy response.
struct PlsModel {
  Eigen::Index n_components = 0;
  Eigen::MatrixXd weights;       // features x A
  Eigen::MatrixXd x_loadings;    // features x A
  Eigen::VectorXd y_loadings;    // A
  Eigen::MatrixXd scores;        // samples x A
  // coefficients per component count: coef_path.col(a-1) predicts with a comps
  Eigen::MatrixXd coef_path;     // features x A
  Eigen::VectorXd coefficients;  // features, at A components
  double intercept = 0.0;
  Eigen::RowVectorXd x_centers;
  Eigen::RowVectorXd x_scales;
  double y_mean = 0.0;
  std::string scaling;  // "center" or "autoscale"
  std::vector<std::string> feature_ids;
  std::string level0, level1;
  bool truncated = false;  // a_max exceeded rank and was reduced
};

enum class SegmentScheme { LeaveOneOut, RandomBalanced };

struct CvResult {
  std::vector<std::vector<Eigen::Index>> segments;
  Eigen::MatrixXd oof_predictions;        // samples x A, out-of-fold scores
  std::vector<int> misclassified;         // per component count 1..A
  Eigen::Index chosen_a = 0;
  Eigen::MatrixXd segment_coefficients;   // features x M, at chosen_a
  Eigen::VectorXd full_coefficients;      // features, full model at chosen_a
  double oof_accuracy = 0.0;              // at chosen_a
};

struct JackknifeEntry {
  std::string feature_id;
  double coefficient = 0.0;
  double t = 0.0;
  double p = 1.0;
  bool selected = false;
  bool degenerate = false;  // zero jackknife variance with nonzero coefficient
};

struct JackknifeReport {
  std::vector<JackknifeEntry> entries;
  double rejection_limit = 0.05;
  Eigen::Index df = 1;
  bool df_floored = false;
  Eigen::Index dof_consumed_step1 = 0;

  std::size_t n_selected() const;
};

PlsModel fit_pls(const FeatureMatrix& x, const ClassResponse& y,
                 Eigen::Index a_max, ScalingMode scaling = ScalingMode::Autoscale);

// Segmented cross-validation; chosen A = smallest component count whose
// out-of-fold misclassification count is within 1 of the minimum.
CvResult cross_validate(const FeatureMatrix& x, const ClassResponse& y,
                        SegmentScheme scheme, Eigen::Index n_segments,
                        std::uint64_t seed, Eigen::Index a_max,
                        ScalingMode scaling = ScalingMode::Autoscale);

// Martens jackknife across segment refits; df = M - 1 - dof_consumed_step1,
// floored at 1.
JackknifeReport jackknife_test(const CvResult& cv, const PlsModel& full,
                               Eigen::Index dof_consumed_step1,
                               double rejection_limit = 0.05);

struct Prediction {
  Eigen::VectorXd scores;           // continuous, dummy scale
  std::vector<std::string> labels;  // thresholded at 0.5, ties to class 0
};

Prediction predict(const PlsModel& model, const FeatureMatrix& x_new);

}  // namespace gem
