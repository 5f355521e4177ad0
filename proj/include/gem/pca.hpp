#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "gem/tabular.hpp"

namespace gem {

struct PcaModel {
  Eigen::MatrixXd scores;    // samples x k
  Eigen::MatrixXd loadings;  // features x k, columns orthonormal
  std::vector<double> explained_variance;  // fraction per component
  StandardizationRecord preprocessing;
  std::vector<std::string> sample_ids;
  std::vector<std::string> feature_ids;
};

// Truncated SVD of the preprocessed matrix, computed on the smaller Gram
// side. Sign convention: the largest-magnitude loading entry per component
// is positive.
PcaModel fit_pca(const FeatureMatrix& x, Eigen::Index k, ScalingMode scaling);

struct SeparationReport {
  double between_total_ratio = 0.0;  // in [0, 1]
  double t_statistic = 0.0;          // meaningful only for two levels
  bool has_t = false;
};

// Between-group variance fraction of one score column.
SeparationReport grouping_separation(const PcaModel& m,
                                     const std::vector<std::string>& labels,
                                     Eigen::Index comp);

// Minimal static scatter of two score columns, markers colored by label.
void write_score_svg(const PcaModel& m, Eigen::Index cx, Eigen::Index cy,
                     const std::vector<std::string>& labels,
                     const std::string& path);

}  // namespace gem
