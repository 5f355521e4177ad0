#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gem/design.hpp"
#include "gem/tabular.hpp"

namespace gem {

// Planted-effect synthetic cohort generator. Effect sizes are in units of
// the noise standard deviation; level shifts are applied as +/- half the
// stated size around the grand mean.
struct SynthSpec {
  // samples per cohort and class: {cohort}{class0, class1}
  std::vector<std::pair<Eigen::Index, Eigen::Index>> cohort_sizes{{7, 8}, {13, 14}};
  Eigen::Index n_features = 1000;
  Eigen::Index n_informative = 50;
  double class_effect = 1.0;       // on informative features only
  double batch_shift = 0.0;        // all features, batches within each cohort
  double cohort_shift = 0.0;       // all features
  double interaction_effect = 0.0; // informative features, cohort x class
  double noise_sd = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
  Eigen::Index n_samples() const;
};

struct GroundTruth {
  std::vector<std::string> informative_features;
  std::vector<double> effect_signs;  // per informative feature
  // closed-form average variance fraction per term across features
  double batch_fraction = 0.0;
  double cohort_fraction = 0.0;
  double class_fraction = 0.0;
};

struct SynthData {
  FeatureMatrix features;
  DesignTable design;  // factors: batch, cohort, disease
  GroundTruth truth;
};

SynthData generate(const SynthSpec& spec);

void write_ground_truth(const GroundTruth& t, const std::string& path);

// Independent dense least-squares path (normal equations via a pivoted LU
// inverse) used as the oracle for the QR-based GLM fit.
Eigen::MatrixXd oracle_ols(const Eigen::MatrixXd& x, const Eigen::MatrixXd& design);

struct RecoveryReport {
  double precision = 1.0;
  double recall = 0.0;
  bool empty_selection = false;  // precision reported as 1 by convention
  std::vector<std::string> exceptions;  // selected but not planted
};

RecoveryReport evaluate_recovery(const std::vector<std::string>& selected,
                                 const GroundTruth& truth);

}  // namespace gem
