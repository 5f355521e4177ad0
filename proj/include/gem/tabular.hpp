#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace gem {

// Samples x features block of real values. Immutable after construction.
struct FeatureMatrix {
  std::vector<std::string> sample_ids;
  std::vector<std::string> feature_ids;
  Eigen::MatrixXd values;  // rows = samples, columns = features

  Eigen::Index n_samples() const { return values.rows(); }
  Eigen::Index n_features() const { return values.cols(); }

  // Throws if ids are duplicated, dimensions disagree or values are non-finite.
  void validate() const;
  std::optional<Eigen::Index> feature_index(const std::string& id) const;
};

// Per-sample categorical factors.
struct DesignTable {
  std::vector<std::string> sample_ids;
  std::vector<std::string> factor_names;
  // factor_levels[f][s] = level label of factor f for sample s, verbatim.
  std::vector<std::vector<std::string>> factor_levels;

  // set when any factor had a single observed level at load time
  std::vector<std::string> single_level_factors;

  Eigen::Index n_samples() const {
    return static_cast<Eigen::Index>(sample_ids.size());
  }
  const std::vector<std::string>& levels_of(const std::string& factor) const;
  bool has_factor(const std::string& factor) const;
  // distinct levels in sorted order
  std::vector<std::string> distinct_levels(const std::string& factor) const;
};

// Applied centers/scales plus dropped features; written as sidecar JSON so
// downstream steps can be reproduced bit for bit.
struct StandardizationRecord {
  std::vector<std::string> feature_ids;  // retained features, in order
  std::vector<double> centers;
  std::vector<double> scales;  // 1.0 when mode = center
  std::vector<std::string> dropped_features;  // zero variance under autoscale
  std::string mode;  // "center" or "autoscale"
};

enum class Orientation { SamplesAsRows, FeaturesAsRows };
enum class ScalingMode { Center, Autoscale };

// Delimiter from extension: .csv -> ',', .tsv/.txt -> '\t'. Explicit
// delimiter overrides.
char detect_delimiter(const std::string& path);

FeatureMatrix load_feature_matrix(const std::string& path,
                                  Orientation orientation,
                                  std::optional<char> delimiter = {});
void write_feature_matrix(const FeatureMatrix& m, const std::string& path,
                          std::optional<char> delimiter = {});

DesignTable load_design_table(const std::string& path,
                              std::optional<char> delimiter = {});
void write_design_table(const DesignTable& d, const std::string& path,
                        std::optional<char> delimiter = {});

// Columnwise centering (and unit sd, divisor n-1, under autoscale).
// Zero-variance features are dropped under autoscale and listed in the record.
std::pair<FeatureMatrix, StandardizationRecord> standardize(
    const FeatureMatrix& m, ScalingMode mode);

void write_standardization_record(const StandardizationRecord& r,
                                  const std::string& path);
StandardizationRecord load_standardization_record(const std::string& path);

// Restrict to the shared feature intersection, autoscale each cohort,
// stack by rows, autoscale the stacked matrix again. The output design keeps
// the shared factors and gains a "cohort" factor with the given names.
std::pair<FeatureMatrix, DesignTable> merge_cohorts(
    const std::vector<std::pair<FeatureMatrix, DesignTable>>& cohorts,
    const std::vector<std::string>& cohort_names);

}  // namespace gem
