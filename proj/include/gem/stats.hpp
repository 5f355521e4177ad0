#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gem/design.hpp"
#include "gem/tabular.hpp"

namespace gem {

struct AnovaResult {
  std::vector<double> f;  // per feature
  std::vector<double> p;  // raw, per feature
  std::vector<bool> constant_flag;    // constant feature, p forced to 1
  std::vector<bool> degenerate_flag;  // zero within-variance, p at minimum
  Eigen::Index df_between = 0;
  Eigen::Index df_within = 0;
};

// One-way F-test per feature. Within df = N - levels - dof_consumed_step1.
AnovaResult anova_per_feature(const FeatureMatrix& x,
                              const std::vector<std::string>& labels,
                              Eigen::Index dof_consumed_step1 = 0);

std::vector<double> adjust_bonferroni(const std::vector<double>& p);

// Benjamini-Hochberg step-up, returned in input order.
std::vector<double> adjust_bh(const std::vector<double>& p);

// FDR-adjusted p per feature from random orthonormal rotations within the
// subspace orthogonal to the non-tested design columns (pooled null across
// features, BH-style monotonization).
std::vector<double> rotation_test(const FeatureMatrix& x,
                                  const DesignMatrix& design,
                                  const std::string& term, Eigen::Index n_sim,
                                  std::uint64_t seed);

struct PvalueTable {
  std::vector<std::string> feature_ids;
  std::vector<double> p_raw;
  std::vector<double> p_bonferroni;
  std::vector<double> p_bh;
  std::vector<double> p_rotation;  // may be empty when the test was skipped
  Eigen::Index df_between = 0;
  Eigen::Index df_within = 0;
};

void write_pvalue_table(const PvalueTable& t, const std::string& path);

}  // namespace gem
