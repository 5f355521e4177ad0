#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "gem/rng.hpp"
#include "gem/tabular.hpp"

namespace gemtest {

inline gem::FeatureMatrix make_matrix(const std::vector<std::string>& samples,
                                      const std::vector<std::string>& features,
                                      const Eigen::MatrixXd& values) {
  gem::FeatureMatrix m;
  m.sample_ids = samples;
  m.feature_ids = features;
  m.values = values;
  m.validate();
  return m;
}

inline gem::FeatureMatrix random_matrix(Eigen::Index n, Eigen::Index p,
                                        std::uint64_t seed) {
  gem::Rng rng(seed);
  Eigen::MatrixXd v(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) v(i, j) = rng.normal();
  }
  std::vector<std::string> samples, features;
  for (Eigen::Index i = 0; i < n; ++i) samples.push_back("s" + std::to_string(i + 1));
  for (Eigen::Index j = 0; j < p; ++j) features.push_back("g" + std::to_string(j + 1));
  return make_matrix(samples, features, v);
}

inline gem::DesignTable make_design(
    const std::vector<std::string>& samples,
    const std::vector<std::pair<std::string, std::vector<std::string>>>& factors) {
  gem::DesignTable d;
  d.sample_ids = samples;
  for (const auto& [name, levels] : factors) {
    d.factor_names.push_back(name);
    d.factor_levels.push_back(levels);
  }
  return d;
}

}  // namespace gemtest
