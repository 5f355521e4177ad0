#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "gem/tabular.hpp"

namespace gem {

// Model terms, e.g. "cohort + disease + cohort:disease". "a * b" expands to
// a + b + a:b.
struct ModelFormula {
  std::vector<std::string> main_factors;
  std::vector<std::pair<std::string, std::string>> interactions;

  static ModelFormula parse(const std::string& text);
  std::string to_string() const;
  // intercept first, then main factors, then interactions
  std::vector<std::string> term_names() const;
};

// Effect-coded (sum-to-zero) design matrix. A k-level factor spans k-1
// columns; interaction columns are elementwise products of parent columns.
struct DesignMatrix {
  Eigen::MatrixXd columns;  // rows = samples, includes the intercept
  std::vector<std::string> term_names;          // intercept first
  std::vector<std::pair<Eigen::Index, Eigen::Index>> term_spans;  // [begin, end)
  std::vector<std::string> column_names;

  Eigen::Index n_samples() const { return columns.rows(); }
  std::pair<Eigen::Index, Eigen::Index> span_of(const std::string& term) const;
  Eigen::MatrixXd term_block(const std::string& term) const;
};

struct DofLedger {
  Eigen::Index n_samples = 0;
  std::vector<std::pair<std::string, Eigen::Index>> consumed;  // term -> rank
  Eigen::Index residual_df = 0;

  Eigen::Index consumed_by(const std::string& term) const;
  Eigen::Index consumed_total() const;  // including intercept
};

// Output of the GLM step: per-term coefficients, residuals, and one
// effect-plus-residual matrix per non-intercept term.
struct GemDecomposition {
  std::vector<std::string> sample_ids;
  std::vector<std::string> feature_ids;
  Eigen::RowVectorXd column_means;  // centering applied to the data
  std::vector<std::string> terms;   // non-intercept terms, formula order
  std::map<std::string, Eigen::MatrixXd> coefficients;  // term cols x features
  std::map<std::string, Eigen::MatrixXd> effects;       // samples x features
  Eigen::MatrixXd residuals;                            // samples x features
  DofLedger dof;

  // effects[term] + residuals, wrapped with the original ids
  FeatureMatrix er_values(const std::string& term) const;
  Eigen::MatrixXd centered() const;  // sum of effects + residuals
};

DesignMatrix encode_design(const DesignTable& d, const ModelFormula& f);

// Joint least squares over all features with one rank-revealing
// decomposition of the design. Data and non-intercept design columns are
// centered internally, so the term effects plus residuals reconstruct the
// centered data exactly even for unbalanced designs.
GemDecomposition fit_glm(const FeatureMatrix& x, const DesignMatrix& dm);

// One CSV per ER matrix and per-term coefficients, residuals CSV,
// ledger + metadata JSON.
void write_decomposition(const GemDecomposition& g, const std::string& dir);

}  // namespace gem
