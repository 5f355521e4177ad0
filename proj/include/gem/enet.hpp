#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gem/tabular.hpp"
#include "gem/pls.hpp"

namespace gem {

// Standardized elastic-net problem. Predictor columns are scaled internally
// to mean 0 and x_j'x_j/N = 1 so the coordinate update denominator is
// exactly 1 + lambda*(1-alpha); the response dummy is centered.
struct EnetProblem {
  Eigen::MatrixXd x;        // standardized, samples x features
  Eigen::VectorXd y;        // centered
  double y_mean = 0.0;
  Eigen::RowVectorXd centers;
  Eigen::RowVectorXd scales;  // population (divisor N) standard deviations
  double alpha = 0.5;         // L1 mixing fraction, in (0, 1]
  std::vector<std::string> feature_ids;

  static EnetProblem build(const FeatureMatrix& xraw, const Eigen::VectorXd& y,
                           double alpha);
};

// lambda_max = max_j |x_j'y| / (N*alpha), log-spaced down to lambda_max*ratio.
std::vector<double> lambda_path(const EnetProblem& p, Eigen::Index n_lambda,
                                double ratio);

struct EnetFit {
  Eigen::VectorXd coefficients;  // standardized-predictor scale
  double intercept = 0.0;        // raw response scale
  int sweeps = 0;
  double objective = 0.0;
};

// Cyclic coordinate descent with soft thresholding; active-set sweeps with
// full sweeps for convergence checks. Converged when the max coefficient
// change in a full sweep is below tol; KKT residuals are verified.
EnetFit fit_enet(const EnetProblem& p, double lambda,
                 const Eigen::VectorXd* warm_start = nullptr,
                 double tol = 1e-7, int max_sweeps = 100000);

struct EnetPathPoint {
  double lambda = 0.0;
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  std::vector<Eigen::Index> support;
  double cv_accuracy = 0.0;
};

struct EnetPath {
  std::vector<EnetPathPoint> points;
  double alpha = 0.5;
  std::optional<std::size_t> chosen;  // index into points
  bool no_informative_support = false;
  double best_accuracy = 0.0;
  double chance_accuracy = 0.0;
};

// Warm-started fits along the path with out-of-fold accuracy per lambda.
EnetPath fit_enet_path(const FeatureMatrix& xraw, const ClassResponse& y,
                       double alpha, Eigen::Index n_lambda, double ratio,
                       Eigen::Index cv_segments, std::uint64_t seed);

// Chosen lambda = largest lambda whose CV accuracy is within `tolerance` of
// the best on the path; "no informative support" when the best accuracy is
// at most chance + 0.1.
void tune_min_support(EnetPath& path, double tolerance = 0.02);

}  // namespace gem
