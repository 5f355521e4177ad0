#include "gem/enet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gem/errors.hpp"
#include "gem/rng.hpp"

namespace gem {

namespace {

double soft_threshold(double z, double g) {
  if (z > g) return z - g;
  if (z < -g) return z + g;
  return 0.0;
}

double objective(const EnetProblem& p, const Eigen::VectorXd& b,
                 const Eigen::VectorXd& r, double lambda) {
  const double n = static_cast<double>(p.y.size());
  return r.squaredNorm() / (2.0 * n) +
         lambda * (p.alpha * b.lpNorm<1>() +
                   0.5 * (1.0 - p.alpha) * b.squaredNorm());
}

// max KKT violation across all coordinates
double kkt_violation(const EnetProblem& p, const Eigen::VectorXd& b,
                     const Eigen::VectorXd& r, double lambda) {
  const double n = static_cast<double>(p.y.size());
  double worst = 0.0;
  for (Eigen::Index j = 0; j < p.x.cols(); ++j) {
    const double g = p.x.col(j).dot(r) / n;
    if (b(j) == 0.0) {
      worst = std::max(worst, std::abs(g) - lambda * p.alpha);
    } else {
      const double resid =
          g - lambda * (1.0 - p.alpha) * b(j) -
          lambda * p.alpha * (b(j) > 0.0 ? 1.0 : -1.0);
      worst = std::max(worst, std::abs(resid));
    }
  }
  return worst;
}

}  // namespace

EnetProblem EnetProblem::build(const FeatureMatrix& xraw,
                               const Eigen::VectorXd& y, double alpha) {
  if (alpha <= 0.0 || alpha > 1.0) {
    throw Error("alpha must be in (0, 1]");
  }
  if (xraw.n_samples() != y.size()) {
    throw Error("predictor and response sample counts disagree");
  }
  EnetProblem p;
  p.alpha = alpha;
  p.feature_ids = xraw.feature_ids;
  const double n = static_cast<double>(xraw.n_samples());
  p.centers = xraw.values.colwise().mean();
  p.x = xraw.values.rowwise() - p.centers;
  p.scales = Eigen::RowVectorXd::Ones(xraw.n_features());
  for (Eigen::Index j = 0; j < p.x.cols(); ++j) {
    const double sd = std::sqrt(p.x.col(j).squaredNorm() / n);
    if (sd > 0.0) {
      p.scales(j) = sd;
      p.x.col(j) /= sd;
    }
  }
  p.y_mean = y.mean();
  p.y = y.array() - p.y_mean;
  return p;
}

std::vector<double> lambda_path(const EnetProblem& p, Eigen::Index n_lambda,
                                double ratio) {
  if (n_lambda < 1) throw Error("need at least one lambda");
  if (ratio <= 0.0 || ratio > 1.0) throw Error("lambda ratio must be in (0, 1]");
  const double n = static_cast<double>(p.y.size());
  const double lmax = (p.x.transpose() * p.y).cwiseAbs().maxCoeff() / (n * p.alpha);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_lambda));
  if (n_lambda == 1) {
    out.push_back(lmax);
    return out;
  }
  const double step = std::log(ratio) / static_cast<double>(n_lambda - 1);
  for (Eigen::Index i = 0; i < n_lambda; ++i) {
    out.push_back(lmax * std::exp(step * static_cast<double>(i)));
  }
  return out;
}

EnetFit fit_enet(const EnetProblem& p, double lambda,
                 const Eigen::VectorXd* warm_start, double tol,
                 int max_sweeps) {
  const Eigen::Index nf = p.x.cols();
  const double n = static_cast<double>(p.y.size());
  Eigen::VectorXd b =
      warm_start ? *warm_start : Eigen::VectorXd::Zero(nf);
  Eigen::VectorXd r = p.y - p.x * b;

  // column norms x_j'x_j / N; 1 for standardized columns, 0 for constants
  Eigen::VectorXd v(nf);
  for (Eigen::Index j = 0; j < nf; ++j) v(j) = p.x.col(j).squaredNorm() / n;

  auto sweep = [&](const std::vector<Eigen::Index>& coords) {
    double max_change = 0.0;
    for (Eigen::Index j : coords) {
      if (v(j) == 0.0) continue;  // constant predictor stays at zero
      const double old = b(j);
      const double z = p.x.col(j).dot(r) / n + v(j) * old;
      const double bn =
          soft_threshold(z, lambda * p.alpha) / (v(j) + lambda * (1.0 - p.alpha));
      if (bn != old) {
        r += p.x.col(j) * (old - bn);
        b(j) = bn;
        max_change = std::max(max_change, std::abs(bn - old));
      }
    }
    return max_change;
  };

  std::vector<Eigen::Index> all(static_cast<std::size_t>(nf));
  std::iota(all.begin(), all.end(), Eigen::Index{0});

  EnetFit fit;
  double prev_obj = objective(p, b, r, lambda);
  int sweeps = 0;
  constexpr double kkt_tol = 1e-6;
  while (sweeps < max_sweeps) {
    // converge on the current active set, then verify with a full sweep
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < nf; ++j) {
      if (b(j) != 0.0) active.push_back(j);
    }
    if (!active.empty()) {
      while (sweeps < max_sweeps) {
        const double change = sweep(active);
        ++sweeps;
        const double obj = objective(p, b, r, lambda);
        if (obj > prev_obj + 1e-12 * std::max(1.0, prev_obj)) {
          throw Error("elastic net objective increased during a sweep");
        }
        prev_obj = obj;
        if (change < tol) break;
      }
    }
    const double change = sweep(all);
    ++sweeps;
    const double obj = objective(p, b, r, lambda);
    if (obj > prev_obj + 1e-12 * std::max(1.0, prev_obj)) {
      throw Error("elastic net objective increased during a sweep");
    }
    prev_obj = obj;
    if (change < tol && kkt_violation(p, b, r, lambda) <= kkt_tol) {
      fit.coefficients = b;
      fit.intercept = p.y_mean;
      fit.sweeps = sweeps;
      fit.objective = obj;
      return fit;
    }
  }
  throw Error("elastic net did not converge after " + std::to_string(sweeps) +
              " sweeps (lambda=" + std::to_string(lambda) +
              ", kkt=" + std::to_string(kkt_violation(p, b, r, lambda)) + ")");
}

EnetPath fit_enet_path(const FeatureMatrix& xraw, const ClassResponse& y,
                       double alpha, Eigen::Index n_lambda, double ratio,
                       Eigen::Index cv_segments, std::uint64_t seed) {
  const Eigen::Index n = xraw.n_samples();
  EnetProblem full = EnetProblem::build(xraw, y.dummy, alpha);
  const auto lambdas = lambda_path(full, n_lambda, ratio);

  EnetPath path;
  path.alpha = alpha;

  // repeated stratified cross-validation: per-lambda accuracy is averaged
  // over several fold assignments, which keeps a noise-only path from
  // clearing the informative-support margin by a lucky single split
  constexpr int kRepeats = 10;
  Rng rng(seed);
  std::vector<double> correct(lambdas.size(), 0.0);
  for (int rep = 0; rep < kRepeats; ++rep) {
    std::vector<std::vector<Eigen::Index>> segments(
        static_cast<std::size_t>(cv_segments));
    for (double cls : {0.0, 1.0}) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (y.dummy(i) == cls) idx.push_back(i);
      }
      rng.shuffle(idx);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        segments[k % static_cast<std::size_t>(cv_segments)].push_back(idx[k]);
      }
    }

    Eigen::MatrixXd oof(n, static_cast<Eigen::Index>(lambdas.size()));
    for (const auto& seg : segments) {
      if (seg.empty()) continue;
      std::vector<char> held(static_cast<std::size_t>(n), 0);
      for (auto i : seg) held[static_cast<std::size_t>(i)] = 1;
      const Eigen::Index ntr = n - static_cast<Eigen::Index>(seg.size());
      FeatureMatrix xtr;
      xtr.feature_ids = xraw.feature_ids;
      xtr.values.resize(ntr, xraw.n_features());
      Eigen::VectorXd ytr(ntr);
      Eigen::Index r = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!held[static_cast<std::size_t>(i)]) {
          xtr.values.row(r) = xraw.values.row(i);
          ytr(r) = y.dummy(i);
          xtr.sample_ids.push_back("s" + std::to_string(i));
          ++r;
        }
      }
      EnetProblem ptr = EnetProblem::build(xtr, ytr, alpha);
      Eigen::VectorXd warm = Eigen::VectorXd::Zero(xraw.n_features());
      for (std::size_t li = 0; li < lambdas.size(); ++li) {
        EnetFit fit = fit_enet(ptr, lambdas[li], &warm);
        warm = fit.coefficients;
        for (auto i : seg) {
          const Eigen::RowVectorXd dx =
              (xraw.values.row(i) - ptr.centers).array() / ptr.scales.array();
          oof(i, static_cast<Eigen::Index>(li)) =
              fit.intercept + dx * fit.coefficients;
        }
      }
    }
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const bool pred1 = oof(i, static_cast<Eigen::Index>(li)) > 0.5;
        if (pred1 == (y.dummy(i) > 0.5)) correct[li] += 1.0;
      }
    }
  }

  // full-data warm-started path
  Eigen::VectorXd warm = Eigen::VectorXd::Zero(xraw.n_features());
  for (std::size_t li = 0; li < lambdas.size(); ++li) {
    EnetFit fit = fit_enet(full, lambdas[li], &warm);
    warm = fit.coefficients;
    EnetPathPoint pt;
    pt.lambda = lambdas[li];
    pt.coefficients = fit.coefficients;
    pt.intercept = fit.intercept;
    for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j) {
      if (fit.coefficients(j) != 0.0) pt.support.push_back(j);
    }
    pt.cv_accuracy = correct[li] / (static_cast<double>(n) * kRepeats);
    path.points.push_back(std::move(pt));
  }

  const double n1 = y.dummy.sum();
  path.chance_accuracy =
      std::max(n1, static_cast<double>(n) - n1) / static_cast<double>(n);
  return path;
}

void tune_min_support(EnetPath& path, double tolerance) {
  if (path.points.empty()) throw Error("empty path");
  path.best_accuracy = 0.0;
  for (const auto& pt : path.points) {
    path.best_accuracy = std::max(path.best_accuracy, pt.cv_accuracy);
  }
  path.chosen.reset();
  path.no_informative_support = false;
  if (path.best_accuracy <= path.chance_accuracy + 0.1) {
    path.no_informative_support = true;
    return;
  }
  // lambdas decrease along the path: the first qualifying point is the
  // largest lambda, i.e. the smallest support
  for (std::size_t i = 0; i < path.points.size(); ++i) {
    if (path.points[i].support.empty()) continue;
    if (path.points[i].cv_accuracy >= path.best_accuracy - tolerance) {
      path.chosen = i;
      return;
    }
  }
  path.no_informative_support = true;
}

}  // namespace gem
