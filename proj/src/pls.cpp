#include "gem/pls.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "gem/errors.hpp"
#include "gem/rng.hpp"

namespace gem {

namespace {

struct Preprocessed {
  Eigen::MatrixXd x;
  Eigen::RowVectorXd centers;
  Eigen::RowVectorXd scales;
};

// Center and optionally unit-scale columns. Zero-variance columns keep
// scale 1 so the feature set is stable across cross-validation folds.
Preprocessed preprocess(const Eigen::MatrixXd& x, ScalingMode scaling) {
  Preprocessed p;
  p.centers = x.colwise().mean();
  p.scales = Eigen::RowVectorXd::Ones(x.cols());
  p.x = x.rowwise() - p.centers;
  if (scaling == ScalingMode::Autoscale && x.rows() > 1) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double sd =
          std::sqrt(p.x.col(j).squaredNorm() / static_cast<double>(x.rows() - 1));
      if (sd > 0.0) {
        p.scales(j) = sd;
        p.x.col(j) /= sd;
      }
    }
  }
  return p;
}

PlsModel fit_pls_raw(const Eigen::MatrixXd& xraw, const Eigen::VectorXd& y,
                     Eigen::Index a_max, ScalingMode scaling) {
  const Eigen::Index n = xraw.rows();
  const Eigen::Index p = xraw.cols();
  const Eigen::Index limit = std::min(n - 1, p);
  if (a_max < 1 || a_max > limit) {
    throw Error("component count " + std::to_string(a_max) + " outside [1, " +
                std::to_string(limit) + "]");
  }
  if ((y.array() == y(0)).all()) throw Error("response has zero variance");

  PlsModel m;
  m.scaling = scaling == ScalingMode::Center ? "center" : "autoscale";
  auto pre = preprocess(xraw, scaling);
  m.x_centers = pre.centers;
  m.x_scales = pre.scales;
  m.y_mean = y.mean();

  Eigen::MatrixXd xd = pre.x;
  Eigen::VectorXd yd = y.array() - m.y_mean;

  m.weights.resize(p, a_max);
  m.x_loadings.resize(p, a_max);
  m.y_loadings.resize(a_max);
  m.scores.resize(n, a_max);

  const double tol = 1e-12 * std::max(1.0, pre.x.norm());
  Eigen::Index a = 0;
  for (; a < a_max; ++a) {
    Eigen::VectorXd w = xd.transpose() * yd;
    const double wnorm = w.norm();
    if (wnorm <= tol) break;  // rank exhausted
    w /= wnorm;
    Eigen::Index imax = 0;
    w.cwiseAbs().maxCoeff(&imax);
    if (w(imax) < 0.0) w = -w;

    Eigen::VectorXd t = xd * w;
    const double tt = t.squaredNorm();
    if (tt <= tol * tol) break;
    const Eigen::VectorXd pl = xd.transpose() * t / tt;
    const double q = yd.dot(t) / tt;

    m.weights.col(a) = w;
    m.x_loadings.col(a) = pl;
    m.y_loadings(a) = q;
    m.scores.col(a) = t;

    xd.noalias() -= t * pl.transpose();
    yd.noalias() -= q * t;
  }
  if (a == 0) {
    // no covariance direction left: degrade to the mean-only model so that
    // signal-free inputs (e.g. ER values of an orthogonalized factor)
    // cross-validate at chance instead of failing
    m.truncated = true;
    m.n_components = 1;
    m.weights = Eigen::MatrixXd::Zero(p, 1);
    m.x_loadings = Eigen::MatrixXd::Zero(p, 1);
    m.y_loadings = Eigen::VectorXd::Zero(1);
    m.scores = Eigen::MatrixXd::Zero(n, 1);
    m.coef_path = Eigen::MatrixXd::Zero(p, 1);
    m.coefficients = m.coef_path.col(0);
    m.intercept = m.y_mean;
    return m;
  }
  if (a < a_max) {
    m.truncated = true;
    m.weights.conservativeResize(p, a);
    m.x_loadings.conservativeResize(p, a);
    m.y_loadings.conservativeResize(a);
    m.scores.conservativeResize(n, a);
  }
  m.n_components = a;

  // accumulated coefficients per component count
  m.coef_path.resize(p, a);
  for (Eigen::Index c = 1; c <= a; ++c) {
    const auto w = m.weights.leftCols(c);
    const auto pl = m.x_loadings.leftCols(c);
    const auto q = m.y_loadings.head(c);
    const Eigen::MatrixXd pw = pl.transpose() * w;  // c x c
    m.coef_path.col(c - 1) =
        w * pw.colPivHouseholderQr().solve(Eigen::VectorXd(q));
  }
  m.coefficients = m.coef_path.col(a - 1);
  m.intercept = m.y_mean;
  return m;
}

std::string predicted_label(double score, const std::string& l0,
                            const std::string& l1) {
  return score > 0.5 ? l1 : l0;  // ties toward class 0
}

}  // namespace

ClassResponse ClassResponse::from_labels(const std::vector<std::string>& labels) {
  std::set<std::string> distinct(labels.begin(), labels.end());
  if (distinct.size() != 2) {
    throw Error("class response needs exactly two levels, got " +
                std::to_string(distinct.size()));
  }
  ClassResponse r;
  r.level0 = *distinct.begin();
  r.level1 = *std::next(distinct.begin());
  r.dummy.resize(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    r.dummy(static_cast<Eigen::Index>(i)) = labels[i] == r.level1 ? 1.0 : 0.0;
  }
  return r;
}

PlsModel fit_pls(const FeatureMatrix& x, const ClassResponse& y,
                 Eigen::Index a_max, ScalingMode scaling) {
  if (x.n_samples() != y.dummy.size()) {
    throw Error("feature matrix and response sample counts disagree");
  }
  PlsModel m = fit_pls_raw(x.values, y.dummy, a_max, scaling);
  m.feature_ids = x.feature_ids;
  m.level0 = y.level0;
  m.level1 = y.level1;
  return m;
}

CvResult cross_validate(const FeatureMatrix& x, const ClassResponse& y,
                        SegmentScheme scheme, Eigen::Index n_segments,
                        std::uint64_t seed, Eigen::Index a_max,
                        ScalingMode scaling) {
  const Eigen::Index n = x.n_samples();
  CvResult cv;

  // class threshold at the midpoint of the dummy range: invariant to
  // positive rescaling of the response
  const double mid = 0.5 * (y.dummy.minCoeff() + y.dummy.maxCoeff());

  if (scheme == SegmentScheme::LeaveOneOut) {
    for (Eigen::Index i = 0; i < n; ++i) cv.segments.push_back({i});
  } else {
    if (n_segments < 2 || n_segments > n) {
      throw Error("segment count outside [2, n]");
    }
    // stratified: shuffle within class, deal round-robin
    Rng rng(seed);
    cv.segments.resize(static_cast<std::size_t>(n_segments));
    for (bool cls1 : {false, true}) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index i = 0; i < n; ++i) {
        if ((y.dummy(i) > mid) == cls1) idx.push_back(i);
      }
      rng.shuffle(idx);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        cv.segments[k % static_cast<std::size_t>(n_segments)].push_back(idx[k]);
      }
    }
    for (auto& seg : cv.segments) std::sort(seg.begin(), seg.end());
  }

  // each segment must leave at least two samples of each class in training
  Eigen::Index n1 = 0;
  for (Eigen::Index i = 0; i < n; ++i) n1 += y.dummy(i) > mid ? 1 : 0;
  const Eigen::Index n0 = n - n1;
  for (const auto& seg : cv.segments) {
    Eigen::Index held1 = 0;
    for (auto i : seg) held1 += y.dummy(i) > mid ? 1 : 0;
    const Eigen::Index held0 = static_cast<Eigen::Index>(seg.size()) - held1;
    if (n1 - held1 < 2 || n0 - held0 < 2) {
      throw Error("a segment leaves fewer than two samples of a class in training");
    }
  }

  const auto m_segments = static_cast<Eigen::Index>(cv.segments.size());
  cv.oof_predictions.resize(n, a_max);
  std::vector<Eigen::MatrixXd> fold_coefs;   // raw-x-scale coef paths
  fold_coefs.reserve(static_cast<std::size_t>(m_segments));

  for (const auto& seg : cv.segments) {
    std::vector<char> held(static_cast<std::size_t>(n), 0);
    for (auto i : seg) held[static_cast<std::size_t>(i)] = 1;
    const Eigen::Index ntr = n - static_cast<Eigen::Index>(seg.size());
    Eigen::MatrixXd xtr(ntr, x.n_features());
    Eigen::VectorXd ytr(ntr);
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!held[static_cast<std::size_t>(i)]) {
        xtr.row(r) = x.values.row(i);
        ytr(r) = y.dummy(i);
        ++r;
      }
    }
    const Eigen::Index fold_amax = std::min(a_max, std::min(ntr - 1, x.n_features()));
    PlsModel fold = fit_pls_raw(xtr, ytr, fold_amax, scaling);

    Eigen::MatrixXd coef_raw(x.n_features(), a_max);
    for (Eigen::Index c = 0; c < a_max; ++c) {
      const Eigen::Index use = std::min<Eigen::Index>(c, fold.n_components - 1);
      coef_raw.col(c) =
          fold.coef_path.col(use).array() / fold.x_scales.transpose().array();
    }
    fold_coefs.push_back(coef_raw);

    for (auto i : seg) {
      const Eigen::RowVectorXd dx = x.values.row(i) - fold.x_centers;
      for (Eigen::Index c = 0; c < a_max; ++c) {
        cv.oof_predictions(i, c) = fold.y_mean + dx * coef_raw.col(c);
      }
    }
  }

  cv.misclassified.assign(static_cast<std::size_t>(a_max), 0);
  for (Eigen::Index c = 0; c < a_max; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool pred1 = cv.oof_predictions(i, c) > mid;
      if (pred1 != (y.dummy(i) > mid)) {
        ++cv.misclassified[static_cast<std::size_t>(c)];
      }
    }
  }
  const int best = *std::min_element(cv.misclassified.begin(), cv.misclassified.end());
  cv.chosen_a = 1;
  for (Eigen::Index c = 0; c < a_max; ++c) {
    if (cv.misclassified[static_cast<std::size_t>(c)] <= best + 1) {
      cv.chosen_a = c + 1;
      break;
    }
  }
  cv.oof_accuracy =
      1.0 - static_cast<double>(
                cv.misclassified[static_cast<std::size_t>(cv.chosen_a - 1)]) /
                static_cast<double>(n);

  cv.segment_coefficients.resize(x.n_features(), m_segments);
  for (Eigen::Index s = 0; s < m_segments; ++s) {
    cv.segment_coefficients.col(s) =
        fold_coefs[static_cast<std::size_t>(s)].col(cv.chosen_a - 1);
  }

  PlsModel full = fit_pls_raw(x.values, y.dummy, cv.chosen_a, scaling);
  cv.full_coefficients = full.coef_path.col(full.n_components - 1).array() /
                         full.x_scales.transpose().array();
  return cv;
}

std::size_t JackknifeReport::n_selected() const {
  std::size_t n = 0;
  for (const auto& e : entries) {
    if (e.selected) ++n;
  }
  return n;
}

JackknifeReport jackknife_test(const CvResult& cv, const PlsModel& full,
                               Eigen::Index dof_consumed_step1,
                               double rejection_limit) {
  if (cv.chosen_a > full.n_components) {
    throw Error("full model has fewer components than the cross-validation choice");
  }
  const Eigen::Index p = cv.segment_coefficients.rows();
  const auto m_segments = cv.segment_coefficients.cols();
  if (m_segments < 2) throw Error("jackknife needs at least two segments");

  JackknifeReport rep;
  rep.rejection_limit = rejection_limit;
  rep.dof_consumed_step1 = dof_consumed_step1;
  Eigen::Index df = m_segments - 1 - dof_consumed_step1;
  if (df < 1) {
    df = 1;
    rep.df_floored = true;
  }
  rep.df = df;
  boost::math::students_t dist(static_cast<double>(df));

  // full-model coefficients on the raw-x scale, same scale as the folds
  const Eigen::VectorXd b = full.coef_path.col(cv.chosen_a - 1).array() /
                            full.x_scales.transpose().array();

  const double mf = static_cast<double>(m_segments);
  rep.entries.resize(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    auto& e = rep.entries[static_cast<std::size_t>(j)];
    e.feature_id = full.feature_ids.empty()
                       ? "f" + std::to_string(j)
                       : full.feature_ids[static_cast<std::size_t>(j)];
    e.coefficient = b(j);
    const double s2 =
        (cv.segment_coefficients.row(j).array() - b(j)).square().sum() *
        (mf - 1.0) / mf;
    const double s = std::sqrt(s2);
    if (s == 0.0) {
      if (b(j) == 0.0) {
        e.t = 0.0;
        e.p = 1.0;
      } else {
        e.t = std::numeric_limits<double>::infinity();
        e.p = 0.0;
        e.degenerate = true;
      }
    } else {
      e.t = b(j) / s;
      e.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(e.t)));
    }
    e.selected = e.p < rejection_limit;
  }
  return rep;
}

Prediction predict(const PlsModel& model, const FeatureMatrix& x_new) {
  if (!model.feature_ids.empty() && x_new.feature_ids != model.feature_ids) {
    throw Error("prediction features do not match training features");
  }
  if (x_new.n_features() != model.coefficients.size()) {
    throw Error("prediction feature count mismatch");
  }
  Prediction out;
  Eigen::MatrixXd xp = x_new.values.rowwise() - model.x_centers;
  xp.array().rowwise() /= model.x_scales.array();
  out.scores = (xp * model.coefficients).array() + model.y_mean;
  out.labels.reserve(static_cast<std::size_t>(out.scores.size()));
  for (Eigen::Index i = 0; i < out.scores.size(); ++i) {
    out.labels.push_back(predicted_label(out.scores(i), model.level0, model.level1));
  }
  return out;
}

}  // namespace gem
