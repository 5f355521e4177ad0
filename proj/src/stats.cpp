#include "gem/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include <boost/math/distributions/fisher_f.hpp>

#include "gem/errors.hpp"
#include "gem/rng.hpp"

namespace gem {

namespace {

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& m) {
  if (m.cols() == 0) return Eigen::MatrixXd(m.rows(), 0);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(1e-10);
  const Eigen::Index r = qr.rank();
  Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), r);
  return q;
}

// random rotation from the QR of a Gaussian matrix, sign-fixed so the
// distribution is Haar and the output deterministic for a given stream
Eigen::MatrixXd random_rotation(Eigen::Index r, Rng& rng) {
  Eigen::MatrixXd g(r, r);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < r; ++j) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd rr = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < r; ++j) {
    if (rr(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace

AnovaResult anova_per_feature(const FeatureMatrix& x,
                              const std::vector<std::string>& labels,
                              Eigen::Index dof_consumed_step1) {
  const Eigen::Index n = x.n_samples();
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw Error("label count disagrees with sample count");
  }
  std::map<std::string, std::vector<Eigen::Index>> groups;
  for (Eigen::Index i = 0; i < n; ++i) {
    groups[labels[static_cast<std::size_t>(i)]].push_back(i);
  }
  const auto k = static_cast<Eigen::Index>(groups.size());
  if (k < 2) throw Error("ANOVA needs at least two levels");
  for (const auto& [lv, idx] : groups) {
    if (idx.size() < 2) {
      throw Error("level '" + lv + "' has fewer than two samples");
    }
  }

  AnovaResult res;
  res.df_between = k - 1;
  res.df_within = n - k - dof_consumed_step1;
  if (res.df_within < 1) {
    throw Error("within-group degrees of freedom below 1 after adjustment");
  }
  boost::math::fisher_f dist(static_cast<double>(res.df_between),
                             static_cast<double>(res.df_within));

  const Eigen::Index p = x.n_features();
  res.f.resize(static_cast<std::size_t>(p));
  res.p.resize(static_cast<std::size_t>(p));
  res.constant_flag.assign(static_cast<std::size_t>(p), false);
  res.degenerate_flag.assign(static_cast<std::size_t>(p), false);

  for (Eigen::Index j = 0; j < p; ++j) {
    const auto col = x.values.col(j);
    const double grand = col.mean();
    double ss_between = 0.0;
    double ss_within = 0.0;
    for (const auto& [lv, idx] : groups) {
      double gm = 0.0;
      for (auto i : idx) gm += col(i);
      gm /= static_cast<double>(idx.size());
      ss_between += static_cast<double>(idx.size()) * (gm - grand) * (gm - grand);
      for (auto i : idx) ss_within += (col(i) - gm) * (col(i) - gm);
    }
    const double ms_between = ss_between / static_cast<double>(res.df_between);
    const double ms_within = ss_within / static_cast<double>(res.df_within);
    const auto js = static_cast<std::size_t>(j);
    if (ms_within <= 0.0) {
      if (ms_between <= 0.0) {
        res.f[js] = 0.0;
        res.p[js] = 1.0;
        res.constant_flag[js] = true;
      } else {
        res.f[js] = std::numeric_limits<double>::infinity();
        res.p[js] = std::numeric_limits<double>::min();
        res.degenerate_flag[js] = true;
      }
      continue;
    }
    res.f[js] = ms_between / ms_within;
    res.p[js] = boost::math::cdf(boost::math::complement(dist, res.f[js]));
  }
  return res;
}

std::vector<double> adjust_bonferroni(const std::vector<double>& p) {
  const double m = static_cast<double>(p.size());
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || p[i] > 1.0) throw Error("p-value outside [0, 1]");
    out[i] = std::min(1.0, p[i] * m);
  }
  return out;
}

std::vector<double> adjust_bh(const std::vector<double>& p) {
  const auto m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> out(m);
  double running = 1.0;
  for (std::size_t r = m; r-- > 0;) {
    const double pv = p[order[r]];
    if (pv < 0.0 || pv > 1.0) throw Error("p-value outside [0, 1]");
    const double q = std::min(
        1.0, pv * static_cast<double>(m) / static_cast<double>(r + 1));
    running = std::min(running, q);
    out[order[r]] = running;
  }
  return out;
}

std::vector<double> rotation_test(const FeatureMatrix& x,
                                  const DesignMatrix& design,
                                  const std::string& term, Eigen::Index n_sim,
                                  std::uint64_t seed) {
  if (n_sim < 100) throw Error("rotation test needs at least 100 simulations");
  const Eigen::Index n = x.n_samples();
  if (design.n_samples() != n) {
    throw Error("design and feature matrix sample counts disagree");
  }
  auto [tb, te] = design.span_of(term);
  if (design.term_names.front() == term) {
    throw Error("cannot rotation-test the intercept");
  }

  // protected = all design columns except the tested term's block
  Eigen::MatrixXd prot(n, design.columns.cols() - (te - tb));
  prot << design.columns.leftCols(tb),
      design.columns.rightCols(design.columns.cols() - te);
  const Eigen::MatrixXd b_prot = orthonormal_basis(prot);

  // complement of the protected space
  Eigen::MatrixXd comp_raw =
      Eigen::MatrixXd::Identity(n, n) - b_prot * b_prot.transpose();
  Eigen::MatrixXd q2 = orthonormal_basis(comp_raw);
  const Eigen::Index r = q2.cols();
  if (r < 2) throw Error("residual rotation subspace has dimension below 2");

  // tested-term directions inside the complement
  Eigen::MatrixXd term_in_comp =
      q2.transpose() * design.columns.middleCols(tb, te - tb);
  const Eigen::MatrixXd m_term = orthonormal_basis(term_in_comp);
  const Eigen::Index rank_term = m_term.cols();
  const Eigen::Index df_res = r - rank_term;
  if (rank_term < 1) throw Error("tested term is aliased with the protected terms");
  if (df_res < 1) throw Error("no residual degrees of freedom for the rotation test");

  const Eigen::MatrixXd c = q2.transpose() * x.values;  // r x p
  const Eigen::Index p = x.n_features();

  auto f_stats = [&](const Eigen::MatrixXd& coords) {
    Eigen::VectorXd f(p);
    const Eigen::MatrixXd d = m_term.transpose() * coords;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double ss_term = d.col(j).squaredNorm();
      const double ss_res = coords.col(j).squaredNorm() - ss_term;
      const double ms_t = ss_term / static_cast<double>(rank_term);
      const double ms_r = ss_res / static_cast<double>(df_res);
      f(j) = ms_r > 0.0 ? ms_t / ms_r
                        : (ms_t > 0.0 ? std::numeric_limits<double>::infinity()
                                      : 0.0);
    }
    return f;
  };

  const Eigen::VectorXd f_obs = f_stats(c);

  Rng rng(seed);
  std::vector<double> null_pool;
  null_pool.reserve(static_cast<std::size_t>(n_sim * p));
  for (Eigen::Index s = 0; s < n_sim; ++s) {
    const Eigen::MatrixXd rot = random_rotation(r, rng);
    const Eigen::VectorXd f_null = f_stats(rot * c);
    for (Eigen::Index j = 0; j < p; ++j) null_pool.push_back(f_null(j));
  }
  std::sort(null_pool.begin(), null_pool.end());

  // observed ranks (count of observed F >= F_i)
  std::vector<double> f_sorted(f_obs.data(), f_obs.data() + p);
  std::sort(f_sorted.begin(), f_sorted.end());

  std::vector<double> fdr(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    const double fj = f_obs(j);
    const auto null_ge = static_cast<double>(
        null_pool.end() -
        std::lower_bound(null_pool.begin(), null_pool.end(), fj));
    const auto rank = static_cast<double>(
        f_sorted.end() - std::lower_bound(f_sorted.begin(), f_sorted.end(), fj));
    const double expected_null = null_ge / static_cast<double>(n_sim);
    fdr[static_cast<std::size_t>(j)] =
        std::clamp(expected_null / std::max(rank, 1.0), 0.0, 1.0);
  }

  // BH-style monotonization: adjusted p non-decreasing as F decreases
  std::vector<std::size_t> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return f_obs(static_cast<Eigen::Index>(a)) > f_obs(static_cast<Eigen::Index>(b));
  });
  double running = 1.0;
  std::vector<double> out(static_cast<std::size_t>(p));
  for (std::size_t k = order.size(); k-- > 0;) {
    running = std::min(running, fdr[order[k]]);
    out[order[k]] = running;
  }
  return out;
}

void write_pvalue_table(const PvalueTable& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out << "feature,p_raw,p_bonf,p_bh,p_rot,df_between,df_within\n";
  out.precision(17);
  for (std::size_t i = 0; i < t.feature_ids.size(); ++i) {
    out << t.feature_ids[i] << ',' << t.p_raw[i] << ',' << t.p_bonferroni[i]
        << ',' << t.p_bh[i] << ',';
    if (!t.p_rotation.empty()) out << t.p_rotation[i];
    out << ',' << t.df_between << ',' << t.df_within << "\n";
  }
}

}  // namespace gem
