#include "gem/pca.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "gem/errors.hpp"

namespace gem {

PcaModel fit_pca(const FeatureMatrix& x, Eigen::Index k, ScalingMode scaling) {
  auto [pre, rec] = standardize(x, scaling);
  const Eigen::Index n = pre.n_samples();
  const Eigen::Index p = pre.n_features();
  const Eigen::Index max_k = std::min(n - 1, p);
  if (k < 1 || k > max_k) {
    throw Error("component count " + std::to_string(k) +
                " outside [1, " + std::to_string(max_k) + "]");
  }

  const double total = pre.values.squaredNorm();
  if (total <= 0.0) throw Error("degenerate all-zero matrix after preprocessing");

  PcaModel m;
  m.preprocessing = rec;
  m.sample_ids = pre.sample_ids;
  m.feature_ids = pre.feature_ids;

  // eigendecomposition of the smaller Gram matrix
  Eigen::MatrixXd u;            // n x k left singular vectors
  Eigen::VectorXd sigma(k);     // singular values
  if (n <= p) {
    Eigen::MatrixXd gram = pre.values * pre.values.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    u.resize(n, k);
    for (Eigen::Index c = 0; c < k; ++c) {
      const Eigen::Index src = n - 1 - c;  // eigenvalues ascend
      const double ev = std::max(eig.eigenvalues()(src), 0.0);
      sigma(c) = std::sqrt(ev);
      u.col(c) = eig.eigenvectors().col(src);
    }
    m.loadings.resize(p, k);
    for (Eigen::Index c = 0; c < k; ++c) {
      if (sigma(c) > 0.0) {
        m.loadings.col(c) = pre.values.transpose() * u.col(c) / sigma(c);
      } else {
        m.loadings.col(c).setZero();
      }
    }
  } else {
    Eigen::MatrixXd gram = pre.values.transpose() * pre.values;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    m.loadings.resize(p, k);
    for (Eigen::Index c = 0; c < k; ++c) {
      const Eigen::Index src = p - 1 - c;
      const double ev = std::max(eig.eigenvalues()(src), 0.0);
      sigma(c) = std::sqrt(ev);
      m.loadings.col(c) = eig.eigenvectors().col(src);
    }
    u.resize(n, k);
    for (Eigen::Index c = 0; c < k; ++c) {
      if (sigma(c) > 0.0) {
        u.col(c) = pre.values * m.loadings.col(c) / sigma(c);
      } else {
        u.col(c).setZero();
      }
    }
  }

  // sign convention: largest-|entry| loading element positive
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::Index imax = 0;
    m.loadings.col(c).cwiseAbs().maxCoeff(&imax);
    if (m.loadings(imax, c) < 0.0) {
      m.loadings.col(c) = -m.loadings.col(c);
      u.col(c) = -u.col(c);
    }
  }

  m.scores = u * sigma.asDiagonal();
  m.explained_variance.resize(static_cast<std::size_t>(k));
  for (Eigen::Index c = 0; c < k; ++c) {
    m.explained_variance[static_cast<std::size_t>(c)] = sigma(c) * sigma(c) / total;
  }
  return m;
}

SeparationReport grouping_separation(const PcaModel& m,
                                     const std::vector<std::string>& labels,
                                     Eigen::Index comp) {
  const Eigen::Index n = m.scores.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw Error("label count disagrees with sample count");
  }
  if (comp < 0 || comp >= m.scores.cols()) throw Error("component index out of range");

  std::map<std::string, std::vector<double>> groups;
  for (Eigen::Index i = 0; i < n; ++i) {
    groups[labels[static_cast<std::size_t>(i)]].push_back(m.scores(i, comp));
  }
  if (groups.size() < 2) throw Error("grouping needs at least two levels");

  const double grand = m.scores.col(comp).mean();
  double ss_total = (m.scores.col(comp).array() - grand).square().sum();
  double ss_between = 0.0;
  for (const auto& [lv, vals] : groups) {
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    ss_between += static_cast<double>(vals.size()) * (mean - grand) * (mean - grand);
  }

  SeparationReport r;
  r.between_total_ratio = ss_total > 0.0 ? ss_between / ss_total : 0.0;
  if (groups.size() == 2) {
    auto it = groups.begin();
    const auto& a = it->second;
    const auto& b = std::next(it)->second;
    auto stats = [](const std::vector<double>& v) {
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      return std::make_pair(mean, ss);
    };
    auto [ma, ssa] = stats(a);
    auto [mb, ssb] = stats(b);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double pooled = (ssa + ssb) / (na + nb - 2.0);
    const double se = std::sqrt(pooled * (1.0 / na + 1.0 / nb));
    r.t_statistic = se > 0.0 ? (ma - mb) / se : 0.0;
    r.has_t = true;
  }
  return r;
}

void write_score_svg(const PcaModel& m, Eigen::Index cx, Eigen::Index cy,
                     const std::vector<std::string>& labels,
                     const std::string& path) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
  std::set<std::string> level_set(labels.begin(), labels.end());
  std::vector<std::string> levels(level_set.begin(), level_set.end());

  const double w = 480, h = 480, pad = 40;
  const auto& sx = m.scores.col(cx);
  const auto& sy = m.scores.col(cy);
  const double xmin = sx.minCoeff(), xmax = sx.maxCoeff();
  const double ymin = sy.minCoeff(), ymax = sy.maxCoeff();
  const double xspan = xmax > xmin ? xmax - xmin : 1.0;
  const double yspan = ymax > ymin ? ymax - ymin : 1.0;

  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (Eigen::Index i = 0; i < m.scores.rows(); ++i) {
    const double px = pad + (sx(i) - xmin) / xspan * (w - 2 * pad);
    const double py = h - pad - (sy(i) - ymin) / yspan * (h - 2 * pad);
    const auto li = std::find(levels.begin(), levels.end(),
                              labels[static_cast<std::size_t>(i)]) - levels.begin();
    out << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"4\" fill=\""
        << palette[li % 8] << "\"/>\n";
  }
  double ly = 16;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    out << "<text x=\"8\" y=\"" << ly << "\" fill=\"" << palette[l % 8]
        << "\" font-size=\"12\">" << levels[l] << "</text>\n";
    ly += 16;
  }
  out << "</svg>\n";
}

}  // namespace gem
