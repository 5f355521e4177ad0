#include "gem/design.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gem/errors.hpp"

namespace gem {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

Eigen::Index matrix_rank(const Eigen::MatrixXd& m) {
  if (m.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double tol = 1e-10 * sv(0);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) ++r;
  }
  return r;
}

std::string sanitize_term(const std::string& term) {
  std::string out = term;
  std::replace(out.begin(), out.end(), ':', 'x');
  return out;
}

void write_matrix_csv(const Eigen::MatrixXd& m,
                      const std::vector<std::string>& row_ids,
                      const std::vector<std::string>& col_ids,
                      const std::string& path) {
  FeatureMatrix fm;
  fm.sample_ids = row_ids;
  fm.feature_ids = col_ids;
  fm.values = m;
  write_feature_matrix(fm, path);
}

}  // namespace

ModelFormula ModelFormula::parse(const std::string& text) {
  ModelFormula f;
  std::stringstream ss(text);
  std::string token;
  auto add_main = [&](const std::string& name) {
    if (name.empty()) throw Error("empty term in formula '" + text + "'");
    if (std::find(f.main_factors.begin(), f.main_factors.end(), name) ==
        f.main_factors.end()) {
      f.main_factors.push_back(name);
    }
  };
  auto add_interaction = [&](const std::string& a, const std::string& b) {
    auto pair = std::make_pair(a, b);
    if (std::find(f.interactions.begin(), f.interactions.end(), pair) !=
        f.interactions.end()) {
      throw Error("duplicate interaction '" + a + ":" + b + "'");
    }
    f.interactions.push_back(pair);
  };
  while (std::getline(ss, token, '+')) {
    token = trim(token);
    if (token.empty()) throw Error("empty term in formula '" + text + "'");
    if (auto star = token.find('*'); star != std::string::npos) {
      const std::string a = trim(token.substr(0, star));
      const std::string b = trim(token.substr(star + 1));
      add_main(a);
      add_main(b);
      add_interaction(a, b);
    } else if (auto colon = token.find(':'); colon != std::string::npos) {
      add_interaction(trim(token.substr(0, colon)), trim(token.substr(colon + 1)));
    } else {
      add_main(token);
    }
  }
  if (f.main_factors.empty()) throw Error("formula has no terms: '" + text + "'");
  for (const auto& [a, b] : f.interactions) {
    for (const auto& name : {a, b}) {
      if (std::find(f.main_factors.begin(), f.main_factors.end(), name) ==
          f.main_factors.end()) {
        throw Error("interaction references undeclared factor '" + name + "'");
      }
    }
  }
  return f;
}

std::string ModelFormula::to_string() const {
  std::string out;
  for (const auto& m : main_factors) {
    if (!out.empty()) out += " + ";
    out += m;
  }
  for (const auto& [a, b] : interactions) {
    out += " + " + a + ":" + b;
  }
  return out;
}

std::vector<std::string> ModelFormula::term_names() const {
  std::vector<std::string> out{"intercept"};
  out.insert(out.end(), main_factors.begin(), main_factors.end());
  for (const auto& [a, b] : interactions) out.push_back(a + ":" + b);
  return out;
}

std::pair<Eigen::Index, Eigen::Index> DesignMatrix::span_of(
    const std::string& term) const {
  for (std::size_t t = 0; t < term_names.size(); ++t) {
    if (term_names[t] == term) return term_spans[t];
  }
  throw Error("unknown term '" + term + "'");
}

Eigen::MatrixXd DesignMatrix::term_block(const std::string& term) const {
  auto [b, e] = span_of(term);
  return columns.middleCols(b, e - b);
}

Eigen::Index DofLedger::consumed_by(const std::string& term) const {
  for (const auto& [name, r] : consumed) {
    if (name == term) return r;
  }
  throw Error("unknown term '" + term + "' in ledger");
}

Eigen::Index DofLedger::consumed_total() const {
  Eigen::Index total = 0;
  for (const auto& [name, r] : consumed) total += r;
  return total;
}

DesignMatrix encode_design(const DesignTable& d, const ModelFormula& f) {
  const Eigen::Index n = d.n_samples();
  DesignMatrix dm;
  dm.term_names.push_back("intercept");
  dm.term_spans.emplace_back(0, 1);
  dm.column_names.push_back("intercept");

  std::map<std::string, Eigen::MatrixXd> factor_cols;
  Eigen::Index total_cols = 1;
  for (const auto& factor : f.main_factors) {
    if (!d.has_factor(factor)) {
      throw Error("formula factor '" + factor + "' not in design table");
    }
    const auto levels = d.distinct_levels(factor);
    if (levels.size() < 2) {
      throw Error("factor '" + factor + "' has a single observed level");
    }
    const auto& col = d.levels_of(factor);
    const auto k = static_cast<Eigen::Index>(levels.size());
    Eigen::MatrixXd enc = Eigen::MatrixXd::Zero(n, k - 1);
    for (Eigen::Index s = 0; s < n; ++s) {
      const auto& lv = col[static_cast<std::size_t>(s)];
      if (lv == levels.back()) {
        enc.row(s).setConstant(-1.0);
      } else {
        auto it = std::find(levels.begin(), levels.end(), lv);
        enc(s, static_cast<Eigen::Index>(it - levels.begin())) = 1.0;
      }
    }
    factor_cols[factor] = enc;
    dm.term_names.push_back(factor);
    dm.term_spans.emplace_back(total_cols, total_cols + k - 1);
    for (Eigen::Index j = 0; j + 1 < k; ++j) {
      dm.column_names.push_back(factor + "." + levels[static_cast<std::size_t>(j)]);
    }
    total_cols += k - 1;
  }

  struct InterBlock {
    std::string name;
    Eigen::MatrixXd cols;
    std::vector<std::string> names;
  };
  std::vector<InterBlock> inters;
  for (const auto& [a, b] : f.interactions) {
    const auto& ca = factor_cols.at(a);
    const auto& cb = factor_cols.at(b);
    InterBlock blk;
    blk.name = a + ":" + b;
    blk.cols.resize(n, ca.cols() * cb.cols());
    Eigen::Index j = 0;
    for (Eigen::Index ja = 0; ja < ca.cols(); ++ja) {
      for (Eigen::Index jb = 0; jb < cb.cols(); ++jb, ++j) {
        blk.cols.col(j) = ca.col(ja).cwiseProduct(cb.col(jb));
        blk.names.push_back(blk.name + "." + std::to_string(j));
      }
    }
    dm.term_names.push_back(blk.name);
    dm.term_spans.emplace_back(total_cols, total_cols + blk.cols.cols());
    total_cols += blk.cols.cols();
    inters.push_back(std::move(blk));
  }

  dm.columns.resize(n, total_cols);
  dm.columns.col(0).setOnes();
  for (const auto& factor : f.main_factors) {
    auto [b, e] = dm.span_of(factor);
    dm.columns.middleCols(b, e - b) = factor_cols.at(factor);
  }
  for (const auto& blk : inters) {
    auto [b, e] = dm.span_of(blk.name);
    dm.columns.middleCols(b, e - b) = blk.cols;
    dm.column_names.insert(dm.column_names.end(), blk.names.begin(),
                           blk.names.end());
  }
  return dm;
}

GemDecomposition fit_glm(const FeatureMatrix& x, const DesignMatrix& dm) {
  const Eigen::Index n = x.n_samples();
  if (n != dm.n_samples()) {
    throw Error("feature matrix and design matrix row counts disagree");
  }
  if (dm.columns.cols() > n) {
    throw Error("more design columns (" + std::to_string(dm.columns.cols()) +
                ") than samples (" + std::to_string(n) + ")");
  }

  const Eigen::Index full_rank = matrix_rank(dm.columns);
  if (full_rank < dm.columns.cols()) {
    // name the aliased terms: a term whose removal does not reduce rank
    std::string aliased;
    for (std::size_t t = 1; t < dm.term_names.size(); ++t) {
      auto [b, e] = dm.term_spans[t];
      Eigen::MatrixXd without(n, dm.columns.cols() - (e - b));
      without << dm.columns.leftCols(b),
          dm.columns.rightCols(dm.columns.cols() - e);
      if (matrix_rank(without) == full_rank) {
        if (!aliased.empty()) aliased += ", ";
        aliased += dm.term_names[t];
      }
    }
    throw Error("rank-deficient design; aliased terms: " +
                (aliased.empty() ? std::string("(undetermined)") : aliased));
  }

  GemDecomposition g;
  g.sample_ids = x.sample_ids;
  g.feature_ids = x.feature_ids;
  g.column_means = x.values.colwise().mean();
  Eigen::MatrixXd xc = x.values.rowwise() - g.column_means;

  // center the non-intercept design columns; the joint solve on centered
  // data then decomposes exactly into term effects plus residuals
  const Eigen::Index q = dm.columns.cols() - 1;
  Eigen::MatrixXd dc = dm.columns.rightCols(q);
  const Eigen::RowVectorXd dmeans = dc.colwise().mean();
  dc.rowwise() -= dmeans;

  Eigen::MatrixXd beta;
  if (q > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dc);
    qr.setThreshold(1e-10);
    beta = qr.solve(xc);
  } else {
    beta.resize(0, xc.cols());
  }
  g.residuals = xc - dc * beta;

  for (std::size_t t = 1; t < dm.term_names.size(); ++t) {
    const auto& name = dm.term_names[t];
    auto [b, e] = dm.term_spans[t];
    g.terms.push_back(name);
    g.coefficients[name] = beta.middleRows(b - 1, e - b);
    g.effects[name] = dc.middleCols(b - 1, e - b) * g.coefficients[name];
  }

  // per-term rank consumption, sequential in term order
  g.dof.n_samples = n;
  Eigen::Index upto_rank = 0;
  for (std::size_t t = 0; t < dm.term_names.size(); ++t) {
    auto [b, e] = dm.term_spans[t];
    const Eigen::Index r = matrix_rank(dm.columns.leftCols(e));
    g.dof.consumed.emplace_back(dm.term_names[t], r - upto_rank);
    upto_rank = r;
  }
  // residual_df may be 0 for a saturated design; downstream tests enforce
  // their own df requirements
  g.dof.residual_df = n - full_rank;
  return g;
}

FeatureMatrix GemDecomposition::er_values(const std::string& term) const {
  if (term == "intercept") throw Error("ER values are not defined for the intercept");
  auto it = effects.find(term);
  if (it == effects.end()) throw Error("unknown term '" + term + "'");
  FeatureMatrix fm;
  fm.sample_ids = sample_ids;
  fm.feature_ids = feature_ids;
  fm.values = it->second + residuals;
  return fm;
}

Eigen::MatrixXd GemDecomposition::centered() const {
  Eigen::MatrixXd out = residuals;
  for (const auto& [name, eff] : effects) out += eff;
  return out;
}

void write_decomposition(const GemDecomposition& g, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  std::vector<std::string> coef_rows;
  for (const auto& term : g.terms) {
    const auto& coef = g.coefficients.at(term);
    coef_rows.clear();
    for (Eigen::Index i = 0; i < coef.rows(); ++i) {
      coef_rows.push_back(term + "." + std::to_string(i));
    }
    const std::string tag = sanitize_term(term);
    write_matrix_csv(coef, coef_rows, g.feature_ids,
                     (fs::path(dir) / ("coefficients_" + tag + ".csv")).string());
    write_feature_matrix(g.er_values(term),
                         (fs::path(dir) / ("er_" + tag + ".csv")).string());
  }
  write_matrix_csv(g.residuals, g.sample_ids, g.feature_ids,
                   (fs::path(dir) / "residuals.csv").string());

  nlohmann::json ledger;
  ledger["n_samples"] = g.dof.n_samples;
  ledger["residual_df"] = g.dof.residual_df;
  nlohmann::json consumed = nlohmann::json::array();
  for (const auto& [name, r] : g.dof.consumed) {
    consumed.push_back({{"term", name}, {"rank", r}});
  }
  ledger["consumed"] = consumed;
  ledger["terms"] = g.terms;
  ledger["coding"] = "effect (sum-to-zero)";
  ledger["note"] =
      "joint least squares on centered data and centered design columns; "
      "term effects are orthogonal only under balanced designs";
  std::ofstream out(fs::path(dir) / "ledger.json");
  if (!out) throw Error("cannot write ledger in " + dir);
  out << ledger.dump(2) << "\n";
}

}  // namespace gem
