// GEM pipeline CLI: GLM effect decomposition of multi-factor feature
// matrices followed by PCA, PLS-DA with jackknife selection, elastic net
// and per-feature ANOVA. Subcommands mirror the two standard workflows:
// batch removal within one cohort and cross-cohort fusion.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gem/design.hpp"
#include "gem/enet.hpp"
#include "gem/errors.hpp"
#include "gem/pca.hpp"
#include "gem/pls.hpp"
#include "gem/stats.hpp"
#include "gem/synth.hpp"
#include "gem/tabular.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
  std::string data_path;
  std::string design_path;
  std::string out_dir = ".";
  std::string delimiter;  // empty = auto-detect
  std::uint64_t seed = 1;
};

std::optional<char> delim_of(const CommonArgs& c) {
  if (c.delimiter.empty()) return std::nullopt;
  return c.delimiter == "tab" ? '\t' : c.delimiter[0];
}

gem::FeatureMatrix load_data(const CommonArgs& c, bool features_as_rows) {
  return gem::load_feature_matrix(c.data_path,
                                  features_as_rows
                                      ? gem::Orientation::FeaturesAsRows
                                      : gem::Orientation::SamplesAsRows,
                                  delim_of(c));
}

void check_alignment(const gem::FeatureMatrix& fm, const gem::DesignTable& dt) {
  if (fm.sample_ids != dt.sample_ids) {
    throw gem::Error("feature matrix and design table sample ids disagree");
  }
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw gem::Error("cannot write file: " + path.string());
  out << j.dump(2) << "\n";
}

void write_matrix(const Eigen::MatrixXd& m,
                  const std::vector<std::string>& rows,
                  const std::vector<std::string>& cols, const fs::path& path) {
  gem::FeatureMatrix fm;
  fm.sample_ids = rows;
  fm.feature_ids = cols;
  fm.values = m;
  gem::write_feature_matrix(fm, path.string());
}

std::vector<std::string> numbered(const std::string& prefix, Eigen::Index n) {
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i + 1));
  return out;
}

int cmd_synth(const CommonArgs& common, const gem::SynthSpec& spec) {
  fs::create_directories(common.out_dir);
  auto data = gem::generate(spec);
  gem::write_feature_matrix(data.features,
                            (fs::path(common.out_dir) / "features.csv").string());
  gem::write_design_table(data.design,
                          (fs::path(common.out_dir) / "design.csv").string());
  gem::write_ground_truth(data.truth,
                          (fs::path(common.out_dir) / "truth.json").string());
  std::cout << "wrote " << data.features.n_samples() << " samples x "
            << data.features.n_features() << " features to " << common.out_dir
            << "\n";
  return 0;
}

int cmd_explore(const CommonArgs& common, Eigen::Index k, bool center_only,
                bool features_as_rows) {
  auto fm = load_data(common, features_as_rows);
  auto dt = gem::load_design_table(common.design_path, delim_of(common));
  check_alignment(fm, dt);
  fs::create_directories(common.out_dir);

  const Eigen::Index kmax = std::min(fm.n_samples() - 1, fm.n_features());
  auto pca = gem::fit_pca(fm, std::min(k, kmax),
                          center_only ? gem::ScalingMode::Center
                                      : gem::ScalingMode::Autoscale);

  const auto comp_ids = numbered("PC", pca.scores.cols());
  write_matrix(pca.scores, pca.sample_ids, comp_ids,
               fs::path(common.out_dir) / "scores.csv");
  write_matrix(pca.loadings, pca.feature_ids, comp_ids,
               fs::path(common.out_dir) / "loadings.csv");

  std::cout << "component,explained_variance\n";
  json ev = json::array();
  for (std::size_t c = 0; c < pca.explained_variance.size(); ++c) {
    std::cout << "PC" << c + 1 << "," << pca.explained_variance[c] << "\n";
    ev.push_back(pca.explained_variance[c]);
  }

  // separation of every factor on PC1
  json separations = json::object();
  std::string dominant;
  double best = -1.0;
  for (const auto& f : dt.factor_names) {
    if (dt.distinct_levels(f).size() < 2) continue;
    auto rep = gem::grouping_separation(pca, dt.levels_of(f), 0);
    separations[f] = rep.between_total_ratio;
    std::cout << "PC1 separation " << f << ": " << rep.between_total_ratio << "\n";
    if (rep.between_total_ratio > best) {
      best = rep.between_total_ratio;
      dominant = f;
    }
    gem::write_score_svg(pca, 0, std::min<Eigen::Index>(1, pca.scores.cols() - 1),
                         dt.levels_of(f),
                         (fs::path(common.out_dir) / ("scores_" + f + ".svg")).string());
  }
  json summary;
  summary["explained_variance"] = ev;
  summary["pc1_separation"] = separations;
  if (best > 0.3) {
    summary["dominant_factor"] = dominant;
    std::cout << "dominant PC1 grouping: " << dominant << " (ratio " << best
              << ")\n";
  } else {
    summary["dominant_factor"] = nullptr;
    std::cout << "no grouping above ratio 0.3 on PC1\n";
  }
  write_json(summary, fs::path(common.out_dir) / "explore_summary.json");
  return 0;
}

int cmd_gem(const CommonArgs& common, const std::string& formula_text,
            const std::string& er_term, bool verify, bool features_as_rows) {
  auto fm = load_data(common, features_as_rows);
  auto dt = gem::load_design_table(common.design_path, delim_of(common));
  check_alignment(fm, dt);
  const auto formula = gem::ModelFormula::parse(formula_text);
  const auto dm = gem::encode_design(dt, formula);
  const auto g = gem::fit_glm(fm, dm);

  fs::create_directories(common.out_dir);
  gem::write_decomposition(g, common.out_dir);
  if (!er_term.empty()) {
    gem::write_feature_matrix(g.er_values(er_term),
                              (fs::path(common.out_dir) / "er_values.csv").string());
  }
  std::cout << "residual_df " << g.dof.residual_df << "\n";
  for (const auto& [term, rank] : g.dof.consumed) {
    std::cout << "consumed " << term << " " << rank << "\n";
  }

  if (verify) {
    const Eigen::MatrixXd centered = fm.values.rowwise() - g.column_means;
    const double rel =
        (g.centered() - centered).norm() / std::max(centered.norm(), 1e-300);
    double ortho = 0.0;
    for (Eigen::Index c = 0; c < dm.columns.cols(); ++c) {
      ortho = std::max(
          ortho, (dm.columns.col(c).transpose() * g.residuals).cwiseAbs().maxCoeff() /
                     std::max(1.0, dm.columns.col(c).norm()));
    }
    std::cout << "reconstruction_rel_error " << rel << "\n";
    std::cout << "residual_orthogonality " << ortho << "\n";
    if (rel > 1e-8 || ortho > 1e-8) {
      std::cerr << "verification failed\n";
      return 1;
    }
    std::cout << "verification passed\n";
  }
  return 0;
}

gem::ClassResponse target_response(const gem::DesignTable& dt,
                                   const std::string& target) {
  return gem::ClassResponse::from_labels(dt.levels_of(target));
}

int cmd_pls(const CommonArgs& common, const std::string& target,
            Eigen::Index a_max, Eigen::Index segments,
            Eigen::Index dof_consumed, bool features_as_rows) {
  auto fm = load_data(common, features_as_rows);
  auto dt = gem::load_design_table(common.design_path, delim_of(common));
  check_alignment(fm, dt);
  auto y = target_response(dt, target);

  const auto scheme = segments <= 0 ? gem::SegmentScheme::LeaveOneOut
                                    : gem::SegmentScheme::RandomBalanced;
  auto cv = gem::cross_validate(fm, y, scheme, segments, common.seed, a_max);
  auto full = gem::fit_pls(fm, y, cv.chosen_a);
  auto report = gem::jackknife_test(cv, full, dof_consumed);

  fs::create_directories(common.out_dir);
  write_matrix(full.scores, fm.sample_ids, numbered("comp", full.n_components),
               fs::path(common.out_dir) / "scores.csv");

  // loadings restricted to jackknife-selected features
  std::vector<std::string> selected_ids;
  std::vector<Eigen::Index> selected_idx;
  for (Eigen::Index j = 0; j < fm.n_features(); ++j) {
    if (report.entries[static_cast<std::size_t>(j)].selected) {
      selected_ids.push_back(fm.feature_ids[static_cast<std::size_t>(j)]);
      selected_idx.push_back(j);
    }
  }
  Eigen::MatrixXd sel_load(static_cast<Eigen::Index>(selected_idx.size()),
                           full.n_components);
  for (std::size_t r = 0; r < selected_idx.size(); ++r) {
    sel_load.row(static_cast<Eigen::Index>(r)) = full.x_loadings.row(selected_idx[r]);
  }
  write_matrix(sel_load, selected_ids, numbered("comp", full.n_components),
               fs::path(common.out_dir) / "loadings_selected.csv");

  {
    std::ofstream out(fs::path(common.out_dir) / "jackknife.csv");
    out << "feature,coefficient,t,p,selected,degenerate\n";
    out.precision(17);
    for (const auto& e : report.entries) {
      out << e.feature_id << ',' << e.coefficient << ',' << e.t << ',' << e.p
          << ',' << (e.selected ? 1 : 0) << ',' << (e.degenerate ? 1 : 0) << "\n";
    }
  }

  json summary;
  summary["chosen_components"] = cv.chosen_a;
  summary["oof_accuracy"] = cv.oof_accuracy;
  summary["misclassified_per_a"] = cv.misclassified;
  summary["n_selected"] = report.n_selected();
  summary["jackknife_df"] = report.df;
  summary["df_floored"] = report.df_floored;
  summary["dof_consumed_step1"] = dof_consumed;
  summary["rejection_limit"] = report.rejection_limit;
  summary["segments"] = cv.segments.size();
  summary["class0"] = y.level0;
  summary["class1"] = y.level1;
  write_json(summary, fs::path(common.out_dir) / "pls_summary.json");
  std::cout << "chosen A " << cv.chosen_a << ", accuracy " << cv.oof_accuracy
            << ", selected " << report.n_selected() << "\n";
  return 0;
}

int cmd_enet(const CommonArgs& common, const std::string& target, double alpha,
             Eigen::Index n_lambda, double ratio, Eigen::Index cv_segments,
             double tolerance, bool features_as_rows) {
  auto fm = load_data(common, features_as_rows);
  auto dt = gem::load_design_table(common.design_path, delim_of(common));
  check_alignment(fm, dt);
  auto y = target_response(dt, target);

  auto path = gem::fit_enet_path(fm, y, alpha, n_lambda, ratio, cv_segments,
                                 common.seed);
  gem::tune_min_support(path, tolerance);

  fs::create_directories(common.out_dir);
  {
    std::ofstream out(fs::path(common.out_dir) / "enet_path.csv");
    out << "lambda,support_size,cv_accuracy,chosen\n";
    out.precision(17);
    for (std::size_t i = 0; i < path.points.size(); ++i) {
      const auto& pt = path.points[i];
      out << pt.lambda << ',' << pt.support.size() << ',' << pt.cv_accuracy
          << ',' << (path.chosen && *path.chosen == i ? 1 : 0) << "\n";
    }
  }

  json summary;
  summary["alpha"] = alpha;
  summary["best_accuracy"] = path.best_accuracy;
  summary["chance_accuracy"] = path.chance_accuracy;
  summary["no_informative_support"] = path.no_informative_support;

  std::ofstream sel(fs::path(common.out_dir) / "enet_selected.csv");
  sel << "feature,coefficient\n";
  sel.precision(17);
  if (path.chosen) {
    const auto& pt = path.points[*path.chosen];
    for (auto j : pt.support) {
      sel << fm.feature_ids[static_cast<std::size_t>(j)] << ','
          << pt.coefficients(j) << "\n";
    }
    summary["chosen_lambda"] = pt.lambda;
    summary["support_size"] = pt.support.size();
    summary["cv_accuracy"] = pt.cv_accuracy;
    std::cout << "chosen lambda " << pt.lambda << ", support "
              << pt.support.size() << ", accuracy " << pt.cv_accuracy << "\n";
  } else {
    std::cout << "no informative support\n";
  }
  write_json(summary, fs::path(common.out_dir) / "enet_summary.json");
  return path.no_informative_support ? 1 : 0;
}

int cmd_anova(const CommonArgs& common, const std::string& target,
              Eigen::Index n_sim, Eigen::Index dof_consumed,
              bool features_as_rows) {
  auto fm = load_data(common, features_as_rows);
  auto dt = gem::load_design_table(common.design_path, delim_of(common));
  check_alignment(fm, dt);

  auto res = gem::anova_per_feature(fm, dt.levels_of(target), dof_consumed);
  gem::PvalueTable table;
  table.feature_ids = fm.feature_ids;
  table.p_raw = res.p;
  table.p_bonferroni = gem::adjust_bonferroni(res.p);
  table.p_bh = gem::adjust_bh(res.p);
  table.df_between = res.df_between;
  table.df_within = res.df_within;

  if (n_sim > 0) {
    gem::ModelFormula formula;
    formula.main_factors.push_back(target);
    const auto dm = gem::encode_design(dt, formula);
    table.p_rotation = gem::rotation_test(fm, dm, target, n_sim, common.seed);
  }

  fs::create_directories(common.out_dir);
  gem::write_pvalue_table(table, (fs::path(common.out_dir) / "pvalues.csv").string());

  // p-value histogram bins for external plotting
  auto histogram = [](const std::vector<double>& p) {
    std::vector<int> bins(20, 0);
    for (double v : p) {
      auto b = std::min<std::size_t>(static_cast<std::size_t>(v * 20.0), 19);
      ++bins[b];
    }
    return bins;
  };
  json hist;
  hist["bin_width"] = 0.05;
  hist["p_raw"] = histogram(table.p_raw);
  hist["p_bonf"] = histogram(table.p_bonferroni);
  hist["p_bh"] = histogram(table.p_bh);
  if (!table.p_rotation.empty()) hist["p_rot"] = histogram(table.p_rotation);
  write_json(hist, fs::path(common.out_dir) / "pvalue_histogram.json");

  auto count_below = [](const std::vector<double>& p, double limit) {
    return std::count_if(p.begin(), p.end(), [&](double v) { return v < limit; });
  };
  json summary;
  summary["df_between"] = res.df_between;
  summary["df_within"] = res.df_within;
  summary["n_raw_below_0.05"] = count_below(table.p_raw, 0.05);
  summary["n_bonf_below_0.05"] = count_below(table.p_bonferroni, 0.05);
  summary["n_bh_below_0.05"] = count_below(table.p_bh, 0.05);
  if (!table.p_rotation.empty()) {
    summary["n_rot_below_0.05"] = count_below(table.p_rotation, 0.05);
  }
  write_json(summary, fs::path(common.out_dir) / "anova_summary.json");
  std::cout << "raw<0.05: " << count_below(table.p_raw, 0.05)
            << ", bh<0.05: " << count_below(table.p_bh, 0.05) << "\n";
  return 0;
}

json five_number(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  auto quantile = [&](double q) {
    // type-7 linear interpolation
    const double h = q * (static_cast<double>(v.size()) - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - std::floor(h)) * (v[hi] - v[lo]);
  };
  const double q1 = quantile(0.25), med = quantile(0.5), q3 = quantile(0.75);
  const double iqr = q3 - q1;
  double lo_whisker = v.front(), hi_whisker = v.back();
  json outliers = json::array();
  for (double x : v) {
    if (x < q1 - 1.5 * iqr || x > q3 + 1.5 * iqr) outliers.push_back(x);
  }
  for (double x : v) {
    if (x >= q1 - 1.5 * iqr) {
      lo_whisker = x;
      break;
    }
  }
  for (auto it = v.rbegin(); it != v.rend(); ++it) {
    if (*it <= q3 + 1.5 * iqr) {
      hi_whisker = *it;
      break;
    }
  }
  json j;
  j["min"] = lo_whisker;
  j["q1"] = q1;
  j["median"] = med;
  j["q3"] = q3;
  j["max"] = hi_whisker;
  j["outliers"] = outliers;
  return j;
}

int cmd_boxplot(const CommonArgs& common, const std::vector<std::string>& features,
                const std::vector<std::string>& group_factors,
                const std::vector<std::string>& pair,
                bool features_as_rows) {
  auto fm = load_data(common, features_as_rows);
  auto dt = gem::load_design_table(common.design_path, delim_of(common));
  check_alignment(fm, dt);
  fs::create_directories(common.out_dir);

  auto group_label = [&](Eigen::Index s) {
    std::string g;
    for (const auto& f : group_factors) {
      if (!g.empty()) g += "/";
      g += dt.levels_of(f)[static_cast<std::size_t>(s)];
    }
    return g;
  };

  json out = json::object();
  for (const auto& id : features) {
    auto idx = fm.feature_index(id);
    if (!idx) throw gem::Error("unknown feature id '" + id + "'");
    std::map<std::string, std::vector<double>> groups;
    for (Eigen::Index s = 0; s < fm.n_samples(); ++s) {
      groups[group_label(s)].push_back(fm.values(s, *idx));
    }
    json per_group = json::object();
    for (auto& [g, vals] : groups) per_group[g] = five_number(std::move(vals));
    out[id] = per_group;
  }
  write_json(out, fs::path(common.out_dir) / "boxplot.json");

  if (pair.size() == 2) {
    auto ix = fm.feature_index(pair[0]);
    auto iy = fm.feature_index(pair[1]);
    if (!ix || !iy) throw gem::Error("unknown feature id in pair");
    json points = json::array();
    for (Eigen::Index s = 0; s < fm.n_samples(); ++s) {
      json pt;
      pt["sample"] = fm.sample_ids[static_cast<std::size_t>(s)];
      pt["x"] = fm.values(s, *ix);
      pt["y"] = fm.values(s, *iy);
      for (const auto& f : group_factors) {
        pt[f] = dt.levels_of(f)[static_cast<std::size_t>(s)];
      }
      points.push_back(pt);
    }
    json scatter;
    scatter["features"] = pair;
    scatter["points"] = points;
    write_json(scatter, fs::path(common.out_dir) / "scatter.json");
  }
  std::cout << "wrote box plot data for " << features.size() << " feature(s)\n";
  return 0;
}

int cmd_verify(const CommonArgs& common, const std::string& formula_text,
               bool features_as_rows) {
  return cmd_gem(common, formula_text, "", true, features_as_rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GEM: effect decomposition and multivariate analysis of "
               "multi-factor feature matrices"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  CommonArgs common;
  std::string formula = "batch * disease";
  std::string term = "disease";
  bool features_as_rows = false;

  app.add_option("--seed", common.seed, "random seed");
  app.add_option("--out", common.out_dir, "output directory");
  app.add_option("--delimiter", common.delimiter,
                 "field delimiter (one character, or 'tab'); default from extension");
  app.add_option("--formula", formula, "model formula, e.g. 'cohort + disease + cohort:disease'");
  app.add_option("--term", term, "target term / factor");
  app.add_flag("--features-as-rows", features_as_rows,
               "input matrix stores features as rows");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a planted-effect synthetic dataset");
  gem::SynthSpec spec;
  std::vector<Eigen::Index> sizes;
  synth->add_option("--features", spec.n_features, "feature count");
  synth->add_option("--informative", spec.n_informative, "informative feature count");
  synth->add_option("--class-effect", spec.class_effect, "class effect size (noise sd units)");
  synth->add_option("--batch-shift", spec.batch_shift, "batch shift size");
  synth->add_option("--cohort-shift", spec.cohort_shift, "cohort shift size");
  synth->add_option("--interaction", spec.interaction_effect, "interaction effect size");
  synth->add_option("--noise", spec.noise_sd, "noise standard deviation");
  synth->add_option("--cohort-sizes", sizes,
                    "per-cohort class sizes, e.g. --cohort-sizes 7 8 13 14");

  // explore
  auto* explore = app.add_subcommand("explore", "PCA pre-analysis with per-factor separation");
  Eigen::Index k = 5;
  bool center_only = false;
  explore->add_option("--data", common.data_path, "feature matrix CSV/TSV")->required();
  explore->add_option("--design", common.design_path, "design table CSV/TSV")->required();
  explore->add_option("--components", k, "component count");
  explore->add_flag("--center-only", center_only, "center without unit scaling");

  // gem
  auto* gem_cmd = app.add_subcommand("gem", "GLM decomposition into per-factor ER matrices");
  std::string er_term;
  bool verify_flag = false;
  gem_cmd->add_option("--data", common.data_path, "feature matrix CSV/TSV")->required();
  gem_cmd->add_option("--design", common.design_path, "design table CSV/TSV")->required();
  gem_cmd->add_option("--er", er_term, "also emit this term's ER matrix as er_values.csv");
  gem_cmd->add_flag("--verify", verify_flag, "check reconstruction and residual orthogonality");

  // pls
  auto* pls = app.add_subcommand("pls", "PLS-DA with jackknife feature selection");
  Eigen::Index a_max = 5, segments = 0, dof_consumed = 0;
  pls->add_option("--data", common.data_path, "feature (or ER) matrix")->required();
  pls->add_option("--design", common.design_path, "design table")->required();
  pls->add_option("--amax", a_max, "max component count");
  pls->add_option("--segments", segments, "CV segment count (0 = leave-one-out)");
  pls->add_option("--dof-consumed", dof_consumed, "degrees of freedom consumed in step 1");

  // enet
  auto* enet = app.add_subcommand("enet", "elastic-net minimum-support classification");
  double alpha = 0.5, ratio = 0.01, tolerance = 0.02;
  Eigen::Index n_lambda = 50, cv_segments = 5;
  enet->add_option("--data", common.data_path, "feature (or ER) matrix")->required();
  enet->add_option("--design", common.design_path, "design table")->required();
  enet->add_option("--alpha", alpha, "L1 mixing fraction in (0, 1]");
  enet->add_option("--nlambda", n_lambda, "path length");
  enet->add_option("--ratio", ratio, "min/max lambda ratio");
  enet->add_option("--cv", cv_segments, "CV segment count");
  enet->add_option("--tolerance", tolerance, "accuracy tolerance for the minimum-support rule");

  // anova
  auto* anova = app.add_subcommand("anova", "per-feature ANOVA with multiplicity adjustment");
  Eigen::Index n_sim = 1000;
  Eigen::Index anova_dof = 0;
  anova->add_option("--data", common.data_path, "feature (or ER) matrix")->required();
  anova->add_option("--design", common.design_path, "design table")->required();
  anova->add_option("--nsim", n_sim, "rotation simulations (0 disables the rotation test)");
  anova->add_option("--dof-consumed", anova_dof, "degrees of freedom consumed in step 1");

  // boxplot
  auto* boxplot = app.add_subcommand("boxplot", "five-number summaries per group");
  std::vector<std::string> box_features, group_factors{"cohort", "disease"}, pair;
  boxplot->add_option("--data", common.data_path, "feature matrix")->required();
  boxplot->add_option("--design", common.design_path, "design table")->required();
  boxplot->add_option("--features", box_features, "feature ids")->required();
  boxplot->add_option("--group-by", group_factors, "grouping factors");
  boxplot->add_option("--pair", pair, "two feature ids for a 2D scatter emission");

  // verify
  auto* verify = app.add_subcommand("verify", "fit the formula and check the decomposition");
  verify->add_option("--data", common.data_path, "feature matrix")->required();
  verify->add_option("--design", common.design_path, "design table")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (*synth) {
      spec.seed = common.seed;
      if (!sizes.empty()) {
        if (sizes.size() % 2 != 0) {
          throw gem::Error("--cohort-sizes needs pairs of class counts");
        }
        spec.cohort_sizes.clear();
        for (std::size_t i = 0; i + 1 < sizes.size(); i += 2) {
          spec.cohort_sizes.emplace_back(sizes[i], sizes[i + 1]);
        }
      }
      return cmd_synth(common, spec);
    }
    if (*explore) return cmd_explore(common, k, center_only, features_as_rows);
    if (*gem_cmd) return cmd_gem(common, formula, er_term, verify_flag, features_as_rows);
    if (*pls) return cmd_pls(common, term, a_max, segments, dof_consumed, features_as_rows);
    if (*enet) {
      return cmd_enet(common, term, alpha, n_lambda, ratio, cv_segments,
                      tolerance, features_as_rows);
    }
    if (*anova) return cmd_anova(common, term, n_sim, anova_dof, features_as_rows);
    if (*boxplot) {
      return cmd_boxplot(common, box_features, group_factors, pair, features_as_rows);
    }
    if (*verify) return cmd_verify(common, formula, features_as_rows);
  } catch (const gem::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
