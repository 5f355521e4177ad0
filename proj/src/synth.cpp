#include "gem/synth.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "gem/errors.hpp"
#include "gem/rng.hpp"

namespace gem {

void SynthSpec::validate() const {
  if (cohort_sizes.empty()) throw Error("need at least one cohort");
  for (const auto& [c0, c1] : cohort_sizes) {
    if (c0 < 2 || c1 < 2) throw Error("each cohort needs >= 2 samples per class");
  }
  if (n_features < 1) throw Error("need at least one feature");
  if (n_informative < 0 || n_informative > n_features) {
    throw Error("informative count outside [0, feature count]");
  }
  if (class_effect < 0.0 || batch_shift < 0.0 || cohort_shift < 0.0 ||
      interaction_effect < 0.0 || noise_sd <= 0.0) {
    throw Error("effect sizes must be >= 0 and noise sd > 0");
  }
}

Eigen::Index SynthSpec::n_samples() const {
  Eigen::Index n = 0;
  for (const auto& [c0, c1] : cohort_sizes) n += c0 + c1;
  return n;
}

SynthData generate(const SynthSpec& spec) {
  spec.validate();
  const Eigen::Index n = spec.n_samples();
  const Eigen::Index p = spec.n_features;
  Rng rng(spec.seed);

  SynthData out;
  auto& fm = out.features;
  auto& dt = out.design;

  for (Eigen::Index j = 0; j < p; ++j) {
    fm.feature_ids.push_back("g" + std::to_string(j + 1));
  }

  // per-feature direction signs, drawn before the noise block so that the
  // planted structure is independent of feature count changes downstream
  Eigen::VectorXd batch_dir(p), cohort_dir(p), class_dir(p), inter_dir(p);
  for (Eigen::Index j = 0; j < p; ++j) batch_dir(j) = rng.uniform() < 0.5 ? -1.0 : 1.0;
  for (Eigen::Index j = 0; j < p; ++j) cohort_dir(j) = rng.uniform() < 0.5 ? -1.0 : 1.0;
  for (Eigen::Index j = 0; j < p; ++j) class_dir(j) = rng.uniform() < 0.5 ? -1.0 : 1.0;
  for (Eigen::Index j = 0; j < p; ++j) inter_dir(j) = rng.uniform() < 0.5 ? -1.0 : 1.0;

  dt.factor_names = {"batch", "cohort", "disease"};
  dt.factor_levels.resize(3);

  struct SampleCtx {
    double batch_sign, cohort_sign, class_sign;
  };
  std::vector<SampleCtx> ctx;
  Eigen::Index sid = 0;
  for (std::size_t c = 0; c < spec.cohort_sizes.size(); ++c) {
    const auto& [n0, n1] = spec.cohort_sizes[c];
    const double cohort_sign = c % 2 == 0 ? 1.0 : -1.0;
    const std::string cohort_name = "c" + std::to_string(c + 1);
    Eigen::Index within = 0;
    for (int cls = 0; cls < 2; ++cls) {
      const Eigen::Index count = cls == 0 ? n0 : n1;
      for (Eigen::Index i = 0; i < count; ++i, ++sid, ++within) {
        const std::string id = cohort_name + "_s" + std::to_string(within + 1);
        fm.sample_ids.push_back(id);
        dt.sample_ids.push_back(id);
        // alternate batches within each cohort/class cell
        const bool batch1 = within % 2 == 0;
        dt.factor_levels[0].push_back(batch1 ? "b1" : "b2");
        dt.factor_levels[1].push_back(cohort_name);
        dt.factor_levels[2].push_back(cls == 0 ? "nonD" : "T2D");
        ctx.push_back({batch1 ? 1.0 : -1.0, cohort_sign, cls == 0 ? -1.0 : 1.0});
      }
    }
  }

  const double sd = spec.noise_sd;
  const double hb = 0.5 * spec.batch_shift * sd;
  const double hc = 0.5 * spec.cohort_shift * sd;
  const double he = 0.5 * spec.class_effect * sd;
  const double hi = 0.5 * spec.interaction_effect * sd;

  fm.values.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = ctx[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < p; ++j) {
      const bool informative = j < spec.n_informative;
      double v = s.batch_sign * hb * batch_dir(j) +
                 s.cohort_sign * hc * cohort_dir(j);
      if (informative) {
        v += s.class_sign * he * class_dir(j) +
             s.cohort_sign * s.class_sign * hi * inter_dir(j);
      }
      fm.values(i, j) = v + sd * rng.normal();
    }
  }

  auto& truth = out.truth;
  for (Eigen::Index j = 0; j < spec.n_informative; ++j) {
    truth.informative_features.push_back(fm.feature_ids[static_cast<std::size_t>(j)]);
    truth.effect_signs.push_back(class_dir(j));
  }
  // closed-form variance budget, balanced +/- half-shift per term
  const double var_noise = sd * sd;
  double total = 0.0, vb = 0.0, vc = 0.0, ve = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    const bool informative = j < spec.n_informative;
    const double b = hb * hb;
    const double c = hc * hc;
    const double e = informative ? he * he : 0.0;
    const double ix = informative ? hi * hi : 0.0;
    vb += b;
    vc += c;
    ve += e;
    total += b + c + e + ix + var_noise;
  }
  truth.batch_fraction = vb / total;
  truth.cohort_fraction = vc / total;
  truth.class_fraction = ve / total;

  fm.values.eval();
  return out;
}

void write_ground_truth(const GroundTruth& t, const std::string& path) {
  nlohmann::json j;
  j["informative_features"] = t.informative_features;
  j["effect_signs"] = t.effect_signs;
  j["batch_fraction"] = t.batch_fraction;
  j["cohort_fraction"] = t.cohort_fraction;
  j["class_fraction"] = t.class_fraction;
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

Eigen::MatrixXd oracle_ols(const Eigen::MatrixXd& x,
                           const Eigen::MatrixXd& design) {
  Eigen::MatrixXd gram = design.transpose() * design;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible()) {
    throw Error("oracle: design is rank deficient");
  }
  return lu.inverse() * design.transpose() * x;
}

RecoveryReport evaluate_recovery(const std::vector<std::string>& selected,
                                 const GroundTruth& truth) {
  RecoveryReport r;
  std::set<std::string> planted(truth.informative_features.begin(),
                                truth.informative_features.end());
  if (selected.empty()) {
    r.empty_selection = true;
    r.precision = 1.0;  // convention for an empty selection, flagged
    r.recall = 0.0;
    return r;
  }
  std::size_t hits = 0;
  for (const auto& id : selected) {
    if (planted.count(id)) {
      ++hits;
    } else {
      r.exceptions.push_back(id);
    }
  }
  r.precision = static_cast<double>(hits) / static_cast<double>(selected.size());
  r.recall = planted.empty()
                 ? 0.0
                 : static_cast<double>(hits) / static_cast<double>(planted.size());
  return r;
}

}  // namespace gem
