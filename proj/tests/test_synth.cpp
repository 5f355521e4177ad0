#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "gem/design.hpp"
#include "gem/errors.hpp"
#include "gem/pca.hpp"
#include "gem/synth.hpp"
#include "helpers.hpp"

using namespace gem;

TEST_CASE("generation is bitwise deterministic in the seed") {
  SynthSpec spec;
  spec.n_features = 100;
  spec.n_informative = 10;
  auto a = generate(spec);
  auto b = generate(spec);
  CHECK(a.features.values == b.features.values);
  CHECK(a.truth.informative_features == b.truth.informative_features);
  spec.seed = 2;
  auto c = generate(spec);
  CHECK(a.features.values != c.features.values);
}

TEST_CASE("default spec matches the documented cohort layout") {
  SynthSpec spec;
  auto data = generate(spec);
  CHECK(data.features.values.rows() == 42);
  CHECK(data.features.values.cols() == 1000);
  CHECK(data.truth.informative_features.size() == 50);

  const auto& cohorts = data.design.levels_of("cohort");
  const auto& disease = data.design.levels_of("disease");
  const auto& batch = data.design.levels_of("batch");
  auto count = [](const std::vector<std::string>& v, const std::string& s) {
    return std::count(v.begin(), v.end(), s);
  };
  CHECK(count(cohorts, "c1") == 15);
  CHECK(count(cohorts, "c2") == 27);
  CHECK(count(disease, "nonD") == 20);
  CHECK(count(disease, "T2D") == 22);
  CHECK(count(batch, "b1") + count(batch, "b2") == 42);
  // batches alternate within each cohort/class cell, so they stay near-balanced
  CHECK(std::abs(count(batch, "b1") - count(batch, "b2")) <= 4);

  // informative feature ids exist in the matrix
  std::set<std::string> ids(data.features.feature_ids.begin(),
                            data.features.feature_ids.end());
  for (const auto& f : data.truth.informative_features) CHECK(ids.count(f) == 1);
}

TEST_CASE("a null spec plants nothing") {
  SynthSpec spec;
  spec.class_effect = 0.0;
  spec.n_informative = 0;
  spec.n_features = 50;
  auto data = generate(spec);
  CHECK(data.truth.informative_features.empty());
  CHECK(data.truth.batch_fraction == 0.0);
  CHECK(data.truth.cohort_fraction == 0.0);
  CHECK(data.truth.class_fraction == 0.0);
}

TEST_CASE("spec validation rejects nonsense") {
  SynthSpec spec;
  spec.n_informative = 2000;  // more than n_features
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = SynthSpec{};
  spec.noise_sd = -1.0;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = SynthSpec{};
  spec.cohort_sizes.clear();
  CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("class shift equals the requested effect size") {
  // two generations differing only in class_effect share every RNG draw, so
  // their difference isolates the planted shift with the noise removed
  SynthSpec base;
  base.n_features = 20;
  base.n_informative = 12;
  base.class_effect = 0.0;
  SynthSpec shifted = base;
  shifted.class_effect = 1.4;
  auto a = generate(base);
  auto b = generate(shifted);
  Eigen::MatrixXd diff = b.features.values - a.features.values;
  const auto& disease = a.design.levels_of("disease");
  for (Eigen::Index i = 0; i < diff.rows(); ++i) {
    const double sign = disease[static_cast<std::size_t>(i)] == "T2D" ? 1.0 : -1.0;
    for (Eigen::Index j = 0; j < 20; ++j) {
      const double expect = j < 12 ? sign * 0.7 : 0.0;
      CHECK(std::abs(std::abs(diff(i, j)) - std::abs(expect)) < 1e-12);
      if (j < 12) CHECK(diff(i, j) * sign * diff(0, j) * (disease[0] == "T2D" ? 1.0 : -1.0) > 0.0);
    }
  }
}

TEST_CASE("empirical batch variance matches the closed-form fraction") {
  SynthSpec spec;
  spec.cohort_sizes = {{50, 50}, {50, 50}};
  spec.batch_shift = 2.256;
  spec.class_effect = 0.0;
  spec.n_informative = 0;
  spec.n_features = 400;
  spec.seed = 3;
  auto data = generate(spec);

  const auto& batch = data.design.levels_of("batch");
  double between = 0.0, total = 0.0;
  for (Eigen::Index j = 0; j < data.features.values.cols(); ++j) {
    Eigen::VectorXd col = data.features.values.col(j);
    const double mean = col.mean();
    double s1 = 0.0;
    Eigen::Index n1 = 0;
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (batch[static_cast<std::size_t>(i)] == "b1") {
        s1 += col(i);
        ++n1;
      }
    }
    const double m1 = s1 / n1;
    const double m2 = (col.sum() - s1) / (col.size() - n1);
    between += n1 * (m1 - mean) * (m1 - mean) +
               (col.size() - n1) * (m2 - mean) * (m2 - mean);
    total += (col.array() - mean).square().sum();
  }
  const double measured = between / total;
  CHECK(measured == doctest::Approx(data.truth.batch_fraction).epsilon(0.09));
  CHECK(std::abs(measured - 0.56) < 0.05);
}

TEST_CASE("oracle OLS solves a saturated design exactly") {
  // y = 3 + 2*a + 1*b with effect-coded +/-1 columns
  Eigen::MatrixXd design(4, 4);
  design << 1, -1, -1, 1,
            1, -1, 1, -1,
            1, 1, -1, -1,
            1, 1, 1, 1;
  Eigen::MatrixXd y(4, 1);
  for (int i = 0; i < 4; ++i) {
    y(i, 0) = 3.0 + 2.0 * design(i, 1) + 1.0 * design(i, 2);
  }
  Eigen::MatrixXd beta = oracle_ols(y, design);
  CHECK(beta(0, 0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(beta(1, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(beta(2, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(beta(3, 0)) < 1e-12);
}

TEST_CASE("oracle OLS rejects rank-deficient designs") {
  Eigen::MatrixXd design(3, 2);
  design << 1, 2, 1, 2, 1, 2;  // duplicated direction
  Eigen::MatrixXd y = Eigen::MatrixXd::Ones(3, 1);
  CHECK_THROWS_AS(oracle_ols(y, design), Error);
}

TEST_CASE("recovery report conventions") {
  GroundTruth truth;
  truth.informative_features = {"f1", "f2", "f3", "f4"};

  auto perfect = evaluate_recovery({"f1", "f2", "f3", "f4"}, truth);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.exceptions.empty());

  auto partial = evaluate_recovery({"f1", "f2", "x9"}, truth);
  CHECK(partial.precision == doctest::Approx(2.0 / 3.0));
  CHECK(partial.recall == doctest::Approx(0.5));
  REQUIRE(partial.exceptions.size() == 1);
  CHECK(partial.exceptions[0] == "x9");

  auto empty = evaluate_recovery({}, truth);
  CHECK(empty.empty_selection);
  CHECK(empty.precision == 1.0);
  CHECK(empty.recall == 0.0);
}

TEST_CASE("class separation survives ER extraction under a batch shift") {
  SynthSpec spec;
  spec.batch_shift = 2.256;
  spec.class_effect = 2.0;
  spec.seed = 4;
  auto data = generate(spec);

  auto dm = encode_design(data.design, ModelFormula::parse("batch + cohort + disease"));
  auto fit = fit_glm(data.features, dm);
  auto er = fit.er_values("disease");

  auto pca_raw = fit_pca(data.features, 2, ScalingMode::Autoscale);
  auto pca_er = fit_pca(er, 2, ScalingMode::Autoscale);
  const auto& disease = data.design.levels_of("disease");
  const auto& batch = data.design.levels_of("batch");

  // the batch shift dominates the raw data, the ER matrix strips it
  CHECK(grouping_separation(pca_raw, batch, 0).between_total_ratio > 0.9);
  CHECK(grouping_separation(pca_er, batch, 0).between_total_ratio < 0.1);
  CHECK(grouping_separation(pca_er, disease, 0).between_total_ratio > 0.5);
}
