#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "gem/design.hpp"
#include "gem/errors.hpp"
#include "gem/synth.hpp"
#include "helpers.hpp"

using namespace gem;

namespace {

// balanced 2x2 factorial with rows (A,B) = (-,-), (-,+), (+,-), (+,+);
// sorted levels put "a1"/"b1" on +1
DesignTable factorial_2x2() {
  return gemtest::make_design({"s1", "s2", "s3", "s4"},
                              {{"A", {"a2", "a2", "a1", "a1"}},
                               {"B", {"b2", "b1", "b2", "b1"}}});
}

}  // namespace

TEST_CASE("formula parsing") {
  auto f = ModelFormula::parse("cohort + disease + cohort:disease");
  CHECK(f.main_factors == std::vector<std::string>{"cohort", "disease"});
  REQUIRE(f.interactions.size() == 1);
  CHECK(f.interactions[0] == std::make_pair(std::string("cohort"), std::string("disease")));

  auto star = ModelFormula::parse("batch * disease");
  CHECK(star.main_factors == std::vector<std::string>{"batch", "disease"});
  CHECK(star.interactions.size() == 1);
  CHECK(star.term_names() ==
        std::vector<std::string>{"intercept", "batch", "disease", "batch:disease"});

  CHECK_THROWS_AS(ModelFormula::parse("a + a:b"), Error);  // b undeclared
  CHECK_THROWS_AS(ModelFormula::parse(""), Error);
}

TEST_CASE("full factorial encodes to 4 pairwise-orthogonal columns") {
  auto dm = encode_design(factorial_2x2(), ModelFormula::parse("A * B"));
  REQUIRE(dm.columns.cols() == 4);
  CHECK(dm.term_names ==
        std::vector<std::string>{"intercept", "A", "B", "A:B"});
  CHECK((dm.columns.col(0).array() == 1.0).all());
  for (Eigen::Index c = 1; c < 4; ++c) {
    CHECK(((dm.columns.col(c).array() == 1.0) ||
           (dm.columns.col(c).array() == -1.0))
              .all());
  }
  for (Eigen::Index a = 0; a < 4; ++a) {
    for (Eigen::Index b = a + 1; b < 4; ++b) {
      CHECK(std::abs(dm.columns.col(a).dot(dm.columns.col(b))) < 1e-14);
    }
  }
  // interaction column is the product of its parents
  CHECK((dm.term_block("A:B") -
         dm.term_block("A").cwiseProduct(dm.term_block("B")))
            .cwiseAbs()
            .maxCoeff() < 1e-14);
}

TEST_CASE("3-level factor yields two effect-coded columns summing to zero") {
  auto d = gemtest::make_design(
      {"s1", "s2", "s3", "s4", "s5", "s6"},
      {{"F", {"x", "y", "z", "x", "y", "z"}}});
  auto dm = encode_design(d, ModelFormula::parse("F"));
  REQUIRE(dm.columns.cols() == 3);  // intercept + 2
  CHECK(std::abs(dm.columns.col(1).sum()) < 1e-14);
  CHECK(std::abs(dm.columns.col(2).sum()) < 1e-14);
}

TEST_CASE("single-level factor and missing factor are rejected") {
  auto d = gemtest::make_design({"s1", "s2"}, {{"F", {"x", "x"}}});
  CHECK_THROWS_AS(encode_design(d, ModelFormula::parse("F")), Error);
  CHECK_THROWS_AS(encode_design(d, ModelFormula::parse("G")), Error);
}

TEST_CASE("saturated factorial: coefficients by symmetry, residuals zero") {
  auto dm = encode_design(factorial_2x2(), ModelFormula::parse("A * B"));
  auto x = gemtest::make_matrix({"s1", "s2", "s3", "s4"}, {"y"},
                                Eigen::Vector4d(0.0, 2.0, 4.0, 6.0));
  auto g = fit_glm(x, dm);
  CHECK(g.column_means(0) == doctest::Approx(3.0));
  CHECK(g.coefficients.at("A")(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(g.coefficients.at("B")(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(g.coefficients.at("A:B")(0, 0)) < 1e-12);
  CHECK(g.residuals.cwiseAbs().maxCoeff() < 1e-12);

  auto er_b = g.er_values("B");
  CHECK(er_b.values(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(er_b.values(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(er_b.values(2, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(er_b.values(3, 0) == doctest::Approx(1.0).epsilon(1e-12));

  // balanced design: er[B] carries nothing in the A direction
  CHECK((dm.term_block("A").transpose() * er_b.values).cwiseAbs().maxCoeff() < 1e-10);

  CHECK(g.dof.residual_df == 0);
  CHECK(g.dof.consumed_total() == 4);
}

TEST_CASE("unknown ER term and intercept ER are rejected") {
  auto dm = encode_design(factorial_2x2(), ModelFormula::parse("A + B"));
  auto x = gemtest::random_matrix(4, 3, 21);
  auto g = fit_glm(x, dm);
  CHECK_THROWS_AS(g.er_values("C"), Error);
  CHECK_THROWS_AS(g.er_values("intercept"), Error);
}

namespace {

// random unbalanced two-factor design over n samples
DesignTable random_design(Eigen::Index n, std::uint64_t seed) {
  gem::Rng rng(seed);
  std::vector<std::string> samples, a, b;
  for (Eigen::Index i = 0; i < n; ++i) {
    samples.push_back("s" + std::to_string(i + 1));
    a.push_back(rng.uniform() < 0.5 ? "a1" : "a2");
    b.push_back(rng.uniform() < 0.4 ? "b1" : (rng.uniform() < 0.5 ? "b2" : "b3"));
  }
  // guarantee every level appears twice
  a[0] = a[1] = "a1"; a[2] = a[3] = "a2";
  b[0] = b[1] = "b1"; b[2] = b[3] = "b2"; b[4] = b[5] = "b3";
  return gemtest::make_design(samples, {{"A", a}, {"B", b}});
}

}  // namespace

TEST_CASE("coefficients match the pseudoinverse oracle on random designs") {
  for (std::uint64_t seed : {31u, 32u, 33u}) {
    auto d = random_design(20, seed);
    auto dm = encode_design(d, ModelFormula::parse("A * B"));
    auto x = gemtest::random_matrix(20, 5, seed + 100);
    auto g = fit_glm(x, dm);

    // independent dense path: normal equations on centered data/design
    Eigen::MatrixXd xc = x.values.rowwise() - x.values.colwise().mean().eval();
    Eigen::MatrixXd dc = dm.columns.rightCols(dm.columns.cols() - 1);
    dc.rowwise() -= dc.colwise().mean().eval();
    Eigen::MatrixXd beta_oracle = oracle_ols(xc, dc);

    Eigen::Index row = 0;
    for (const auto& term : g.terms) {
      const auto& coef = g.coefficients.at(term);
      CHECK((coef - beta_oracle.middleRows(row, coef.rows())).cwiseAbs().maxCoeff() <
            1e-10);
      row += coef.rows();
    }
  }
}

TEST_CASE("er[A] + er[B] + er[AB] - 2 residuals reconstructs the centered data") {
  auto d = random_design(24, 55);
  auto dm = encode_design(d, ModelFormula::parse("A * B"));
  auto x = gemtest::random_matrix(24, 7, 56);
  auto g = fit_glm(x, dm);
  Eigen::MatrixXd sum = g.er_values("A").values + g.er_values("B").values +
                        g.er_values("A:B").values - 2.0 * g.residuals;
  Eigen::MatrixXd centered = x.values.rowwise() - g.column_means;
  CHECK((sum - centered).norm() / centered.norm() < 1e-8);
}

TEST_CASE("reconstruction and residual orthogonality on unbalanced designs") {
  for (std::uint64_t seed : {61u, 62u}) {
    auto d = random_design(26, seed);
    auto dm = encode_design(d, ModelFormula::parse("A * B"));
    auto xraw = gemtest::random_matrix(26, 9, seed + 7);
    auto [x, rec] = standardize(xraw, ScalingMode::Autoscale);
    auto g = fit_glm(x, dm);

    Eigen::MatrixXd centered = x.values.rowwise() - g.column_means;
    CHECK((g.centered() - centered).norm() / centered.norm() < 1e-8);

    for (Eigen::Index c = 0; c < dm.columns.cols(); ++c) {
      CHECK((dm.columns.col(c).transpose() * g.residuals).cwiseAbs().maxCoeff() <
            1e-8);
    }
    // ledger identity
    CHECK(g.dof.consumed_total() + g.dof.residual_df == g.dof.n_samples);
  }
}

TEST_CASE("balanced-design separability: dropping a term leaves others unchanged") {
  // balanced 2x2 with 3 replicates
  std::vector<std::string> samples, a, b;
  for (int r = 0; r < 3; ++r) {
    for (const auto& la : {"a1", "a2"}) {
      for (const auto& lb : {"b1", "b2"}) {
        samples.push_back("s" + std::to_string(samples.size() + 1));
        a.push_back(la);
        b.push_back(lb);
      }
    }
  }
  auto d = gemtest::make_design(samples, {{"A", a}, {"B", b}});
  auto x = gemtest::random_matrix(12, 6, 77);

  auto full = fit_glm(x, encode_design(d, ModelFormula::parse("A * B")));
  auto onlyA = fit_glm(x, encode_design(d, ModelFormula::parse("A")));
  CHECK((full.coefficients.at("A") - onlyA.coefficients.at("A")).cwiseAbs().maxCoeff() <
        1e-10);
}

TEST_CASE("feature permutation permutes ER columns bit-exactly") {
  auto d = random_design(18, 91);
  auto dm = encode_design(d, ModelFormula::parse("A + B"));
  auto x = gemtest::random_matrix(18, 5, 92);

  FeatureMatrix perm = x;
  std::vector<Eigen::Index> order{3, 0, 4, 1, 2};
  for (std::size_t j = 0; j < order.size(); ++j) {
    perm.feature_ids[j] = x.feature_ids[static_cast<std::size_t>(order[j])];
    perm.values.col(static_cast<Eigen::Index>(j)) = x.values.col(order[j]);
  }
  auto g1 = fit_glm(x, dm);
  auto g2 = fit_glm(perm, dm);
  auto er1 = g1.er_values("A");
  auto er2 = g2.er_values("A");
  for (std::size_t j = 0; j < order.size(); ++j) {
    CHECK(er2.values.col(static_cast<Eigen::Index>(j)) == er1.values.col(order[j]));
  }
}

TEST_CASE("aliased terms are named") {
  // two identical factors alias each other
  auto d = gemtest::make_design({"s1", "s2", "s3", "s4"},
                                {{"A", {"x", "x", "y", "y"}},
                                 {"B", {"u", "u", "v", "v"}}});
  auto dm = encode_design(d, ModelFormula::parse("A + B"));
  auto x = gemtest::random_matrix(4, 2, 13);
  CHECK_THROWS_WITH_AS(fit_glm(x, dm), doctest::Contains("aliased"), Error);
}

TEST_CASE("more design columns than samples is an error") {
  auto d = gemtest::make_design(
      {"s1", "s2", "s3"},
      {{"A", {"x", "y", "z"}}, {"B", {"u", "v", "w"}}});
  auto dm = encode_design(d, ModelFormula::parse("A + B"));
  auto x = gemtest::random_matrix(3, 2, 14);
  CHECK_THROWS_AS(fit_glm(x, dm), Error);
}

TEST_CASE("decomposition serializes to a directory") {
  namespace fs = std::filesystem;
  auto d = random_design(16, 101);
  auto dm = encode_design(d, ModelFormula::parse("A * B"));
  auto x = gemtest::random_matrix(16, 4, 102);
  auto g = fit_glm(x, dm);
  auto dir = fs::temp_directory_path() / "gem_design_serialize";
  fs::remove_all(dir);
  write_decomposition(g, dir.string());
  CHECK(fs::exists(dir / "er_A.csv"));
  CHECK(fs::exists(dir / "er_AxB.csv"));
  CHECK(fs::exists(dir / "coefficients_B.csv"));
  CHECK(fs::exists(dir / "residuals.csv"));
  CHECK(fs::exists(dir / "ledger.json"));
  auto er = load_feature_matrix((dir / "er_A.csv").string(),
                                Orientation::SamplesAsRows);
  CHECK(er.values == g.er_values("A").values);
}
