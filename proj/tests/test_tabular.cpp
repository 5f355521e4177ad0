#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gem/errors.hpp"
#include "gem/tabular.hpp"
#include "helpers.hpp"

using namespace gem;
namespace fs = std::filesystem;

namespace {

fs::path tmpfile(const std::string& name) {
  auto dir = fs::temp_directory_path() / "gem_tabular_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_CASE("load 3x2 csv, samples as rows") {
  auto p = tmpfile("basic.csv");
  write_text(p, "id,g1,g2\ns1,1,2\ns2,3,4\ns3,5,6\n");
  auto m = load_feature_matrix(p.string(), Orientation::SamplesAsRows);
  CHECK(m.sample_ids == std::vector<std::string>{"s1", "s2", "s3"});
  CHECK(m.feature_ids == std::vector<std::string>{"g1", "g2"});
  CHECK(m.values(0, 0) == 1.0);
  CHECK(m.values(2, 1) == 6.0);
}

TEST_CASE("transposed input with features-as-rows gives the identical matrix") {
  auto p1 = tmpfile("rows.csv");
  auto p2 = tmpfile("cols.csv");
  write_text(p1, "id,g1,g2\ns1,1,2\ns2,3,4\ns3,5,6\n");
  write_text(p2, "id,s1,s2,s3\ng1,1,3,5\ng2,2,4,6\n");
  auto a = load_feature_matrix(p1.string(), Orientation::SamplesAsRows);
  auto b = load_feature_matrix(p2.string(), Orientation::FeaturesAsRows);
  CHECK(a.sample_ids == b.sample_ids);
  CHECK(a.feature_ids == b.feature_ids);
  CHECK(a.values == b.values);
}

TEST_CASE("NA cell names the offending sample and feature") {
  auto p = tmpfile("na.csv");
  write_text(p, "id,g1,g2\ns1,1,NA\ns2,3,4\n");
  CHECK_THROWS_WITH_AS(load_feature_matrix(p.string(), Orientation::SamplesAsRows),
                       doctest::Contains("s1"), Error);
  try {
    load_feature_matrix(p.string(), Orientation::SamplesAsRows);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("g2") != std::string::npos);
  }
}

TEST_CASE("duplicate ids, ragged rows and empty tables are rejected") {
  auto p = tmpfile("bad.csv");
  write_text(p, "id,g1\ns1,1\ns1,2\n");
  CHECK_THROWS_AS(load_feature_matrix(p.string(), Orientation::SamplesAsRows), Error);
  write_text(p, "id,g1,g2\ns1,1\n");
  CHECK_THROWS_AS(load_feature_matrix(p.string(), Orientation::SamplesAsRows), Error);
  write_text(p, "id,g1,g2\n");
  CHECK_THROWS_AS(load_feature_matrix(p.string(), Orientation::SamplesAsRows), Error);
}

TEST_CASE("tsv delimiter from extension") {
  auto p = tmpfile("basic.tsv");
  write_text(p, "id\tg1\ns1\t1.5\n");
  auto m = load_feature_matrix(p.string(), Orientation::SamplesAsRows);
  CHECK(m.values(0, 0) == 1.5);
}

TEST_CASE("feature matrix round-trips at full printed precision") {
  auto m = gemtest::random_matrix(7, 13, 42);
  auto p = tmpfile("roundtrip.csv");
  write_feature_matrix(m, p.string());
  auto back = load_feature_matrix(p.string(), Orientation::SamplesAsRows);
  CHECK(back.sample_ids == m.sample_ids);
  CHECK(back.feature_ids == m.feature_ids);
  CHECK(back.values == m.values);  // bitwise via shortest round-trip format
}

TEST_CASE("design table load") {
  auto p = tmpfile("design.csv");
  write_text(p, "id,batch,disease\ns1,b1,T2D\ns2,b1,nonD\ns3,b2,T2D\ns4,b2,nonD\n");
  auto d = load_design_table(p.string());
  CHECK(d.factor_names == std::vector<std::string>{"batch", "disease"});
  CHECK(d.levels_of("disease")[0] == "T2D");
  CHECK(d.single_level_factors.empty());

  write_text(p, "id,batch\ns1,b1\ns2,b1\n");
  auto single = load_design_table(p.string());
  CHECK(single.single_level_factors == std::vector<std::string>{"batch"});

  write_text(p, "id,batch\ns1,b1\ns1,b2\n");
  CHECK_THROWS_AS(load_design_table(p.string()), Error);

  write_text(p, "id,batch\ns1,\ns2,b2\n");
  CHECK_THROWS_AS(load_design_table(p.string()), Error);
}

TEST_CASE("autoscale of [1,2,3] gives [-1,0,1]") {
  auto m = gemtest::make_matrix({"a", "b", "c"}, {"g1"},
                                Eigen::Vector3d(1.0, 2.0, 3.0));
  auto [s, rec] = standardize(m, ScalingMode::Autoscale);
  CHECK(s.values(0, 0) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(s.values(1, 0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(s.values(2, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(rec.centers[0] == doctest::Approx(2.0));
  CHECK(rec.scales[0] == doctest::Approx(1.0));
}

TEST_CASE("centering is idempotent") {
  auto m = gemtest::random_matrix(9, 4, 7);
  auto [c1, r1] = standardize(m, ScalingMode::Center);
  auto [c2, r2] = standardize(c1, ScalingMode::Center);
  CHECK((c1.values - c2.values).cwiseAbs().maxCoeff() < 1e-12);
  for (double c : r2.centers) CHECK(std::abs(c) < 1e-12);
}

TEST_CASE("constant column is dropped under autoscale and reported") {
  Eigen::MatrixXd v(3, 2);
  v << 5, 1, 5, 2, 5, 3;
  auto m = gemtest::make_matrix({"a", "b", "c"}, {"flat", "g1"}, v);
  auto [s, rec] = standardize(m, ScalingMode::Autoscale);
  CHECK(s.feature_ids == std::vector<std::string>{"g1"});
  CHECK(rec.dropped_features == std::vector<std::string>{"flat"});

  Eigen::MatrixXd allflat = Eigen::MatrixXd::Constant(3, 2, 1.0);
  auto flat = gemtest::make_matrix({"a", "b", "c"}, {"f1", "f2"}, allflat);
  CHECK_THROWS_AS(standardize(flat, ScalingMode::Autoscale), Error);
}

TEST_CASE("standardization record json round-trip") {
  auto m = gemtest::random_matrix(5, 3, 11);
  auto [s, rec] = standardize(m, ScalingMode::Autoscale);
  auto p = tmpfile("record.json");
  write_standardization_record(rec, p.string());
  auto back = load_standardization_record(p.string());
  CHECK(back.mode == rec.mode);
  CHECK(back.centers == rec.centers);
  CHECK(back.scales == rec.scales);
  CHECK(back.feature_ids == rec.feature_ids);
}

namespace {

std::pair<FeatureMatrix, DesignTable> cohort(Eigen::Index n,
                                             const std::vector<std::string>& genes,
                                             std::uint64_t seed,
                                             const std::string& prefix) {
  gem::Rng rng(seed);
  Eigen::MatrixXd v(n, static_cast<Eigen::Index>(genes.size()));
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) v(i, j) = rng.normal();
  }
  std::vector<std::string> samples, disease;
  for (Eigen::Index i = 0; i < n; ++i) {
    samples.push_back(prefix + std::to_string(i + 1));
    disease.push_back(i % 2 == 0 ? "T2D" : "nonD");
  }
  auto fm = gemtest::make_matrix(samples, genes, v);
  auto dt = gemtest::make_design(samples, {{"disease", disease}});
  return {fm, dt};
}

}  // namespace

TEST_CASE("merge restricts to the feature intersection") {
  auto c1 = cohort(6, {"g1", "g2", "g3"}, 1, "a");
  auto c2 = cohort(8, {"g2", "g3", "g4"}, 2, "b");
  auto [merged, design] = merge_cohorts({c1, c2}, {"c1", "c2"});
  CHECK(merged.feature_ids == std::vector<std::string>{"g2", "g3"});
  CHECK(design.has_factor("cohort"));
  CHECK(design.has_factor("disease"));
}

TEST_CASE("merged sample count is the sum of cohort sizes") {
  auto c1 = cohort(15, {"g1", "g2"}, 3, "a");
  auto c2 = cohort(27, {"g1", "g2"}, 4, "b");
  auto [merged, design] = merge_cohorts({c1, c2}, {"c1", "c2"});
  CHECK(merged.n_samples() == 42);
}

TEST_CASE("merged columns have mean 0 and sd 1") {
  auto c1 = cohort(10, {"g1", "g2", "g3"}, 5, "a");
  auto c2 = cohort(12, {"g1", "g2", "g3"}, 6, "b");
  auto [merged, design] = merge_cohorts({c1, c2}, {"c1", "c2"});
  const double n = static_cast<double>(merged.n_samples());
  for (Eigen::Index j = 0; j < merged.n_features(); ++j) {
    const double mean = merged.values.col(j).mean();
    const double sd = std::sqrt(
        (merged.values.col(j).array() - mean).square().sum() / (n - 1.0));
    CHECK(std::abs(mean) < 1e-10);
    CHECK(std::abs(sd - 1.0) < 1e-10);
  }
}

TEST_CASE("merge is invariant to cohort order up to row permutation") {
  auto c1 = cohort(9, {"g1", "g2", "g3"}, 7, "a");
  auto c2 = cohort(11, {"g2", "g3", "g1"}, 8, "b");
  auto [m12, d12] = merge_cohorts({c1, c2}, {"x", "y"});
  auto [m21, d21] = merge_cohorts({c2, c1}, {"y", "x"});
  CHECK(m12.feature_ids == m21.feature_ids);
  for (Eigen::Index i = 0; i < m12.n_samples(); ++i) {
    const auto& id = m12.sample_ids[static_cast<std::size_t>(i)];
    auto it = std::find(m21.sample_ids.begin(), m21.sample_ids.end(), id);
    REQUIRE(it != m21.sample_ids.end());
    const auto r = static_cast<Eigen::Index>(it - m21.sample_ids.begin());
    CHECK((m12.values.row(i) - m21.values.row(r)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("sample id collisions are resolved by prefixing cohort names") {
  auto c1 = cohort(6, {"g1", "g2"}, 9, "s");
  auto c2 = cohort(6, {"g1", "g2"}, 10, "s");
  auto [merged, design] = merge_cohorts({c1, c2}, {"c1", "c2"});
  CHECK(merged.sample_ids[0] == "c1:s1");
  CHECK(merged.sample_ids[6] == "c2:s1");
}

TEST_CASE("empty feature intersection is an error") {
  auto c1 = cohort(6, {"g1"}, 11, "a");
  auto c2 = cohort(6, {"g2"}, 12, "b");
  CHECK_THROWS_AS(merge_cohorts({c1, c2}, {"c1", "c2"}), Error);
}
