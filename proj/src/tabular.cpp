#include "gem/tabular.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "gem/errors.hpp"

namespace gem {

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_cell(const std::string& cell, const std::string& row_id,
                  const std::string& col_id) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  while (ptr != last && (*ptr == ' ' || *ptr == '\t')) ++ptr;
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw Error("non-numeric cell '" + cell + "' at sample/feature (" + row_id +
                ", " + col_id + ")");
  }
  return v;
}

void check_unique(const std::vector<std::string>& ids, const char* what) {
  std::unordered_set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) {
      throw Error(std::string("duplicate ") + what + " id '" + id + "'");
    }
  }
}

std::string format_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

struct RawTable {
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
  std::vector<std::vector<std::string>> cells;  // per row, data columns only
};

RawTable read_table(const std::string& path, char delim) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  RawTable t;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    auto fields = split_line(line, delim);
    if (header) {
      if (fields.size() < 2) throw Error("header needs at least two columns: " + path);
      t.col_ids.assign(fields.begin() + 1, fields.end());
      header = false;
      continue;
    }
    if (fields.size() != t.col_ids.size() + 1) {
      throw Error("ragged row '" + fields.front() + "' in " + path + ": expected " +
                  std::to_string(t.col_ids.size() + 1) + " fields, got " +
                  std::to_string(fields.size()));
    }
    t.row_ids.push_back(fields.front());
    t.cells.emplace_back(fields.begin() + 1, fields.end());
  }
  if (t.row_ids.empty()) throw Error("empty table: " + path);
  return t;
}

}  // namespace

void FeatureMatrix::validate() const {
  if (values.rows() != static_cast<Eigen::Index>(sample_ids.size()) ||
      values.cols() != static_cast<Eigen::Index>(feature_ids.size())) {
    throw Error("feature matrix dimensions disagree with id lists");
  }
  check_unique(sample_ids, "sample");
  check_unique(feature_ids, "feature");
  if (!values.allFinite()) throw Error("feature matrix contains non-finite values");
}

std::optional<Eigen::Index> FeatureMatrix::feature_index(
    const std::string& id) const {
  auto it = std::find(feature_ids.begin(), feature_ids.end(), id);
  if (it == feature_ids.end()) return std::nullopt;
  return static_cast<Eigen::Index>(it - feature_ids.begin());
}

const std::vector<std::string>& DesignTable::levels_of(
    const std::string& factor) const {
  for (std::size_t f = 0; f < factor_names.size(); ++f) {
    if (factor_names[f] == factor) return factor_levels[f];
  }
  throw Error("unknown factor '" + factor + "'");
}

bool DesignTable::has_factor(const std::string& factor) const {
  return std::find(factor_names.begin(), factor_names.end(), factor) !=
         factor_names.end();
}

std::vector<std::string> DesignTable::distinct_levels(
    const std::string& factor) const {
  const auto& col = levels_of(factor);
  std::set<std::string> s(col.begin(), col.end());
  return {s.begin(), s.end()};
}

char detect_delimiter(const std::string& path) {
  auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".tsv" || ext == ".txt") return '\t';
  return ',';
}

FeatureMatrix load_feature_matrix(const std::string& path,
                                  Orientation orientation,
                                  std::optional<char> delimiter) {
  const char delim = delimiter.value_or(detect_delimiter(path));
  RawTable t = read_table(path, delim);
  check_unique(t.row_ids, "row");
  check_unique(t.col_ids, "column");

  FeatureMatrix m;
  const auto nr = static_cast<Eigen::Index>(t.row_ids.size());
  const auto nc = static_cast<Eigen::Index>(t.col_ids.size());
  Eigen::MatrixXd raw(nr, nc);
  for (Eigen::Index i = 0; i < nr; ++i) {
    for (Eigen::Index j = 0; j < nc; ++j) {
      raw(i, j) = parse_cell(t.cells[i][j], t.row_ids[i], t.col_ids[j]);
    }
  }
  if (orientation == Orientation::SamplesAsRows) {
    m.sample_ids = std::move(t.row_ids);
    m.feature_ids = std::move(t.col_ids);
    m.values = std::move(raw);
  } else {
    m.sample_ids = std::move(t.col_ids);
    m.feature_ids = std::move(t.row_ids);
    m.values = raw.transpose();
  }
  m.validate();
  return m;
}

void write_feature_matrix(const FeatureMatrix& m, const std::string& path,
                          std::optional<char> delimiter) {
  const char delim = delimiter.value_or(detect_delimiter(path));
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out << "id";
  for (const auto& f : m.feature_ids) out << delim << f;
  out << "\n";
  for (Eigen::Index i = 0; i < m.n_samples(); ++i) {
    out << m.sample_ids[i];
    for (Eigen::Index j = 0; j < m.n_features(); ++j) {
      out << delim << format_double(m.values(i, j));
    }
    out << "\n";
  }
}

DesignTable load_design_table(const std::string& path,
                              std::optional<char> delimiter) {
  const char delim = delimiter.value_or(detect_delimiter(path));
  RawTable t = read_table(path, delim);
  check_unique(t.row_ids, "sample");
  check_unique(t.col_ids, "factor");

  DesignTable d;
  d.sample_ids = t.row_ids;
  d.factor_names = t.col_ids;
  d.factor_levels.resize(t.col_ids.size());
  for (std::size_t f = 0; f < t.col_ids.size(); ++f) {
    auto& col = d.factor_levels[f];
    col.reserve(t.row_ids.size());
    for (std::size_t s = 0; s < t.row_ids.size(); ++s) {
      const auto& cell = t.cells[s][f];
      if (cell.empty()) {
        throw Error("missing level for sample '" + t.row_ids[s] + "', factor '" +
                    t.col_ids[f] + "'");
      }
      col.push_back(cell);
    }
    std::set<std::string> distinct(col.begin(), col.end());
    if (distinct.size() < 2) d.single_level_factors.push_back(t.col_ids[f]);
  }
  return d;
}

void write_design_table(const DesignTable& d, const std::string& path,
                        std::optional<char> delimiter) {
  const char delim = delimiter.value_or(detect_delimiter(path));
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out << "id";
  for (const auto& f : d.factor_names) out << delim << f;
  out << "\n";
  for (std::size_t s = 0; s < d.sample_ids.size(); ++s) {
    out << d.sample_ids[s];
    for (std::size_t f = 0; f < d.factor_names.size(); ++f) {
      out << delim << d.factor_levels[f][s];
    }
    out << "\n";
  }
}

std::pair<FeatureMatrix, StandardizationRecord> standardize(
    const FeatureMatrix& m, ScalingMode mode) {
  const Eigen::Index n = m.n_samples();
  if (n < 2 && mode == ScalingMode::Autoscale) {
    throw Error("autoscale needs at least two samples");
  }
  StandardizationRecord rec;
  rec.mode = mode == ScalingMode::Center ? "center" : "autoscale";

  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < m.n_features(); ++j) {
    const double mean = m.values.col(j).mean();
    double scale = 1.0;
    if (mode == ScalingMode::Autoscale) {
      const double ss = (m.values.col(j).array() - mean).square().sum();
      const double sd = std::sqrt(ss / static_cast<double>(n - 1));
      if (sd <= 0.0) {
        rec.dropped_features.push_back(m.feature_ids[j]);
        continue;
      }
      scale = sd;
    }
    keep.push_back(j);
    rec.feature_ids.push_back(m.feature_ids[j]);
    rec.centers.push_back(mean);
    rec.scales.push_back(scale);
  }
  if (keep.empty()) throw Error("all features dropped during standardization");

  FeatureMatrix out;
  out.sample_ids = m.sample_ids;
  out.feature_ids = rec.feature_ids;
  out.values.resize(n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.values.col(static_cast<Eigen::Index>(k)) =
        (m.values.col(keep[k]).array() - rec.centers[k]) / rec.scales[k];
  }
  return {std::move(out), std::move(rec)};
}

void write_standardization_record(const StandardizationRecord& r,
                                  const std::string& path) {
  nlohmann::json j;
  j["mode"] = r.mode;
  j["feature_ids"] = r.feature_ids;
  j["centers"] = r.centers;
  j["scales"] = r.scales;
  j["dropped_features"] = r.dropped_features;
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

StandardizationRecord load_standardization_record(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  StandardizationRecord r;
  r.mode = j.at("mode").get<std::string>();
  r.feature_ids = j.at("feature_ids").get<std::vector<std::string>>();
  r.centers = j.at("centers").get<std::vector<double>>();
  r.scales = j.at("scales").get<std::vector<double>>();
  r.dropped_features = j.at("dropped_features").get<std::vector<std::string>>();
  return r;
}

std::pair<FeatureMatrix, DesignTable> merge_cohorts(
    const std::vector<std::pair<FeatureMatrix, DesignTable>>& cohorts,
    const std::vector<std::string>& cohort_names) {
  if (cohorts.size() < 2) throw Error("merge needs at least two cohorts");
  if (cohort_names.size() != cohorts.size()) {
    throw Error("cohort name count disagrees with cohort count");
  }

  // shared features, kept in sorted order so the merge is order-invariant
  std::set<std::string> common(cohorts[0].first.feature_ids.begin(),
                               cohorts[0].first.feature_ids.end());
  for (std::size_t c = 1; c < cohorts.size(); ++c) {
    std::set<std::string> ids(cohorts[c].first.feature_ids.begin(),
                              cohorts[c].first.feature_ids.end());
    std::set<std::string> next;
    std::set_intersection(common.begin(), common.end(), ids.begin(), ids.end(),
                          std::inserter(next, next.begin()));
    common.swap(next);
  }
  if (common.empty()) throw Error("empty feature intersection across cohorts");

  // shared factors, order of the first cohort
  std::vector<std::string> shared_factors;
  for (const auto& f : cohorts[0].second.factor_names) {
    bool everywhere = true;
    for (std::size_t c = 1; c < cohorts.size(); ++c) {
      if (!cohorts[c].second.has_factor(f)) everywhere = false;
    }
    if (everywhere && f != "cohort") shared_factors.push_back(f);
  }

  // per-cohort autoscale on the common features; drop the union of
  // zero-variance features so all cohorts stay on one feature set
  std::vector<std::string> common_vec(common.begin(), common.end());
  std::vector<FeatureMatrix> scaled;
  std::set<std::string> dropped;
  for (const auto& [fm, dt] : cohorts) {
    FeatureMatrix sub;
    sub.sample_ids = fm.sample_ids;
    sub.feature_ids = common_vec;
    sub.values.resize(fm.n_samples(), static_cast<Eigen::Index>(common_vec.size()));
    for (std::size_t j = 0; j < common_vec.size(); ++j) {
      auto idx = fm.feature_index(common_vec[j]);
      sub.values.col(static_cast<Eigen::Index>(j)) = fm.values.col(*idx);
    }
    auto [std_fm, rec] = standardize(sub, ScalingMode::Autoscale);
    dropped.insert(rec.dropped_features.begin(), rec.dropped_features.end());
    scaled.push_back(std::move(std_fm));
  }

  std::vector<std::string> final_features;
  for (const auto& f : common_vec) {
    if (!dropped.count(f)) final_features.push_back(f);
  }
  if (final_features.empty()) throw Error("all shared features have zero variance");

  // stack rows, resolving sample id collisions by prefixing cohort names
  std::unordered_set<std::string> all_ids;
  bool collision = false;
  for (std::size_t c = 0; c < scaled.size(); ++c) {
    for (const auto& s : cohorts[c].first.sample_ids) {
      if (!all_ids.insert(s).second) collision = true;
    }
  }

  Eigen::Index total = 0;
  for (const auto& s : scaled) total += s.n_samples();

  FeatureMatrix stacked;
  stacked.feature_ids = final_features;
  stacked.values.resize(total, static_cast<Eigen::Index>(final_features.size()));
  DesignTable design;
  design.factor_names = shared_factors;
  design.factor_names.push_back("cohort");
  design.factor_levels.resize(design.factor_names.size());

  Eigen::Index row = 0;
  for (std::size_t c = 0; c < scaled.size(); ++c) {
    const auto& fm = scaled[c];
    const auto& dt = cohorts[c].second;
    for (std::size_t j = 0; j < final_features.size(); ++j) {
      auto idx = fm.feature_index(final_features[j]);
      stacked.values.block(row, static_cast<Eigen::Index>(j), fm.n_samples(), 1) =
          fm.values.col(*idx);
    }
    for (Eigen::Index s = 0; s < fm.n_samples(); ++s) {
      std::string id = fm.sample_ids[static_cast<std::size_t>(s)];
      if (collision) id = cohort_names[c] + ":" + id;
      stacked.sample_ids.push_back(id);
      design.sample_ids.push_back(id);
      for (std::size_t f = 0; f < shared_factors.size(); ++f) {
        design.factor_levels[f].push_back(
            dt.levels_of(shared_factors[f])[static_cast<std::size_t>(s)]);
      }
      design.factor_levels[shared_factors.size()].push_back(cohort_names[c]);
    }
    row += fm.n_samples();
  }

  // final autoscale of the stacked matrix (scale -> rbind -> scale order)
  auto [merged, rec] = standardize(stacked, ScalingMode::Autoscale);
  if (!rec.dropped_features.empty()) {
    // keep the design aligned; features dropped here had zero pooled variance
  }
  merged.validate();
  return {std::move(merged), std::move(design)};
}

}  // namespace gem
