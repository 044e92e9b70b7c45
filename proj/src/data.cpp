#include "improvkit/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "improvkit/error.hpp"
#include "improvkit/kv_config.hpp"
#include "improvkit/rng.hpp"

namespace improvkit {

void FeaturePartition::validate(int d) const {
  std::vector<int> seen(d, 0);
  for (const auto* list : {&improvable, &manipulable, &immutable}) {
    for (int j : *list) {
      if (j < 0 || j >= d) throw DataError("feature partition index " + std::to_string(j) + " out of range");
      if (seen[j]++) throw DataError("feature partition lists overlap at index " + std::to_string(j));
    }
  }
  for (int j = 0; j < d; ++j)
    if (!seen[j]) throw DataError("feature " + std::to_string(j) + " missing from partition");
}

FeaturePartition FeaturePartition::all_improvable(int d) {
  FeaturePartition p;
  p.improvable.resize(d);
  std::iota(p.improvable.begin(), p.improvable.end(), 0);
  return p;
}

void Dataset::validate() const {
  const int n = rows();
  if (n < 1) throw DataError("dataset is empty");
  if (labels.size() != n || groups.size() != n) throw DataError("labels/groups length mismatch");
  if (num_groups < 2) throw DataError("need at least two groups");
  if (!features.allFinite()) throw DataError("non-finite feature value");
  for (int i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1)
      throw DataError("row " + std::to_string(i) + ": label must be 0 or 1");
    if (groups[i] < 0 || groups[i] >= num_groups)
      throw DataError("row " + std::to_string(i) + ": group out of range");
  }
  partition.validate(dim());
  if (!column_names.empty() && static_cast<int>(column_names.size()) != dim())
    throw DataError("column_names length mismatch");
}

Dataset Dataset::subset(const std::vector<int>& idx) const {
  Dataset out;
  const int m = static_cast<int>(idx.size());
  out.features.resize(m, dim());
  out.labels.resize(m);
  out.groups.resize(m);
  for (int r = 0; r < m; ++r) {
    out.features.row(r) = features.row(idx[r]);
    out.labels[r] = labels[idx[r]];
    out.groups[r] = groups[idx[r]];
  }
  out.partition = partition;
  out.column_names = column_names;
  out.num_groups = num_groups;
  return out;
}

Dataset Dataset::concat(const Dataset& other) const {
  if (other.dim() != dim()) throw DataError("concat: column count mismatch");
  Dataset out = *this;
  const int n = rows(), m = other.rows();
  out.features.conservativeResize(n + m, Eigen::NoChange);
  out.features.bottomRows(m) = other.features;
  out.labels.conservativeResize(n + m);
  out.labels.tail(m) = other.labels;
  out.groups.conservativeResize(n + m);
  out.groups.tail(m) = other.groups;
  out.num_groups = std::max(num_groups, other.num_groups);
  return out;
}

double Dataset::max_feature_range() const {
  if (rows() == 0) return 0.0;
  return (features.colwise().maxCoeff() - features.colwise().minCoeff()).maxCoeff();
}

void SyntheticConfig::validate() const {
  if (n_samples < 1) throw ConfigError("synthetic n_samples must be >= 1");
  auto prob_ok = [](double p) { return p > 0.0 && p < 1.0; };
  if (!prob_ok(p_z) || !prob_ok(p_y_given_z[0]) || !prob_ok(p_y_given_z[1]))
    throw ConfigError("synthetic probabilities must lie in (0,1)");
  for (const auto& v : cov_diag)
    if (!(v.minCoeff() > 0.0)) throw ConfigError("synthetic covariance diagonals must be > 0");
}

SyntheticConfig SyntheticConfig::paper_default() {
  SyntheticConfig c;
  c.means[0 * 2 + 0] = {-0.1, -0.2};
  c.means[0 * 2 + 1] = {-0.2, -0.3};
  c.means[1 * 2 + 0] = {0.1, 0.4};
  c.means[1 * 2 + 1] = {0.4, 0.3};
  c.cov_diag[0 * 2 + 0] = {0.4, 0.4};
  c.cov_diag[1 * 2 + 0] = {0.2, 0.2};
  c.cov_diag[0 * 2 + 1] = {0.2, 0.2};
  c.cov_diag[1 * 2 + 1] = {0.1, 0.1};
  return c;
}

SyntheticConfig SyntheticConfig::outlier_clean() {
  SyntheticConfig c;
  c.p_z = 0.5;
  c.p_y_given_z = {0.5, 0.5};
  c.means[0] = {1.0, -6.0};
  c.means[1] = {-1.0, -2.0};
  c.means[2] = {2.0, 1.5};
  c.means[3] = {1.0, 2.5};
  for (auto& v : c.cov_diag) v = {0.25, 0.25};
  return c;
}

SyntheticConfig SyntheticConfig::same_negative_rate() {
  SyntheticConfig c;
  c.p_z = 0.5;
  c.p_y_given_z = {0.5, 0.5};
  c.means[0] = {-2.0, -1.0};
  c.means[1] = {-1.0, -2.0};
  c.means[2] = {1.0, 2.0};
  c.means[3] = {2.0, 1.0};
  for (auto& v : c.cov_diag) v = {0.25, 0.25};
  return c;
}

SyntheticConfig SyntheticConfig::different_negative_rate() {
  SyntheticConfig c = same_negative_rate();
  c.p_y_given_z = {0.7, 0.3};
  return c;
}

namespace {

Dataset synthetic_shell(const SyntheticConfig& config, int n) {
  Dataset ds;
  const int d = config.group_as_feature ? 3 : 2;
  ds.features.resize(n, d);
  ds.labels.resize(n);
  ds.groups.resize(n);
  ds.column_names = {"x1", "x2"};
  ds.partition.improvable = {0, 1};
  if (config.group_as_feature) {
    ds.column_names.push_back("z");
    ds.partition.immutable = {2};
  }
  ds.num_groups = 2;
  return ds;
}

}  // namespace

Dataset generate_synthetic(const SyntheticConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(derive_seed(seed, streams::kData));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Dataset ds = synthetic_shell(config, config.n_samples);
  for (int i = 0; i < config.n_samples; ++i) {
    const int z = unif(rng) < config.p_z ? 1 : 0;
    const int y = unif(rng) < config.p_y_given_z[z] ? 1 : 0;
    const auto& mu = config.mean(y, z);
    const auto& var = config.var(y, z);
    for (int j = 0; j < 2; ++j) ds.features(i, j) = mu[j] + std::sqrt(var[j]) * normal(rng);
    if (config.group_as_feature) ds.features(i, 2) = z;
    ds.labels[i] = y;
    ds.groups[i] = z;
  }
  return ds;
}

Dataset add_outliers(const Dataset& clean, const SyntheticConfig& config, const OutlierSpec& spec,
                     std::uint64_t seed) {
  int in_group = 0;
  for (int i = 0; i < clean.rows(); ++i) in_group += clean.groups[i] == spec.group;
  const int k = static_cast<int>(std::lround(spec.fraction * in_group));
  if (k == 0) return clean;
  Rng rng(derive_seed(seed, 0x07e1e5ULL));
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset extra = synthetic_shell(config, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < 2; ++j)
      extra.features(i, j) = spec.mean[j] + std::sqrt(spec.cov_diag[j]) * normal(rng);
    if (config.group_as_feature) extra.features(i, 2) = spec.group;
    extra.labels[i] = spec.label;
    extra.groups[i] = spec.group;
  }
  return clean.concat(extra);
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double test_fraction, std::uint64_t seed) {
  const int n = dataset.rows();
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ConfigError("test_fraction must lie in (0,1)");
  if (n < 2) throw ConfigError("cannot split fewer than two rows");
  long test = std::lround(n * test_fraction);
  test = std::clamp<long>(test, 1, n - 1);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(derive_seed(seed, streams::kSplit));
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> test_idx(perm.begin(), perm.begin() + test);
  std::vector<int> train_idx(perm.begin() + test, perm.end());
  std::sort(test_idx.begin(), test_idx.end());
  std::sort(train_idx.begin(), train_idx.end());
  return {dataset.subset(train_idx), dataset.subset(test_idx)};
}

std::vector<std::vector<int>> kfold_indices(int n, int k, std::uint64_t seed) {
  if (k < 2 || n < k) throw ConfigError("k-fold needs 2 <= k <= n");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(derive_seed(seed, streams::kFolds));
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<int>> folds(k);
  for (int i = 0; i < n; ++i) folds[i % k].push_back(perm[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

bool GroupRule::holds(double v) const {
  if (op == ">=") return v >= threshold;
  if (op == ">") return v > threshold;
  if (op == "<=") return v <= threshold;
  if (op == "<") return v < threshold;
  return v == threshold;
}

GroupRule GroupRule::parse(const std::string& text) {
  for (const char* op : {">=", "<=", "==", ">", "<"}) {
    const auto pos = text.find(op);
    if (pos == std::string::npos) continue;
    GroupRule r;
    r.column = trim(text.substr(0, pos));
    r.op = op;
    r.threshold = parse_double(text.substr(pos + std::string(op).size()), "group_rule");
    if (r.column.empty()) break;
    return r;
  }
  throw ConfigError("group_rule must look like '<column> <op> <number>', got '" + text + "'");
}

SchemaConfig SchemaConfig::from_kv(const KvConfig& kv) {
  SchemaConfig s;
  s.label_column = kv.get("label_column");
  s.label_positive = kv.get_or("label_positive", "");
  s.group_column = kv.get_or("group_column", "");
  s.group_rule = kv.get_or("group_rule", "");
  if (s.group_column.empty() == s.group_rule.empty())
    throw ConfigError("schema needs exactly one of group_column / group_rule");
  s.group_as_feature = kv.get_bool_or("group_as_feature", false);
  s.feature_columns = kv.get_list("feature_columns");
  s.improvable_columns = kv.get_list("improvable_columns");
  s.manipulable_columns = kv.get_list("manipulable_columns");
  s.minmax_scale = kv.get_list("minmax_scale");
  for (const auto& [k, v] : kv.values()) {
    if (k.rfind("categorical.", 0) == 0) s.categorical.emplace_back(k.substr(12), split_list(v));
  }
  static const std::set<std::string> known = {
      "label_column", "label_positive", "group_column", "group_rule", "group_as_feature",
      "feature_columns", "improvable_columns", "manipulable_columns", "minmax_scale", "num_groups"};
  for (const auto& [k, v] : kv.values())
    if (!known.count(k) && k.rfind("categorical.", 0) != 0)
      throw ConfigError(kv.origin() + ": unknown schema key '" + k + "'");
  return s;
}

SchemaConfig SchemaConfig::load(const std::string& path) { return from_kv(KvConfig::load(path)); }

namespace {

std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cell));
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  out.push_back(trim(cell));
  return out;
}

std::string where(int row, const std::string& col) {
  return "row " + std::to_string(row) + ", column '" + col + "'";
}

}  // namespace

Dataset load_csv(const std::string& path, const SchemaConfig& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV file " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": missing header row");
  const auto header = parse_csv_line(line);
  std::map<std::string, int> col;
  for (int j = 0; j < static_cast<int>(header.size()); ++j) col[header[j]] = j;
  auto require = [&](const std::string& name) {
    auto it = col.find(name);
    if (it == col.end()) throw DataError(path + ": missing column '" + name + "'");
    return it->second;
  };

  const int label_col = require(schema.label_column);
  GroupRule rule;
  int group_col = -1;
  if (!schema.group_rule.empty()) {
    rule = GroupRule::parse(schema.group_rule);
    group_col = require(rule.column);
  } else {
    group_col = require(schema.group_column);
  }

  std::vector<std::string> features = schema.feature_columns;
  if (features.empty()) {
    for (const auto& h : header) {
      if (h == schema.label_column) continue;
      if (schema.group_rule.empty() && h == schema.group_column && !schema.group_as_feature) continue;
      features.push_back(h);
    }
  } else if (schema.group_as_feature && schema.group_rule.empty() &&
             std::find(features.begin(), features.end(), schema.group_column) == features.end()) {
    features.push_back(schema.group_column);
  }
  std::vector<int> feat_cols;
  for (const auto& f : features) feat_cols.push_back(require(f));

  std::map<std::string, std::map<std::string, int>> levels;
  for (const auto& [name, lv] : schema.categorical) {
    require(name);
    for (int k = 0; k < static_cast<int>(lv.size()); ++k) levels[name][lv[k]] = k + 1;
  }

  auto numeric = [&](const std::string& cell, int row, const std::string& name) {
    auto it = levels.find(name);
    if (it != levels.end()) {
      auto lv = it->second.find(cell);
      if (lv == it->second.end())
        throw DataError(path + ": " + where(row, name) + ": unknown category '" + cell + "'");
      return static_cast<double>(lv->second);
    }
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v))
      throw DataError(path + ": " + where(row, name) + ": non-numeric cell '" + cell + "'");
    return v;
  };

  std::vector<std::vector<double>> rows;
  std::vector<int> labels, groups;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = parse_csv_line(line);
    if (cells.size() != header.size())
      throw DataError(path + ": row " + std::to_string(row) + ": expected " +
                      std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
    std::vector<double> r;
    for (std::size_t k = 0; k < feat_cols.size(); ++k)
      r.push_back(numeric(cells[feat_cols[k]], row, features[k]));
    rows.push_back(std::move(r));

    const std::string& lab = cells[label_col];
    int y;
    if (!schema.label_positive.empty()) {
      y = lab == schema.label_positive ? 1 : 0;
    } else {
      const double v = numeric(lab, row, schema.label_column);
      if (v != 0.0 && v != 1.0)
        throw DataError(path + ": " + where(row, schema.label_column) + ": label must be 0 or 1");
      y = static_cast<int>(v);
    }
    labels.push_back(y);

    const double g = numeric(cells[group_col], row, header[group_col]);
    if (!schema.group_rule.empty()) {
      groups.push_back(rule.holds(g) ? 1 : 0);
    } else {
      if (g < 0 || g != std::floor(g))
        throw DataError(path + ": " + where(row, schema.group_column) + ": group must be a non-negative integer");
      groups.push_back(static_cast<int>(g));
    }
  }
  if (rows.empty()) throw DataError(path + ": no data rows");

  Dataset ds;
  const int n = static_cast<int>(rows.size()), d = static_cast<int>(features.size());
  ds.features.resize(n, d);
  ds.labels.resize(n);
  ds.groups.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) ds.features(i, j) = rows[i][j];
    ds.labels[i] = labels[i];
    ds.groups[i] = groups[i];
  }
  ds.num_groups = std::max(2, ds.groups.maxCoeff() + 1);
  ds.column_names = features;

  auto index_of = [&](const std::string& name) {
    auto it = std::find(features.begin(), features.end(), name);
    if (it == features.end()) throw ConfigError("schema column '" + name + "' is not a feature");
    return static_cast<int>(it - features.begin());
  };
  for (const auto& name : schema.minmax_scale) {
    const int j = index_of(name);
    const double lo = ds.features.col(j).minCoeff(), hi = ds.features.col(j).maxCoeff();
    if (hi > lo) ds.features.col(j) = (ds.features.col(j).array() - lo) / (hi - lo);
    else ds.features.col(j).setZero();
  }
  std::vector<int> used(d, 0);
  for (const auto& name : schema.improvable_columns) {
    const int j = index_of(name);
    ds.partition.improvable.push_back(j);
    used[j] = 1;
  }
  for (const auto& name : schema.manipulable_columns) {
    const int j = index_of(name);
    if (used[j]) throw ConfigError("column '" + name + "' listed twice in the partition");
    ds.partition.manipulable.push_back(j);
    used[j] = 1;
  }
  for (int j = 0; j < d; ++j)
    if (!used[j]) ds.partition.immutable.push_back(j);
  ds.validate();
  return ds;
}

void save_csv(const Dataset& dataset, const std::string& path) {
  std::vector<std::string> names = dataset.column_names;
  if (names.empty())
    for (int j = 0; j < dataset.dim(); ++j) names.push_back("x" + std::to_string(j));
  auto fresh = [&](std::string base) {
    while (std::find(names.begin(), names.end(), base) != names.end()) base += "_";
    return base;
  };
  const std::string label = fresh("label");
  const std::string group = fresh("group");

  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& n : names) out << n << ",";
  out << label << "," << group << "\n";
  for (int i = 0; i < dataset.rows(); ++i) {
    for (int j = 0; j < dataset.dim(); ++j) out << format_double(dataset.features(i, j)) << ",";
    out << dataset.labels[i] << "," << dataset.groups[i] << "\n";
  }

  auto join = [&](const std::vector<int>& idx) {
    std::string s;
    for (std::size_t k = 0; k < idx.size(); ++k) s += (k ? ", " : "") + names[idx[k]];
    return s;
  };
  std::ofstream schema(path + ".schema");
  if (!schema) throw DataError("cannot write " + path + ".schema");
  schema << "label_column = " << label << "\n"
         << "group_column = " << group << "\n"
         << "improvable_columns = " << join(dataset.partition.improvable) << "\n"
         << "manipulable_columns = " << join(dataset.partition.manipulable) << "\n";
}

}  // namespace improvkit
