#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "improvkit/kv_config.hpp"

namespace improvkit {

// Column indices split into improvable (x_I), manipulable (x_M) and immutable (x_IM).
struct FeaturePartition {
  std::vector<int> improvable;
  std::vector<int> manipulable;
  std::vector<int> immutable;

  // Throws DataError unless the lists are disjoint and cover 0..d-1.
  void validate(int d) const;
  static FeaturePartition all_improvable(int d);
};

struct Dataset {
  Eigen::MatrixXd features;  // N x d
  Eigen::VectorXi labels;    // 0/1
  Eigen::VectorXi groups;    // 0..num_groups-1
  FeaturePartition partition;
  std::vector<std::string> column_names;
  int num_groups = 2;

  int rows() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
  Eigen::VectorXd row(int i) const { return features.row(i).transpose(); }

  void validate() const;
  Dataset subset(const std::vector<int>& rows) const;
  // Row-wise concatenation; column layout must match.
  Dataset concat(const Dataset& other) const;
  // Largest per-column (max - min); 0 for an empty dataset.
  double max_feature_range() const;
};

// Two-group, two-label Gaussian cluster family. Cluster index is y*2 + z.
struct SyntheticConfig {
  int n_samples = 20000;
  double p_z = 0.4;
  std::array<double, 2> p_y_given_z{0.3, 0.5};
  std::array<Eigen::Vector2d, 4> means;
  std::array<Eigen::Vector2d, 4> cov_diag;  // variances, not standard deviations
  // Append z as an immutable third column.
  bool group_as_feature = true;

  const Eigen::Vector2d& mean(int y, int z) const { return means[y * 2 + z]; }
  const Eigen::Vector2d& var(int y, int z) const { return cov_diag[y * 2 + z]; }
  void validate() const;

  static SyntheticConfig paper_default();
  // Robustness scenarios: clean two-cluster data for the outlier study, and the
  // same / different negative rate pair.
  static SyntheticConfig outlier_clean();
  static SyntheticConfig same_negative_rate();
  static SyntheticConfig different_negative_rate();
};

Dataset generate_synthetic(const SyntheticConfig& config, std::uint64_t seed);

struct OutlierSpec {
  double fraction = 0.05;  // relative to the current size of `group`
  int group = 0;
  int label = 0;
  Eigen::Vector2d mean{-1.0, -20.0};
  Eigen::Vector2d cov_diag{0.05, 0.05};
};

// Appends round(fraction * n_group) outlier rows. Layout follows `config`.
Dataset add_outliers(const Dataset& clean, const SyntheticConfig& config, const OutlierSpec& spec,
                     std::uint64_t seed);

// Test rows = round(N * test_fraction) clamped to [1, N-1]. Returns (train, test).
std::pair<Dataset, Dataset> split(const Dataset& dataset, double test_fraction, std::uint64_t seed);

// k roughly equal folds of a seeded permutation of 0..n-1.
std::vector<std::vector<int>> kfold_indices(int n, int k, std::uint64_t seed);

struct GroupRule {
  std::string column;
  std::string op;  // one of >=, >, <=, <, ==
  double threshold = 0.0;
  bool holds(double v) const;
  static GroupRule parse(const std::string& text);
};

// Schema for CSV ingestion; see README for the file format.
struct SchemaConfig {
  std::string label_column;
  std::string label_positive;  // when set, y = 1{cell == label_positive}
  std::string group_column;    // direct integer column, or
  std::string group_rule;      // e.g. "age >= 30"
  bool group_as_feature = false;
  std::vector<std::string> feature_columns;  // empty: every remaining column
  std::vector<std::string> improvable_columns;
  std::vector<std::string> manipulable_columns;
  std::vector<std::pair<std::string, std::vector<std::string>>> categorical;
  std::vector<std::string> minmax_scale;

  static SchemaConfig load(const std::string& path);
  static SchemaConfig from_kv(const KvConfig& kv);
};

Dataset load_csv(const std::string& path, const SchemaConfig& schema);

// Writes `path` plus the sidecar schema `path + ".schema"`.
void save_csv(const Dataset& dataset, const std::string& path);

}  // namespace improvkit
