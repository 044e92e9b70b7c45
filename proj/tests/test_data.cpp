#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "improvkit/data.hpp"
#include "improvkit/error.hpp"

using namespace improvkit;

namespace {

std::string temp_path(const std::string& name) { return testing::TempDir() + "/improvkit_" + name; }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream o(path);
  o << text;
}

bool same_data(const Dataset& a, const Dataset& b) {
  return a.features == b.features && a.labels == b.labels && a.groups == b.groups;
}

}  // namespace

TEST(Partition, ValidateRequiresExactCover) {
  FeaturePartition p{{0, 1}, {}, {2}};
  EXPECT_NO_THROW(p.validate(3));
  EXPECT_THROW(p.validate(4), DataError);
  FeaturePartition overlap{{0, 1}, {1}, {2}};
  EXPECT_THROW(overlap.validate(3), DataError);
  EXPECT_EQ(FeaturePartition::all_improvable(3).improvable.size(), 3u);
}

TEST(Synthetic, DefaultFamilyGroupFraction) {
  const Dataset ds = generate_synthetic(SyntheticConfig::paper_default(), 11);
  EXPECT_EQ(ds.rows(), 20000);
  EXPECT_EQ(ds.dim(), 3);
  const double frac = ds.groups.cast<double>().mean();
  EXPECT_NEAR(frac, 0.40, 0.02);
  // Both continuous features improvable, z immutable.
  EXPECT_EQ(ds.partition.improvable, (std::vector<int>{0, 1}));
  EXPECT_EQ(ds.partition.immutable, (std::vector<int>{2}));
  for (int i = 0; i < ds.rows(); ++i) ASSERT_EQ(ds.features(i, 2), ds.groups(i));
}

TEST(Synthetic, ZeroSamplesIsConfigError) {
  SyntheticConfig c = SyntheticConfig::paper_default();
  c.n_samples = 0;
  EXPECT_THROW(generate_synthetic(c, 0), ConfigError);
  c = SyntheticConfig::paper_default();
  c.p_z = 1.0;
  EXPECT_THROW(generate_synthetic(c, 0), ConfigError);
  c = SyntheticConfig::paper_default();
  c.cov_diag[0] = {0.0, 0.4};
  EXPECT_THROW(generate_synthetic(c, 0), ConfigError);
}

TEST(Synthetic, Deterministic) {
  const auto c = SyntheticConfig::paper_default();
  EXPECT_TRUE(same_data(generate_synthetic(c, 5), generate_synthetic(c, 5)));
  EXPECT_FALSE(same_data(generate_synthetic(c, 5), generate_synthetic(c, 6)));
}

TEST(Synthetic, ClusterMeansConverge) {
  SyntheticConfig c = SyntheticConfig::paper_default();
  c.n_samples = 200000;
  const Dataset ds = generate_synthetic(c, 3);
  for (int y = 0; y < 2; ++y) {
    for (int z = 0; z < 2; ++z) {
      Eigen::Vector2d sum = Eigen::Vector2d::Zero();
      int n = 0;
      for (int i = 0; i < ds.rows(); ++i) {
        if (ds.labels(i) != y || ds.groups(i) != z) continue;
        sum += ds.features.row(i).head<2>().transpose();
        ++n;
      }
      ASSERT_GT(n, 0);
      const Eigen::Vector2d mean = sum / n;
      for (int k = 0; k < 2; ++k)
        EXPECT_LE(std::abs(mean[k] - c.mean(y, z)[k]), 3 * std::sqrt(c.var(y, z)[k] / n)) << y << z << k;
    }
  }
}

TEST(Synthetic, WithoutGroupFeature) {
  SyntheticConfig c = SyntheticConfig::paper_default();
  c.group_as_feature = false;
  c.n_samples = 100;
  const Dataset ds = generate_synthetic(c, 1);
  EXPECT_EQ(ds.dim(), 2);
  EXPECT_TRUE(ds.partition.immutable.empty());
}

TEST(Outliers, AppendedToRequestedGroup) {
  SyntheticConfig c = SyntheticConfig::outlier_clean();
  c.n_samples = 2000;
  const Dataset clean = generate_synthetic(c, 2);
  const int n0 = static_cast<int>((clean.groups.array() == 0).count());
  const Dataset dirty = add_outliers(clean, c, OutlierSpec{}, 9);
  const int added = dirty.rows() - clean.rows();
  EXPECT_EQ(added, static_cast<int>(std::lround(0.05 * n0)));
  for (int i = clean.rows(); i < dirty.rows(); ++i) {
    EXPECT_EQ(dirty.groups(i), 0);
    EXPECT_EQ(dirty.labels(i), 0);
    EXPECT_LT(dirty.features(i, 1), -15.0);
  }
}

TEST(Split, SizesFollowRoundingRule) {
  SyntheticConfig c = SyntheticConfig::paper_default();
  c.n_samples = 1000;
  const Dataset ds = generate_synthetic(c, 0);
  auto [tr, te] = split(ds, 0.2, 1);
  EXPECT_EQ(tr.rows(), 800);
  EXPECT_EQ(te.rows(), 200);

  c.n_samples = 2;
  const Dataset tiny = generate_synthetic(c, 0);
  auto [a, b] = split(tiny, 0.999, 1);
  EXPECT_EQ(a.rows(), 1);
  EXPECT_EQ(b.rows(), 1);

  c.n_samples = 1;
  EXPECT_THROW(split(generate_synthetic(c, 0), 0.5, 1), ConfigError);
  EXPECT_THROW(split(ds, 0.0, 1), ConfigError);
}

TEST(Split, PartitionOfRowsAndDeterministic) {
  SyntheticConfig c = SyntheticConfig::paper_default();
  c.n_samples = 500;
  const Dataset ds = generate_synthetic(c, 4);
  auto [tr, te] = split(ds, 0.3, 8);
  auto [tr2, te2] = split(ds, 0.3, 8);
  EXPECT_TRUE(same_data(tr, tr2));
  EXPECT_TRUE(same_data(te, te2));
  // Multiset of rows preserved: the synthetic rows are distinct, so compare as sets.
  std::multiset<std::vector<double>> all, parts;
  for (int i = 0; i < ds.rows(); ++i) all.insert({ds.features(i, 0), ds.features(i, 1), double(ds.labels(i))});
  for (const Dataset* d : {&tr, &te})
    for (int i = 0; i < d->rows(); ++i)
      parts.insert({d->features(i, 0), d->features(i, 1), double(d->labels(i))});
  EXPECT_EQ(all, parts);
}

TEST(Folds, CoverEveryIndexOnce) {
  const auto folds = kfold_indices(23, 5, 3);
  ASSERT_EQ(folds.size(), 5u);
  std::set<int> seen;
  for (const auto& f : folds) {
    EXPECT_GE(f.size(), 4u);
    EXPECT_LE(f.size(), 5u);
    for (int i : f) EXPECT_TRUE(seen.insert(i).second);
  }
  EXPECT_EQ(seen.size(), 23u);
}

TEST(GroupRule, ParseAndApply) {
  const GroupRule r = GroupRule::parse("age >= 30");
  EXPECT_EQ(r.column, "age");
  EXPECT_TRUE(r.holds(30));
  EXPECT_FALSE(r.holds(29.9));
  EXPECT_THROW(GroupRule::parse("age ~ 3"), ConfigError);
}

TEST(Csv, GroupRuleAndOrdinalLevels) {
  const std::string csv = temp_path("credit.csv");
  write_text(csv,
             "age,occupation,label\n"
             "25,unskilled,0\n"
             "30,skilled,1\n"
             "41,highly_qualified,1\n"
             "19,unemployed,0\n");
  const std::string schema = temp_path("credit.schema");
  write_text(schema,
             "label_column = label\n"
             "group_rule = age >= 30\n"
             "improvable_columns = occupation\n"
             "categorical.occupation = unemployed, unskilled, skilled, highly_qualified\n");
  const Dataset ds = load_csv(csv, SchemaConfig::load(schema));
  EXPECT_EQ(ds.rows(), 4);
  EXPECT_EQ(ds.groups, (Eigen::VectorXi(4) << 0, 1, 1, 0).finished());
  EXPECT_EQ(ds.labels, (Eigen::VectorXi(4) << 0, 1, 1, 0).finished());
  const int occ = static_cast<int>(std::find(ds.column_names.begin(), ds.column_names.end(), "occupation") -
                                   ds.column_names.begin());
  ASSERT_LT(occ, ds.dim());
  EXPECT_EQ(ds.features.col(occ), (Eigen::VectorXd(4) << 2, 3, 4, 1).finished());
  EXPECT_EQ(ds.partition.improvable, std::vector<int>{occ});
}

TEST(Csv, IngestionErrorsNameTheProblem) {
  const std::string schema = temp_path("e.schema");
  write_text(schema, "label_column = label\ngroup_column = g\nimprovable_columns = x\n");
  const std::string missing = temp_path("missing_label.csv");
  write_text(missing, "x,g\n1,0\n2,1\n");
  EXPECT_THROW(load_csv(missing, SchemaConfig::load(schema)), DataError);

  const std::string bad = temp_path("bad_cell.csv");
  write_text(bad, "x,g,label\n1,0,1\nabc,1,0\n");
  try {
    load_csv(bad, SchemaConfig::load(schema));
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("column 'x'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("row "), std::string::npos) << msg;
  }

  const std::string cat_schema = temp_path("c.schema");
  write_text(cat_schema,
             "label_column = label\ngroup_column = g\nimprovable_columns = x\ncategorical.x = lo, hi\n");
  const std::string unknown = temp_path("unknown_level.csv");
  write_text(unknown, "x,g,label\nlo,0,1\nmid,1,0\n");
  EXPECT_THROW(load_csv(unknown, SchemaConfig::load(cat_schema)), DataError);
  EXPECT_THROW(load_csv(temp_path("does_not_exist.csv"), SchemaConfig::load(schema)), DataError);
}

TEST(Csv, UnknownSchemaKeyIsConfigError) {
  EXPECT_THROW(SchemaConfig::from_kv(KvConfig::parse("label_column = y\nlabel_colum = y\ngroup_column = g\n")),
               ConfigError);
}

TEST(Csv, RoundTripIsIdempotent) {
  SyntheticConfig c = SyntheticConfig::paper_default();
  c.n_samples = 300;
  const Dataset ds = generate_synthetic(c, 7);
  const std::string p1 = temp_path("rt1.csv"), p2 = temp_path("rt2.csv");
  save_csv(ds, p1);
  const Dataset a = load_csv(p1, SchemaConfig::load(p1 + ".schema"));
  save_csv(a, p2);
  const Dataset b = load_csv(p2, SchemaConfig::load(p2 + ".schema"));
  EXPECT_TRUE(same_data(ds, a));
  EXPECT_TRUE(same_data(a, b));
  EXPECT_EQ(a.partition.improvable, ds.partition.improvable);
}

TEST(Csv, MinMaxScaling) {
  const std::string csv = temp_path("scale.csv");
  write_text(csv, "x,g,label\n2,0,1\n4,1,0\n6,1,1\n");
  const std::string schema = temp_path("scale.schema");
  write_text(schema, "label_column = label\ngroup_column = g\nimprovable_columns = x\nminmax_scale = x\n");
  const Dataset ds = load_csv(csv, SchemaConfig::load(schema));
  EXPECT_EQ(ds.features.col(0), (Eigen::VectorXd(3) << 0, 0.5, 1).finished());
}

TEST(DatasetOps, SubsetConcatRange) {
  SyntheticConfig c = SyntheticConfig::paper_default();
  c.n_samples = 50;
  const Dataset ds = generate_synthetic(c, 1);
  const Dataset a = ds.subset({0, 1, 2});
  const Dataset b = ds.subset({3, 4});
  const Dataset ab = a.concat(b);
  EXPECT_TRUE(same_data(ab, ds.subset({0, 1, 2, 3, 4})));
  EXPECT_GT(ds.max_feature_range(), 0.0);
}
