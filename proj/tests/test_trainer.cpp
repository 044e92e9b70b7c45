#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "improvkit/error.hpp"
#include "improvkit/trainer.hpp"

using namespace improvkit;

namespace {

Dataset synth(int n, std::uint64_t seed) {
  SyntheticConfig c = SyntheticConfig::paper_default();
  c.n_samples = n;
  return generate_synthetic(c, seed);
}

TrainConfig quick(PenaltyTag t = PenaltyTag::None, double lambda = 0.0) {
  TrainConfig c;
  c.penalty.tag = t;
  c.lambda = lambda;
  c.epochs = 40;
  c.seed = 3;
  return c;
}

}  // namespace

TEST(Config, KvRoundTripAndValidation) {
  TrainConfig c = quick(PenaltyTag::EiKde, 0.4);
  c.model = ModelKind::Mlp;
  c.hidden = {6, 3};
  c.penalty.kde_bandwidth = 0.05;
  c.budget.norm = NormKind::L2Weighted;
  c.budget.delta = 0.7;
  c.batch_size = 64;
  c.optimizer = OptimizerKind::PlainSgd;
  c.pgd.steps = 9;
  const TrainConfig back = TrainConfig::from_kv(c.to_kv());
  EXPECT_EQ(back.to_kv().dump(), c.to_kv().dump());
  EXPECT_EQ(back.hidden, c.hidden);
  EXPECT_EQ(back.budget.norm, NormKind::L2Weighted);

  TrainConfig bad = quick();
  bad.lambda = 1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  EXPECT_THROW(parse_model_kind("svm"), ConfigError);
  EXPECT_THROW(TrainConfig::from_kv(KvConfig::parse("lamda = 0.3\n")), ConfigError);
}

TEST(Train, DeterministicSerialization) {
  const Dataset ds = synth(800, 1);
  const TrainConfig c = quick(PenaltyTag::EiLoss, 0.5);
  EXPECT_EQ(serialize_model(train(ds, c)), serialize_model(train(ds, c)));
  TrainConfig mlp = c;
  mlp.model = ModelKind::Mlp;
  mlp.epochs = 10;
  EXPECT_EQ(serialize_model(train(ds, mlp)), serialize_model(train(ds, mlp)));
}

TEST(Train, ObjectiveDecreases) {
  const Dataset ds = synth(1000, 2);
  for (auto t : {PenaltyTag::None, PenaltyTag::EiCov, PenaltyTag::EiKde, PenaltyTag::EiLoss, PenaltyTag::BeLoss}) {
    const TrainedModel m = train(ds, quick(t, t == PenaltyTag::None ? 0.0 : 0.5));
    ASSERT_EQ(m.history.size(), 40u);
    EXPECT_LE(m.history.back().objective, m.history.front().objective + 1e-6) << to_string(t);
  }
}

TEST(Train, ZeroLambdaGradientIsErmGradient) {
  const Dataset ds = synth(300, 4);
  const Scorer m = initial_scorer(quick(), ds.dim());
  const ObjectiveValue a = objective_and_gradient(m, ds, {}, quick(PenaltyTag::EiLoss, 0.0));
  const ObjectiveValue b = objective_and_gradient(m, ds, {}, quick());
  EXPECT_EQ(a.grad, b.grad);
  EXPECT_DOUBLE_EQ(a.penalty, 0.0);
  // Hand ERM gradient for the GLM.
  Eigen::VectorXd hand = Eigen::VectorXd::Zero(ds.dim() + 1);
  for (int i = 0; i < ds.rows(); ++i) {
    const double r = score(m, ds.row(i)) - ds.labels(i);
    hand.head(ds.dim()) += r * ds.row(i) / ds.rows();
    hand(ds.dim()) += r / ds.rows();
  }
  EXPECT_LE((a.grad - hand).norm(), 1e-12);
}

TEST(Train, DanskinLineProbe) {
  const Dataset ds = synth(500, 5);
  for (auto t : {PenaltyTag::EiCov, PenaltyTag::EiKde, PenaltyTag::EiLoss, PenaltyTag::BeLoss}) {
    const TrainConfig c = quick(t, 0.6);
    Scorer m = train(ds, quick()).scorer;  // a non-trivial starting point
    const ObjectiveValue v = objective_and_gradient(m, ds, {}, c);
    const Eigen::VectorXd theta = get_params(m);
    for (double lr : {1e-3, 1e-4}) {
      Scorer probe = m;
      set_params(probe, theta - lr * v.grad);
      EXPECT_LT(objective_and_gradient(probe, ds, {}, c).objective, v.objective) << to_string(t) << " lr " << lr;
    }
  }
}

TEST(Model, SerializeRoundTrip) {
  const Dataset ds = synth(400, 6);
  TrainConfig c = quick(PenaltyTag::EiKde, 0.3);
  c.model = ModelKind::Mlp;
  c.hidden = {5};
  c.epochs = 5;
  const TrainedModel m = train(ds, c);
  const std::string text = serialize_model(m);
  const TrainedModel back = parse_model(text);
  EXPECT_EQ(serialize_model(back), text);
  EXPECT_EQ(get_params(back.scorer), get_params(m.scorer));
  EXPECT_EQ(back.partition.improvable, m.partition.improvable);
  EXPECT_DOUBLE_EQ(back.config.budget.delta, c.budget.delta);
  EXPECT_THROW(parse_model("kind = glm\n"), DataError);
  EXPECT_THROW(load_model("/nonexistent/model.txt"), DataError);
}

TEST(Cv, StageTwoGrid) {
  EXPECT_EQ(stage2_grid(0.4), (std::vector<double>{0.3, 0.35, 0.4, 0.45, 0.5}));
  EXPECT_EQ(stage2_grid(0.0), (std::vector<double>{0.0, 0.05, 0.1}));
  const auto top = stage2_grid(0.9);
  EXPECT_LT(top.back(), 1.0);
  EXPECT_EQ(top.size(), 4u);
}

TEST(Cv, SelectLambdaRule) {
  std::vector<CvScore> c(4);
  c[0] = {1, 0.0, 0.20, 0.10, 5};
  c[1] = {1, 0.2, 0.22, 0.03, 5};
  c[2] = {1, 0.4, 0.24, 0.03, 5};
  c[3] = {1, 0.6, 0.30, 0.00, 5};
  // 0.6 violates the error cap; 0.2 and 0.4 tie on EI, smaller lambda wins.
  EXPECT_EQ(select_lambda(c, 0.20, 0.05), 1u);
  EXPECT_EQ(select_lambda(c, 0.20, 0.20), 3u);
}

TEST(Cv, RunsAndSelectsFromGrid) {
  const Dataset ds = synth(600, 7);
  CvOptions o;
  o.folds = 3;
  o.stage1 = {0.0, 0.5};
  const CvResult r = cross_validate(ds, quick(PenaltyTag::EiLoss), o);
  bool found = false;
  for (const auto& s : r.scores) found |= s.lambda == r.best_lambda;
  EXPECT_TRUE(found);
  EXPECT_GE(r.best_lambda, 0.0);
  EXPECT_LT(r.best_lambda, 1.0);
  CvOptions bad = o;
  bad.folds = 1;
  EXPECT_THROW(cross_validate(ds, quick(PenaltyTag::EiLoss), bad), ConfigError);
}

TEST(Pareto, FrontierIsAntichain) {
  const std::vector<std::pair<double, double>> pts{{0.2, 0.1}, {0.25, 0.05}, {0.3, 0.06}, {0.2, 0.12}, {0.4, 0.0}};
  const auto f = pareto_frontier(pts);
  EXPECT_EQ(f, (std::vector<std::size_t>{0, 1, 4}));
  for (auto i : f)
    for (auto j : f) {
      if (i == j) continue;
      const bool dom = pts[j].first <= pts[i].first && pts[j].second <= pts[i].second && pts[j] != pts[i];
      EXPECT_FALSE(dom);
    }
}

TEST(Pareto, SweepRecordsAllRunsAndZeroLambdaAnchors) {
  const Dataset ds = synth(1500, 8);
  const SweepResult r = pareto_sweep(ds, quick(PenaltyTag::EiLoss), {0.0, 0.5, 0.9}, {0, 1});
  EXPECT_EQ(r.rows.size(), 12u);  // train and test per run
  // Each seed has its own split, so anchor on the lambda = 0 run of the same seed.
  std::map<std::uint64_t, double> zero_err;
  for (const auto& row : r.rows)
    if (row.split == "test" && row.lambda == 0.0) zero_err[row.seed] = row.report.error_rate;
  for (auto i : r.frontier) {
    EXPECT_EQ(r.rows[i].split, "test");
    EXPECT_GE(r.rows[i].report.error_rate, zero_err.at(r.rows[i].seed) - 0.005);
  }
  const std::string csv = sweep_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "lambda,seed,split,error,ei,dp,eo,eod,be,er");
}
