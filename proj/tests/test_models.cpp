#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "improvkit/error.hpp"
#include "improvkit/models.hpp"

using namespace improvkit;

namespace {

Eigen::VectorXd random_vec(int d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = n(rng);
  return v;
}

// Central differences of f around x.
template <class F>
Eigen::VectorXd numeric_grad(F f, Eigen::VectorXd x, double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    const double keep = x(i);
    x(i) = keep + h;
    const double up = f(x);
    x(i) = keep - h;
    const double dn = f(x);
    x(i) = keep;
    g(i) = (up - dn) / (2 * h);
  }
  return g;
}

double rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(1e-8, std::max(a.norm(), b.norm()));
}

}  // namespace

TEST(Score, ZeroGlmIsHalfAndAccepted) {
  Scorer m = make_glm(3);
  EXPECT_DOUBLE_EQ(score(m, Eigen::Vector3d(1, -2, 5)), 0.5);
  EXPECT_TRUE(accepted(score(m, Eigen::Vector3d::Zero())));
}

TEST(Score, GlmHandValue) {
  GlmScorer g;
  g.weights = Eigen::Vector2d(1, 0);
  g.bias = 0;
  EXPECT_NEAR(score(Scorer(g), Eigen::Vector2d(std::log(3.0), 7)), 0.75, 1e-15);
}

TEST(Score, ZeroMlpIsHalf) {
  Scorer m = zero_mlp(4, {5, 3});
  std::mt19937_64 rng(1);
  for (int k = 0; k < 5; ++k) EXPECT_DOUBLE_EQ(score(m, random_vec(4, rng)), 0.5);
  EXPECT_TRUE(grad_score_wrt_input(m, random_vec(4, rng)).isZero());
}

TEST(Score, DimensionMismatch) {
  Scorer m = make_glm(3);
  EXPECT_THROW(score(m, Eigen::Vector2d(1, 2)), PreconditionError);
  Scorer n = make_mlp(3, {4}, 0);
  EXPECT_THROW(score(n, Eigen::Vector2d(1, 2)), PreconditionError);
}

TEST(Score, StrictlyInsideUnitIntervalAndMonotone) {
  GlmScorer g;
  g.weights = Eigen::Vector2d(2, -1);
  g.bias = 0.3;
  Scorer m = g;
  double prev = 0.0;
  for (double t = -3; t <= 3; t += 0.25) {
    const double s = score(m, t * g.weights);
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
    EXPECT_GT(s, prev);
    prev = s;
  }
}

TEST(Score, BatchedMatchesPerRow) {
  std::mt19937_64 rng(4);
  Scorer m = make_mlp(3, {4, 2}, 9);
  Eigen::MatrixXd X(6, 3);
  for (int i = 0; i < 6; ++i) X.row(i) = random_vec(3, rng).transpose();
  const Eigen::VectorXd s = scores(m, X);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(s(i), score(m, X.row(i).transpose()), 1e-15);
}

TEST(Loss, HandValues) {
  EXPECT_NEAR(loss(1, 0.5), std::log(2.0), 1e-15);
  EXPECT_NEAR(loss(0, 0.5), std::log(2.0), 1e-15);
  EXPECT_NEAR(loss(1, 0.9), 0.10536051565782628, 1e-12);
  EXPECT_NEAR(loss(1, 0.0), -std::log(kLossClamp), 1e-9);
  EXPECT_TRUE(std::isfinite(loss(0, 1.0)));
  EXPECT_DOUBLE_EQ(loss_grad_logit(1, 0.0), 0.0);
  EXPECT_NEAR(loss_grad_logit(1, 0.3), 0.3 - 1.0, 1e-15);
}

TEST(InputGrad, GlmHandValue) {
  GlmScorer g;
  g.weights = Eigen::Vector2d(2, -1);
  const Eigen::VectorXd gr = grad_score_wrt_input(Scorer(g), Eigen::Vector2d::Zero());
  EXPECT_NEAR(gr(0), 0.5, 1e-15);
  EXPECT_NEAR(gr(1), -0.25, 1e-15);
}

TEST(InputGrad, FiniteDifferences) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    Scorer m = trial % 2 ? Scorer(make_mlp(4, {6, 3}, trial)) : Scorer(make_glm(4));
    if (trial % 2 == 0) set_params(m, random_vec(5, rng));
    const Eigen::VectorXd x = random_vec(4, rng);
    const Eigen::VectorXd g = grad_score_wrt_input(m, x);
    const Eigen::VectorXd n = numeric_grad([&](const Eigen::VectorXd& v) { return score(m, v); }, x);
    EXPECT_LE(rel_err(g, n), 1e-4) << trial;
  }
}

TEST(ParamGrad, LogitFiniteDifferences) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Scorer m = trial % 2 ? Scorer(make_mlp(3, {5}, trial)) : Scorer(make_glm(3));
    Eigen::VectorXd theta = get_params(m);
    theta = random_vec(static_cast<int>(theta.size()), rng);
    set_params(m, theta);
    const Eigen::VectorXd x = random_vec(3, rng);
    Eigen::VectorXd g;
    logit_param_grad(m, x, g);
    const Eigen::VectorXd n = numeric_grad(
        [&](const Eigen::VectorXd& t) {
          Scorer c = m;
          set_params(c, t);
          return logit(c, x);
        },
        theta);
    EXPECT_LE(rel_err(g, n), 1e-6) << trial;
  }
}

TEST(ParamGrad, ErmSingleSampleMatchesHandFormula) {
  GlmScorer g;
  g.weights = Eigen::Vector3d(0.3, -0.2, 0.1);
  g.bias = -0.4;
  const Scorer m = g;
  const Eigen::Vector3d x(1.5, -0.5, 1.0);
  const int y = 1;
  const double s = score(m, x);
  Eigen::VectorXd dlogit;
  logit_param_grad(m, x, dlogit);
  const Eigen::VectorXd grad = loss_grad_logit(y, s) * dlogit;
  Eigen::VectorXd hand(4);
  hand << (s - y) * x, s - y;
  EXPECT_LE((grad - hand).norm(), 1e-14);
}

TEST(Params, RoundTripAndCounts) {
  MlpScorer n = make_mlp(3, {4, 2}, 5);
  EXPECT_EQ(num_params(Scorer(n)), 3 * 4 + 4 + 4 * 2 + 2 + 2 * 1 + 1);
  Scorer m = n;
  const Eigen::VectorXd t = get_params(m);
  Scorer c = zero_mlp(3, {4, 2});
  set_params(c, t);
  EXPECT_EQ(get_params(c), t);
  EXPECT_THROW(set_params(c, Eigen::VectorXd::Zero(3)), PreconditionError);
  EXPECT_EQ(input_dim(m), 3);
}

TEST(Params, MlpInitWithinFanInBound) {
  const MlpScorer n = make_mlp(9, {4}, 1);
  EXPECT_LE(n.weights[0].cwiseAbs().maxCoeff(), 1.0 / 3.0);
  EXPECT_LE(n.weights[1].cwiseAbs().maxCoeff(), 0.5);
  EXPECT_FALSE(n.weights[0].isZero());
  EXPECT_EQ(get_params(Scorer(make_mlp(9, {4}, 1))), get_params(Scorer(n)));
}
