#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "improvkit/dynamics.hpp"
#include "improvkit/gaussian.hpp"

using namespace improvkit;
using namespace improvkit::dynamics;

namespace {

GroupGaussianState state(double m0, double s0, double m1, double s1) {
  GroupGaussianState s;
  s.mu = {m0, m1};
  s.sigma = {s0, s1};
  return s;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST(Chi, Quantiles) {
  EXPECT_NEAR(accept_threshold_chi(state(0, 1, 0, 1), 0.5), 0.0, 1e-9);
  EXPECT_NEAR(accept_threshold_chi(state(0, 1, 0, 1), 0.2), 0.8416212335729143, 1e-9);
}

TEST(Chi, MixtureMonteCarlo) {
  const GroupGaussianState s = state(0, 1, 1, 0.5);
  const double chi = accept_threshold_chi(s, 0.2);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 1);
  const int draws = 2'000'000;
  int above = 0;
  for (int i = 0; i < draws; ++i) {
    const int z = i & 1;
    above += s.mu[z] + s.sigma[z] * n(rng) >= chi;
  }
  // 3 standard errors of the acceptance fraction.
  EXPECT_NEAR(static_cast<double>(above) / draws, 0.2, 3 * std::sqrt(0.16 / draws));
}

TEST(Effort, HandValues) {
  EXPECT_DOUBLE_EQ(effort_nu(1.0, 0.5, 0.25, EffortModel::InverseSquare), 0.0);
  EXPECT_DOUBLE_EQ(effort_nu(-0.75, 0.0, 0.25, EffortModel::InverseSquare), 1.0);
  EXPECT_DOUBLE_EQ(effort_nu(-2.0, 0.0, 0.25, EffortModel::LogCapped), 0.0);
  EXPECT_NEAR(effort_nu(-0.25, 0.0, 0.25, EffortModel::LogCapped), std::log(4.0), 1e-15);
  double prev = 0.0;
  for (double x = -5; x < 0; x += 0.1) {
    const double v = effort_nu(x, 0.0, 0.25, EffortModel::InverseSquare);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(Step, NoEffortKeepsState) {
  const GroupGaussianState s = state(0.3, 1.2, -0.4, 0.7);
  const GroupGaussianState n = step_distribution(s, {-kInf, -kInf}, 0.25, EffortModel::InverseSquare);
  for (int z = 0; z < 2; ++z) {
    EXPECT_NEAR(n.mu[z], s.mu[z], 1e-8);
    EXPECT_NEAR(n.sigma[z], s.sigma[z], 1e-7);
  }
  EXPECT_DOUBLE_EQ(mean_effort_delta_t(s, {-kInf, -kInf}, 0.25, EffortModel::InverseSquare), 0.0);
}

TEST(Step, SymmetricGroupsUpdateIdentically) {
  const GroupGaussianState s = state(0.1, 0.8, 0.1, 0.8);
  const GroupGaussianState n = step_distribution(s, {0.5, 0.5}, 0.25, EffortModel::InverseSquare);
  EXPECT_DOUBLE_EQ(n.mu[0], n.mu[1]);
  EXPECT_DOUBLE_EQ(n.sigma[0], n.sigma[1]);
  EXPECT_GE(n.mu[0], s.mu[0]);
  EXPECT_NEAR(mean_effort_delta_t(s, {0.5, 0.5}, 0.25, EffortModel::InverseSquare),
              group_mean_effort(0.1, 0.8, 0.5, 0.25, EffortModel::InverseSquare), 1e-12);
}

TEST(Step, MatchesMonteCarlo) {
  const double mu = 0.0, sigma = 1.0, tau = 0.8, beta = 0.25;
  const GroupGaussianState n = step_distribution(state(mu, sigma, mu, sigma), {tau, tau}, beta, EffortModel::InverseSquare);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(mu, sigma);
  const int draws = 2'000'000;
  double sum = 0, sq = 0;
  for (int i = 0; i < draws; ++i) {
    const double x = g(rng);
    const double v = x + effort_nu(x, tau, beta, EffortModel::InverseSquare);
    sum += v;
    sq += v * v;
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sq / draws - mean * mean) / draws);
  EXPECT_NEAR(n.mu[0], mean, 3 * se);
}

TEST(Disparity, IdenticalGroupsZeroForEveryPolicy) {
  const GroupGaussianState s = state(0.2, 1.1, 0.2, 1.1);
  for (auto p : {Policy::Dp, Policy::Be, Policy::Er, Policy::Ei, Policy::Ilfcr})
    EXPECT_NEAR(policy_disparity(p, s, {0.4, 0.4}, 0.3), 0.0, 1e-9) << to_string(p);
  EXPECT_THROW(policy_disparity(Policy::Erm, s, {0.4, 0.4}, 0.3), PreconditionError);
}

TEST(Disparity, EqualSigmaEiShift) {
  const GroupGaussianState s = state(0.0, 0.8, 0.7, 0.8);
  EXPECT_NEAR(policy_disparity(Policy::Ei, s, {0.5, 1.2}, 0.3), 0.0, 1e-12);
  EXPECT_GT(policy_disparity(Policy::Ei, s, {0.5, 1.0}, 0.3), 1e-3);
}

TEST(Disparity, ErMatchesMonteCarlo) {
  // Group mean recourse tau - x over rejected samples.
  const GroupGaussianState s = state(0.0, 1.0, 0.5, 0.6);
  const ThresholdPair t{0.4, 0.9};
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 1);
  double mean[2];
  double se = 0.0;
  for (int z = 0; z < 2; ++z) {
    double sum = 0, sq = 0;
    int k = 0;
    for (int i = 0; i < 1'000'000; ++i) {
      const double x = s.mu[z] + s.sigma[z] * n(rng);
      if (x >= t[z]) continue;
      sum += t[z] - x;
      sq += (t[z] - x) * (t[z] - x);
      ++k;
    }
    mean[z] = sum / k;
    se += (sq / k - mean[z] * mean[z]) / k;
  }
  EXPECT_NEAR(policy_disparity(Policy::Er, s, t, 0.0), std::abs(mean[0] - mean[1]), 3 * std::sqrt(se));
}

TEST(Error, HandValuesAndMonotone) {
  const GroupGaussianState s = state(0, 1, 0, 1);
  const double chi = accept_threshold_chi(s, 0.3);
  EXPECT_NEAR(error_rate(s, {chi, chi}, 0.3), 0.0, 1e-12);
  // Group 0 alone: N(chi, 1) with tau = chi + 1.
  const GroupGaussianState g = state(chi, 1, chi, 1);
  const double chi_g = accept_threshold_chi(g, 0.5);
  const double e = error_rate(g, {chi_g + 1, chi_g}, 0.5);
  EXPECT_NEAR(2 * e, normal_cdf(1.0) - normal_cdf(0.0), 1e-9);
  double prev = -1;
  for (double d = 0; d < 2; d += 0.1) {
    const double v = error_rate(s, {chi + d, chi - d}, 0.3);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(Tv, ClosedFormAndSymmetry) {
  EXPECT_DOUBLE_EQ(tv_distance(state(0.4, 0.9, 0.4, 0.9)), 0.0);
  EXPECT_NEAR(tv_distance(state(0, 1, 1, 1)), 2 * normal_cdf(0.5) - 1, 1e-8);
  EXPECT_NEAR(2 * normal_cdf(0.5) - 1, 0.38292, 1e-5);
  const double a = tv_distance(state(0, 1, 1, 0.5));
  EXPECT_NEAR(a, tv_distance(state(1, 0.5, 0, 1)), 1e-12);
  EXPECT_GT(a, 0.0);
  EXPECT_LE(a, 1.0);
}

TEST(Solver, IdenticalGroupsGiveEqualThresholds) {
  const GroupGaussianState s = state(0, 1, 0, 1);
  for (auto p : {Policy::Dp, Policy::Be, Policy::Er, Policy::Ei}) {
    const ThresholdPair t = solve_thresholds(p, s, 0.2, 0.1, 0.3);
    EXPECT_LE(std::abs(t.tau0 - t.tau1), 2 * final_grid_step(1.0)) << to_string(p);
    EXPECT_LE(policy_disparity(p, s, t, 0.3), 1e-6) << to_string(p);
    EXPECT_LE(error_rate(s, t, 0.2), 0.1 + 1e-12);
  }
}

TEST(Solver, ErmIsChi) {
  const GroupGaussianState s = state(0, 1, 1, 0.5);
  const ThresholdPair t = solve_thresholds(Policy::Erm, s, 0.2, 0.1, 0.0);
  const double chi = accept_threshold_chi(s, 0.2);
  EXPECT_DOUBLE_EQ(t.tau0, chi);
  EXPECT_DOUBLE_EQ(t.tau1, chi);
  EXPECT_LE(error_rate(s, t, 0.2), 1e-4);
}

TEST(Solver, EqualSigmaEiIsShiftAndSatisfiesEr) {
  for (double gap : {0.3, 0.8, 1.5}) {
    const GroupGaussianState s = state(0, 0.7, gap, 0.7);
    const double d = mean_effort_delta_t(s, {0.6, 0.6}, 0.25, EffortModel::InverseSquare);
    // c = 0.1 cannot afford the equal-shift pair once the gap reaches ~0.8.
    const ThresholdPair t = solve_thresholds(Policy::Ei, s, 0.2, 0.3, d);
    EXPECT_LE(std::abs((t.tau0 - s.mu[0]) - (t.tau1 - s.mu[1])), 2 * final_grid_step(0.7)) << gap;
    EXPECT_LE(policy_disparity(Policy::Er, s, t, d), 1e-3) << gap;
    EXPECT_LE(error_rate(s, t, 0.2), 0.3 + 1e-12);
  }
}

TEST(Solver, SwapInvariance) {
  const GroupGaussianState a = state(0, 1, 1, 0.5);
  const GroupGaussianState b = state(1, 0.5, 0, 1);
  for (auto p : {Policy::Dp, Policy::Ei, Policy::Er}) {
    const ThresholdPair ta = solve_thresholds(p, a, 0.2, 0.1, 0.4);
    const ThresholdPair tb = solve_thresholds(p, b, 0.2, 0.1, 0.4);
    EXPECT_NEAR(error_rate(a, ta, 0.2), error_rate(b, tb, 0.2), 1e-6) << to_string(p);
    EXPECT_NEAR(ta.tau0, tb.tau1, 4 * final_grid_step(1.0)) << to_string(p);
    EXPECT_NEAR(ta.tau1, tb.tau0, 4 * final_grid_step(1.0)) << to_string(p);
  }
}

TEST(Simulation, IdenticalInitStaysAtZero) {
  DynamicsConfig c;
  c.init = state(0, 1, 0, 1);
  c.rounds = 3;
  for (auto p : {Policy::Erm, Policy::Dp, Policy::Be, Policy::Er, Policy::Ei, Policy::Ilfcr}) {
    c.policy = p;
    const Trajectory t = run_simulation(c);
    ASSERT_EQ(t.rounds.size(), 4u);
    EXPECT_FALSE(t.rounds.back().thresholds.has_value());
    for (const auto& r : t.rounds) EXPECT_LE(r.tv, 1e-6) << to_string(p);
  }
}

TEST(Simulation, MeansNeverDecrease) {
  DynamicsConfig c;
  c.init = state(0, 1, 1, 0.5);
  c.rounds = 5;
  for (auto p : {Policy::Erm, Policy::Dp, Policy::Ei}) {
    c.policy = p;
    const Trajectory t = run_simulation(c);
    for (std::size_t k = 1; k < t.rounds.size(); ++k)
      for (int z = 0; z < 2; ++z) EXPECT_GE(t.rounds[k].state.mu[z], t.rounds[k - 1].state.mu[z] - 1e-9);
    for (std::size_t k = 0; k + 1 < t.rounds.size(); ++k) EXPECT_LE(t.rounds[k].error, c.c + 1e-9);
  }
}

TEST(Simulation, LogEffortVariantQualitative) {
  DynamicsConfig c;
  c.init = state(0, 3, 1, 1);
  c.alpha = 0.5;
  c.beta = 0.2;
  c.effort_model = EffortModel::LogCapped;
  c.policy = Policy::Ei;
  const Trajectory ei = run_simulation(c);
  EXPECT_LT(ei.rounds.back().tv, ei.rounds.front().tv);
  bool other_not_decreasing = false;
  for (auto p : {Policy::Be, Policy::Er}) {
    c.policy = p;
    const Trajectory t = run_simulation(c);
    other_not_decreasing |= t.rounds.back().tv >= t.rounds.front().tv;
  }
  EXPECT_TRUE(other_not_decreasing);
}

TEST(Csv, HeaderAndRows) {
  DynamicsConfig c;
  c.rounds = 2;
  c.init = state(0, 1, 1, 0.5);
  const std::string csv = trajectory_csv({run_simulation(c)});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "round,policy,mu0,sigma0,mu1,sigma1,tau0,tau1,delta_t,tv,error");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}
