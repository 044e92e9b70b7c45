#pragma once

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>
#include <string>
#include <vector>

#include "improvkit/data.hpp"
#include "improvkit/models.hpp"

namespace improvkit::oracles {

// Linear classifier accepting x when w_theta . x >= b_z, with w_theta = (sin, cos).
struct GaussianAwareClassifier {
  double theta = 0.0;
  double b0 = 0.0;
  double b1 = 0.0;
  Eigen::Vector2d w() const { return {std::sin(theta), std::cos(theta)}; }
  double b(int z) const { return z == 0 ? b0 : b1; }
};

enum class Notion { Ei, Be, Er };
std::string to_string(Notion n);
Notion parse_notion(const std::string& s);

double qform_error(const GaussianAwareClassifier& c, const SyntheticConfig& cfg);
// Linf effort budget delta; max gap to the P(z)-weighted pool.
double qform_ei_disparity(const GaussianAwareClassifier& c, const SyntheticConfig& cfg, double delta);
double qform_be_disparity(const GaussianAwareClassifier& c, const SyntheticConfig& cfg, double delta);
// Mean Linf recourse (b_z - w.x) / (|sin| + |cos|) of rejected samples.
double qform_er_disparity(const GaussianAwareClassifier& c, const SyntheticConfig& cfg);
double qform_disparity(Notion n, const GaussianAwareClassifier& c, const SyntheticConfig& cfg, double delta);

// The equivalent GLM on (x1, x2[, z]); z must be the third column when present.
GlmScorer to_glm(const GaussianAwareClassifier& c, bool group_as_feature = true);

struct TradeoffOptions {
  Notion notion = Notion::Ei;
  int grid = 161;  // points per axis in the coarse grid
  int refine_rounds = 2;
  double b_lo = -3.0;
  double b_hi = 3.0;
  double feasibility_tol = 1e-6;  // disparity <= c + tol counts as feasible
};

struct TradeoffPoint {
  double c = 0.0;
  double error = 0.0;
  double disparity = 0.0;
  GaussianAwareClassifier classifier;
};

// Minimum-error classifier with no disparity constraint.
TradeoffPoint unconstrained_optimum(const SyntheticConfig& cfg, double delta, const TradeoffOptions& opts = {});

// n values evenly spaced on [0, unconstrained disparity].
std::vector<double> default_c_grid(const SyntheticConfig& cfg, double delta, int n = 20,
                                   const TradeoffOptions& opts = {});

// Per c: minimize qform_error subject to disparity <= c. Error is non-increasing in c.
std::vector<TradeoffPoint> optimal_tradeoff(const SyntheticConfig& cfg, double delta,
                                            const std::vector<double>& c_grid,
                                            const TradeoffOptions& opts = {});

// Piecewise-linear interpolation of error over c; clamps outside the grid.
double tradeoff_error_at(const std::vector<TradeoffPoint>& curve, double c);

std::string tradeoff_csv(const std::vector<TradeoffPoint>& curve);

// ---- exact piecewise-uniform examples ----

using Rational = boost::multiprecision::cpp_rational;

std::string to_string(const Rational& r);
double to_double(const Rational& r);

struct Segment {
  Rational left, right, density;
};

struct PiecewiseUniform {
  std::vector<Segment> segments;

  Rational mass() const;
  Rational mass_between(const Rational& a, const Rational& b) const;
  // integral of x p(x) over (-inf, t)
  Rational moment_below(const Rational& t) const;
  // Mass on [tau - delta, tau) moves up by delta.
  PiecewiseUniform improve(const Rational& tau, const Rational& delta) const;
  // Sorted, disjoint, merged representation.
  PiecewiseUniform canonical() const;
  std::vector<Rational> breakpoints() const;
  Rational density_at(const Rational& x) const;  // right-continuous
};

Rational tv_distance(const PiecewiseUniform& p, const PiecewiseUniform& q);

enum class AppendixExample { D1, D2 };
AppendixExample parse_example(const std::string& s);

struct PolicyOutcome {
  std::string policy;  // erm, be, ei, er
  Rational tau0, tau1;
  Rational error;
  Rational disparity;  // of the policy's own notion, max gap to the pool
  Rational tv_after;
};

struct AppendixDReport {
  std::string example;
  Rational m;
  Rational tv_before;
  std::vector<PolicyOutcome> published;  // thresholds stated for the worked example
  std::vector<PolicyOutcome> solved;     // exact minimum-error fair thresholds on an m/4 lattice

  const PolicyOutcome& policy(const std::string& name) const;
  const PolicyOutcome& solved_policy(const std::string& name) const;
  std::string to_text() const;
};

struct AppendixDInstance {
  PiecewiseUniform p[2];
  Rational label_threshold[2];  // y = 1{x >= label_threshold_z}
  Rational p_group[2];
  Rational delta;
};

AppendixDInstance appendix_d_instance(AppendixExample ex, const Rational& m);

// Pre-step quantities for thresholds (tau0, tau1), accept x >= tau.
Rational appendix_error(const AppendixDInstance& inst, const Rational& tau0, const Rational& tau1);
Rational appendix_disparity(const std::string& notion, const AppendixDInstance& inst, const Rational& tau0,
                            const Rational& tau1);
Rational appendix_tv_after(const AppendixDInstance& inst, const Rational& tau0, const Rational& tau1);

AppendixDReport appendix_d_oracle(AppendixExample ex, const Rational& m);

}  // namespace improvkit::oracles
