#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "improvkit/error.hpp"

namespace improvkit::dynamics {

struct GroupGaussianState {
  std::array<double, 2> mu{0.0, 0.0};
  std::array<double, 2> sigma{1.0, 1.0};
  void validate() const;
};

enum class Policy { Erm, Dp, Be, Er, Ei, Ilfcr };
enum class EffortModel { InverseSquare, LogCapped };

std::string to_string(Policy p);
Policy parse_policy(const std::string& s);
std::string to_string(EffortModel m);
EffortModel parse_effort_model(const std::string& s);

struct DynamicsConfig {
  GroupGaussianState init;
  double alpha = 0.2;
  double c = 0.1;
  double beta = 0.25;
  int rounds = 10;
  Policy policy = Policy::Ei;
  EffortModel effort_model = EffortModel::InverseSquare;
  void validate() const;
};

struct ThresholdPair {
  double tau0 = 0.0;
  double tau1 = 0.0;
  double operator[](int z) const { return z == 0 ? tau0 : tau1; }
};

struct RoundRecord {
  int round = 0;
  GroupGaussianState state;
  std::optional<ThresholdPair> thresholds;  // absent for the final state
  double delta_t = 0.0;
  double tv = 0.0;
  double error = 0.0;
};

struct Trajectory {
  Policy policy = Policy::Ei;
  std::vector<RoundRecord> rounds;  // rounds + 1 states
};

// Raised when no grid point satisfies the error constraint.
class InfeasibleError : public NumericalError {
public:
  InfeasibleError(const std::string& msg, double min_error) : NumericalError(msg), min_error(min_error) {}
  double min_error;
};

// chi with P(x >= chi) = alpha under the equal-weight mixture.
double accept_threshold_chi(const GroupGaussianState& s, double alpha);

double effort_nu(double x, double tau, double beta, EffortModel model);

GroupGaussianState step_distribution(const GroupGaussianState& s, const ThresholdPair& t, double beta,
                                     EffortModel model);

// E_z[nu] for one group.
double group_mean_effort(double mu, double sigma, double tau, double beta, EffortModel model);
double mean_effort_delta_t(const GroupGaussianState& s, const ThresholdPair& t, double beta,
                           EffortModel model);

// Throws EvaluationError when a needed rejection probability is below 1e-12.
double policy_disparity(Policy p, const GroupGaussianState& s, const ThresholdPair& t, double delta_t);

double error_rate(const GroupGaussianState& s, const ThresholdPair& t, double alpha);

inline constexpr int kCoarseGrid = 161;
inline constexpr int kRefineRounds = 2;
inline constexpr double kTieTolerance = 1e-9;

ThresholdPair solve_thresholds(Policy p, const GroupGaussianState& s, double alpha, double c, double delta_t);

// Final grid step per group after refinement: 8 sigma / 160 / 10^rounds.
double final_grid_step(double sigma);

double tv_distance(const GroupGaussianState& s);

Trajectory run_simulation(const DynamicsConfig& cfg);

// Header: round,policy,mu0,sigma0,mu1,sigma1,tau0,tau1,delta_t,tv,error
std::string trajectory_csv(const std::vector<Trajectory>& trajectories);

}  // namespace improvkit::dynamics
