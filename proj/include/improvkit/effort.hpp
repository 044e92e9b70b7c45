#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "improvkit/data.hpp"
#include "improvkit/models.hpp"

namespace improvkit {

enum class NormKind { Linf, L2Weighted };

std::string to_string(NormKind k);
NormKind parse_norm(const std::string& s);

struct EffortBudget {
  NormKind norm = NormKind::Linf;
  double delta = 0.5;
  // Diagonal of C over the improvable features. Empty means all ones.
  Eigen::VectorXd cost_diag;

  double cost(int k) const { return cost_diag.size() ? cost_diag(k) : 1.0; }
  // mu(v) for v over the improvable coordinates.
  double measure(const Eigen::VectorXd& v) const;
  // Dual norm of w_I: L1 for Linf, sqrt(w' C^-1 w) for weighted L2.
  double dual_norm(const Eigen::VectorXd& w) const;
  void validate(int n_improvable) const;
};

enum class PgdInit { Zero, Random };

struct PgdConfig {
  int steps = 20;
  double step_size = 0.0;  // 0 selects delta / 5
  int restarts = 1;
  PgdInit init = PgdInit::Zero;
  std::uint64_t seed = 0;  // random-init stream
  void validate() const;
};

struct BestResponse {
  Eigen::VectorXd delta_x;  // zero outside the improvable indices
  double max_score = 0.0;
};

Eigen::VectorXd gather(const Eigen::VectorXd& x, const std::vector<int>& idx);

BestResponse best_response_glm(const GlmScorer& model, const Eigen::VectorXd& x,
                               const EffortBudget& budget, const FeaturePartition& partition);

BestResponse best_response_pgd(const Scorer& model, const Eigen::VectorXd& x,
                               const EffortBudget& budget, const PgdConfig& cfg,
                               const FeaturePartition& partition);

// Closed form for GLMs, PGD otherwise.
BestResponse best_response(const Scorer& model, const Eigen::VectorXd& x, const EffortBudget& budget,
                           const FeaturePartition& partition, const PgdConfig& cfg = {});

inline constexpr double kRecourseTol = 1e-4;

// Minimum mu(dx_I) reaching score >= 0.5. Only budget.norm and budget.cost_diag
// are used. When no such effort exists below delta_max, returns delta_max and
// sets *flagged.
double recourse_distance(const Scorer& model, const Eigen::VectorXd& x, const EffortBudget& budget,
                         const FeaturePartition& partition, double delta_max,
                         const PgdConfig& cfg = {}, bool* flagged = nullptr);

}  // namespace improvkit
