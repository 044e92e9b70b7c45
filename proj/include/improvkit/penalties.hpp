#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "improvkit/data.hpp"
#include "improvkit/effort.hpp"
#include "improvkit/models.hpp"

namespace improvkit {

enum class PenaltyTag { None, EiCov, EiKde, EiLoss, BeLoss };

std::string to_string(PenaltyTag t);
// Throws ConfigError listing the valid tags.
PenaltyTag parse_penalty(const std::string& s);

struct PenaltyKind {
  PenaltyTag tag = PenaltyTag::None;
  double kde_bandwidth = 0.1;
  void validate() const;
};

// Penalty as a function of the improved scores of the rejected samples.
struct ScorePenalty {
  double value = 0.0;
  std::vector<double> d_score;  // dU / d max_score_i, aligned with the inputs
  bool degenerate = false;      // no rejected samples
  std::vector<int> excluded_groups;
};

// rejected_groups[i], max_scores[i]: group and improved score of the i-th rejected
// sample. group_sizes: batch group sizes (all samples), used by be_loss.
ScorePenalty score_penalty(const PenaltyKind& kind, const std::vector<int>& rejected_groups,
                           const std::vector<double>& max_scores, const std::vector<int>& group_sizes);

struct PenaltyResult {
  double value = 0.0;
  Eigen::VectorXd grad;  // d U / d theta (Danskin: best responses held fixed)
  bool degenerate = false;
  std::vector<int> excluded_groups;
};

// Evaluates U_delta on ds.rows(rows). An empty `rows` means the whole dataset.
PenaltyResult compute_penalty(const PenaltyKind& kind, const Scorer& model, const Dataset& ds,
                              const std::vector<int>& rows, const EffortBudget& budget,
                              const PgdConfig& pgd = {});

PenaltyResult ei_penalty_cov(const Scorer& model, const Dataset& ds, const std::vector<int>& rows,
                             const EffortBudget& budget, const PgdConfig& pgd = {});
PenaltyResult ei_penalty_kde(const Scorer& model, const Dataset& ds, const std::vector<int>& rows,
                             const EffortBudget& budget, double h, const PgdConfig& pgd = {});
PenaltyResult ei_penalty_loss(const Scorer& model, const Dataset& ds, const std::vector<int>& rows,
                              const EffortBudget& budget, const PgdConfig& pgd = {});
PenaltyResult be_penalty_loss(const Scorer& model, const Dataset& ds, const std::vector<int>& rows,
                              const EffortBudget& budget, const PgdConfig& pgd = {});

}  // namespace improvkit
