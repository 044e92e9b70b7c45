#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "improvkit/data.hpp"
#include "improvkit/effort.hpp"
#include "improvkit/kv_config.hpp"
#include "improvkit/metrics.hpp"
#include "improvkit/models.hpp"
#include "improvkit/penalties.hpp"

namespace improvkit {

enum class ModelKind { Logreg, Mlp };
enum class OptimizerKind { PlainSgd, Adam };

std::string to_string(ModelKind k);
ModelKind parse_model_kind(const std::string& s);
std::string to_string(OptimizerKind k);
OptimizerKind parse_optimizer(const std::string& s);

struct TrainConfig {
  ModelKind model = ModelKind::Logreg;
  std::vector<int> hidden{4};  // MLP hidden widths
  PenaltyKind penalty;
  double lambda = 0.0;
  EffortBudget budget;
  int epochs = 0;      // 0: 300 for logreg, 500 for mlp
  int batch_size = 0;  // 0: full batch
  double learning_rate = 0.1;
  OptimizerKind optimizer = OptimizerKind::Adam;
  PgdConfig pgd;
  std::uint64_t seed = 0;

  int resolved_epochs() const { return epochs > 0 ? epochs : (model == ModelKind::Logreg ? 300 : 500); }
  void validate() const;
  KvConfig to_kv() const;
  // Keys absent from kv keep their defaults.
  static TrainConfig from_kv(const KvConfig& kv);
  static TrainConfig from_kv(const KvConfig& kv, TrainConfig base);
};

struct HistoryRow {
  int epoch = 0;
  double objective = 0.0;
  double penalty = 0.0;
  double error = 0.0;
};

struct TrainedModel {
  Scorer scorer;
  std::vector<HistoryRow> history;
  TrainConfig config;
  FeaturePartition partition;
};

struct ObjectiveValue {
  double objective = 0.0;
  double mean_loss = 0.0;
  double penalty = 0.0;
  int errors = 0;  // misclassified rows in the batch
  Eigen::VectorXd grad;
};

// (1 - lambda) mean loss + lambda U on ds.rows(rows) (all rows when empty), with the
// Danskin gradient. The penalty term is skipped entirely when lambda == 0.
ObjectiveValue objective_and_gradient(const Scorer& model, const Dataset& ds,
                                      const std::vector<int>& rows, const TrainConfig& cfg);

// Full-dataset history row for `model`.
HistoryRow evaluate_history_row(const Scorer& model, const Dataset& ds, const TrainConfig& cfg);

Scorer initial_scorer(const TrainConfig& cfg, int d);

TrainedModel train(const Dataset& ds, const TrainConfig& cfg);

// Model documents: flat key-value text carrying kind, shapes, parameters,
// partition and the training config (including the effort budget).
std::string serialize_model(const TrainedModel& m);
TrainedModel parse_model(const std::string& text, const std::string& origin = "<model>");
void save_model(const TrainedModel& m, const std::string& path);
TrainedModel load_model(const std::string& path);

std::string history_csv(const std::vector<HistoryRow>& h);

struct CvOptions {
  int folds = 5;
  std::vector<double> stage1{0.0, 0.2, 0.4, 0.6, 0.8, 0.9};
  double error_slack = 0.05;
  bool tune_learning_rate = false;
  std::vector<double> lr_grid{1e-4, 1e-3, 1e-2, 1e-1};
  int jobs = 1;
};

struct CvScore {
  int stage = 1;
  double lambda = 0.0;
  double error = 0.0;  // mean validation error over used folds
  double ei = 0.0;     // mean validation EI disparity
  int folds_used = 0;
};

struct CvResult {
  double best_lambda = 0.0;
  double learning_rate = 0.0;
  double baseline_error = 0.0;
  std::vector<CvScore> scores;
  std::vector<std::string> flags;
};

// {max(l + e, 0) : e in {-0.1, -0.05, 0, 0.05, 0.1}}, dropping values >= 1, deduplicated, sorted.
std::vector<double> stage2_grid(double lambda_star);

// Index of the selected candidate: min ei subject to error <= baseline + slack;
// ties go to the smaller lambda.
std::size_t select_lambda(const std::vector<CvScore>& candidates, double baseline_error, double slack);

CvResult cross_validate(const Dataset& ds, const TrainConfig& base, const CvOptions& opts = {});

struct SweepRow {
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::string split;  // train or test
  DisparityReport report;
  std::string failure;  // non-empty when the run failed
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<std::size_t> frontier;  // indices of non-dominated test rows
};

// Indices of points not dominated under (error, ei) minimization.
std::vector<std::size_t> pareto_frontier(const std::vector<std::pair<double, double>>& points);

SweepResult pareto_sweep(const Dataset& ds, const TrainConfig& base, const std::vector<double>& lambdas,
                         const std::vector<std::uint64_t>& seeds, double test_fraction = 0.2,
                         int jobs = 1);

std::string sweep_csv(const SweepResult& r);

}  // namespace improvkit
