#pragma once

#include <map>
#include <string>
#include <vector>

#include "improvkit/data.hpp"
#include "improvkit/effort.hpp"
#include "improvkit/kv_config.hpp"
#include "improvkit/models.hpp"

namespace improvkit {

struct EvalOptions {
  PgdConfig pgd;
  double delta_max = 0.0;  // recourse cap; 0 selects 10x the largest feature range
};

// Per-group ratio num/den, pooled sum(num)/sum(den), and the max gap to the pool.
// Groups with den == 0 are skipped and named in `skipped`.
struct GroupGap {
  std::vector<double> group_values;  // NaN for skipped groups
  double pooled = 0.0;
  double gap = 0.0;
  std::vector<int> skipped;
};
GroupGap max_gap_to_pool(const std::vector<double>& num, const std::vector<double>& den);

double error_rate(const Scorer& model, const Dataset& ds);
double ei_disparity(const Scorer& model, const Dataset& ds, const EffortBudget& budget,
                    const EvalOptions& opts = {});
double dp_disparity(const Scorer& model, const Dataset& ds);
double eo_disparity(const Scorer& model, const Dataset& ds);
double eod_disparity(const Scorer& model, const Dataset& ds);
double be_disparity(const Scorer& model, const Dataset& ds, const EffortBudget& budget,
                    const EvalOptions& opts = {});
double er_disparity(const Scorer& model, const Dataset& ds, const EffortBudget& budget,
                    const EvalOptions& opts = {});

struct DisparityReport {
  double error_rate = 0.0;
  double ei = 0.0, dp = 0.0, eo = 0.0, eod = 0.0, be = 0.0, er = 0.0;
  std::map<std::string, std::vector<double>> per_group_probs;
  std::vector<std::string> skipped_groups;
  std::map<std::string, std::string> field_errors;  // notion -> message; value is NaN
  int er_flagged = 0;  // recourse capped at delta_max

  KvConfig to_kv() const;
  std::string to_text() const { return to_kv().dump(); }
  static DisparityReport from_kv(const KvConfig& kv);
  static std::string csv_header();  // error,ei,dp,eo,eod,be,er
  std::string csv_values() const;
};

DisparityReport full_report(const Scorer& model, const Dataset& ds, const EffortBudget& budget,
                            const EvalOptions& opts = {});

}  // namespace improvkit
