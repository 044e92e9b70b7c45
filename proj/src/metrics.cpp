#include "improvkit/metrics.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "improvkit/error.hpp"

namespace improvkit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Decisions {
  std::vector<double> score;
  std::vector<char> accept;
};

Decisions decide(const Scorer& model, const Dataset& ds) {
  Decisions d;
  d.score.resize(ds.rows());
  d.accept.resize(ds.rows());
  const Eigen::VectorXd sc = scores(model, ds.features);
  for (int i = 0; i < ds.rows(); ++i) {
    d.score[i] = sc(i);
    d.accept[i] = accepted(d.score[i]);
  }
  return d;
}

// improvable[i] = rejected and max_score >= 0.5; only meaningful for rejected rows.
std::vector<char> improvable(const Scorer& model, const Dataset& ds, const Decisions& dec,
                             const EffortBudget& budget, const EvalOptions& opts) {
  std::vector<char> out(ds.rows(), 0);
  for (int i = 0; i < ds.rows(); ++i) {
    if (dec.accept[i]) continue;
    out[i] = accepted(best_response(model, ds.row(i), budget, ds.partition, opts.pgd).max_score);
  }
  return out;
}

GroupGap gap_or_throw(const std::vector<double>& num, const std::vector<double>& den,
                      const char* what) {
  GroupGap g = max_gap_to_pool(num, den);
  if (std::isnan(g.pooled)) throw EvaluationError(std::string(what) + ": empty pooled conditioning set");
  return g;
}

GroupGap ei_gap(const Dataset& ds, const Decisions& dec, const std::vector<char>& imp) {
  std::vector<double> num(ds.num_groups, 0.0), den(ds.num_groups, 0.0);
  for (int i = 0; i < ds.rows(); ++i) {
    if (dec.accept[i]) continue;
    den[ds.groups[i]] += 1;
    num[ds.groups[i]] += imp[i];
  }
  return gap_or_throw(num, den, "ei");
}

GroupGap be_gap(const Dataset& ds, const Decisions& dec, const std::vector<char>& imp) {
  std::vector<double> num(ds.num_groups, 0.0), den(ds.num_groups, 0.0);
  for (int i = 0; i < ds.rows(); ++i) {
    den[ds.groups[i]] += 1;
    if (!dec.accept[i]) num[ds.groups[i]] += imp[i];
  }
  return gap_or_throw(num, den, "be");
}

// label < 0: every row; otherwise only rows with that label.
GroupGap accept_gap(const Dataset& ds, const Decisions& dec, int label, const char* what) {
  std::vector<double> num(ds.num_groups, 0.0), den(ds.num_groups, 0.0);
  for (int i = 0; i < ds.rows(); ++i) {
    if (label >= 0 && ds.labels[i] != label) continue;
    den[ds.groups[i]] += 1;
    num[ds.groups[i]] += dec.accept[i];
  }
  return gap_or_throw(num, den, what);
}

GroupGap er_gap(const Scorer& model, const Dataset& ds, const Decisions& dec,
                const EffortBudget& budget, const EvalOptions& opts, int* flagged_count) {
  const double cap = opts.delta_max > 0.0 ? opts.delta_max : 10.0 * ds.max_feature_range();
  std::vector<double> num(ds.num_groups, 0.0), den(ds.num_groups, 0.0);
  int flagged_total = 0;
  for (int i = 0; i < ds.rows(); ++i) {
    if (dec.accept[i]) continue;
    bool flagged = false;
    num[ds.groups[i]] += recourse_distance(model, ds.row(i), budget, ds.partition, cap, opts.pgd, &flagged);
    den[ds.groups[i]] += 1;
    flagged_total += flagged;
  }
  if (flagged_count) *flagged_count = flagged_total;
  return gap_or_throw(num, den, "er");
}

}  // namespace

GroupGap max_gap_to_pool(const std::vector<double>& num, const std::vector<double>& den) {
  GroupGap g;
  double sn = 0.0, sd = 0.0;
  for (std::size_t z = 0; z < num.size(); ++z) {
    sn += num[z];
    sd += den[z];
  }
  g.pooled = sd > 0.0 ? sn / sd : kNaN;
  g.group_values.assign(num.size(), kNaN);
  for (std::size_t z = 0; z < num.size(); ++z) {
    if (den[z] <= 0.0) {
      g.skipped.push_back(static_cast<int>(z));
      continue;
    }
    g.group_values[z] = num[z] / den[z];
    g.gap = std::max(g.gap, std::abs(g.group_values[z] - g.pooled));
  }
  return g;
}

double error_rate(const Scorer& model, const Dataset& ds) {
  if (ds.rows() == 0) throw EvaluationError("error rate of an empty dataset");
  const Eigen::VectorXd sc = scores(model, ds.features);
  int wrong = 0;
  for (int i = 0; i < ds.rows(); ++i) wrong += (accepted(sc(i)) ? 1 : 0) != ds.labels[i];
  return static_cast<double>(wrong) / ds.rows();
}

double ei_disparity(const Scorer& model, const Dataset& ds, const EffortBudget& budget,
                    const EvalOptions& opts) {
  const auto dec = decide(model, ds);
  return ei_gap(ds, dec, improvable(model, ds, dec, budget, opts)).gap;
}

double dp_disparity(const Scorer& model, const Dataset& ds) {
  return accept_gap(ds, decide(model, ds), -1, "dp").gap;
}

double eo_disparity(const Scorer& model, const Dataset& ds) {
  return accept_gap(ds, decide(model, ds), 1, "eo").gap;
}

double eod_disparity(const Scorer& model, const Dataset& ds) {
  const auto dec = decide(model, ds);
  return std::max(accept_gap(ds, dec, 0, "eod").gap, accept_gap(ds, dec, 1, "eod").gap);
}

double be_disparity(const Scorer& model, const Dataset& ds, const EffortBudget& budget,
                    const EvalOptions& opts) {
  const auto dec = decide(model, ds);
  return be_gap(ds, dec, improvable(model, ds, dec, budget, opts)).gap;
}

double er_disparity(const Scorer& model, const Dataset& ds, const EffortBudget& budget,
                    const EvalOptions& opts) {
  return er_gap(model, ds, decide(model, ds), budget, opts, nullptr).gap;
}

DisparityReport full_report(const Scorer& model, const Dataset& ds, const EffortBudget& budget,
                            const EvalOptions& opts) {
  DisparityReport r;
  const auto dec = decide(model, ds);
  int wrong = 0;
  for (int i = 0; i < ds.rows(); ++i) wrong += dec.accept[i] != ds.labels[i];
  r.error_rate = ds.rows() ? static_cast<double>(wrong) / ds.rows() : kNaN;
  const auto imp = improvable(model, ds, dec, budget, opts);

  auto record = [&](const std::string& name, double& field, auto&& compute) {
    try {
      const GroupGap g = compute();
      field = g.gap;
      r.per_group_probs[name] = g.group_values;
      for (int z : g.skipped) r.skipped_groups.push_back(name + ":group" + std::to_string(z) + ":empty conditioning set");
    } catch (const std::exception& e) {
      field = kNaN;
      r.field_errors[name] = e.what();
    }
  };
  record("ei", r.ei, [&] { return ei_gap(ds, dec, imp); });
  record("dp", r.dp, [&] { return accept_gap(ds, dec, -1, "dp"); });
  record("eo", r.eo, [&] { return accept_gap(ds, dec, 1, "eo"); });
  double eod0 = 0.0, eod1 = 0.0;
  record("eod_y0", eod0, [&] { return accept_gap(ds, dec, 0, "eod"); });
  record("eod_y1", eod1, [&] { return accept_gap(ds, dec, 1, "eod"); });
  r.eod = std::max(eod0, eod1);
  if (std::isnan(eod0) || std::isnan(eod1)) r.eod = kNaN;
  record("be", r.be, [&] { return be_gap(ds, dec, imp); });
  record("er", r.er, [&] { return er_gap(model, ds, dec, budget, opts, &r.er_flagged); });
  return r;
}

KvConfig DisparityReport::to_kv() const {
  KvConfig kv;
  kv.set("error_rate", format_double(error_rate));
  kv.set("ei", format_double(ei));
  kv.set("dp", format_double(dp));
  kv.set("eo", format_double(eo));
  kv.set("eod", format_double(eod));
  kv.set("be", format_double(be));
  kv.set("er", format_double(er));
  kv.set("er_flagged", std::to_string(er_flagged));
  for (const auto& [notion, vals] : per_group_probs) {
    std::string s;
    for (std::size_t z = 0; z < vals.size(); ++z) s += (z ? ", " : "") + format_double(vals[z]);
    kv.set("group." + notion, s);
  }
  std::string skipped;
  for (std::size_t k = 0; k < skipped_groups.size(); ++k) skipped += (k ? ", " : "") + skipped_groups[k];
  kv.set("skipped_groups", skipped);
  for (const auto& [notion, msg] : field_errors) kv.set("error." + notion, msg);
  return kv;
}

DisparityReport DisparityReport::from_kv(const KvConfig& kv) {
  DisparityReport r;
  r.error_rate = kv.get_double("error_rate");
  r.ei = kv.get_double("ei");
  r.dp = kv.get_double("dp");
  r.eo = kv.get_double("eo");
  r.eod = kv.get_double("eod");
  r.be = kv.get_double("be");
  r.er = kv.get_double("er");
  r.er_flagged = static_cast<int>(kv.get_int_or("er_flagged", 0));
  for (const auto& [k, v] : kv.values()) {
    if (k.rfind("group.", 0) == 0) {
      std::vector<double> vals;
      for (const auto& s : split_list(v)) vals.push_back(parse_double(s, k));
      r.per_group_probs[k.substr(6)] = vals;
    } else if (k.rfind("error.", 0) == 0) {
      r.field_errors[k.substr(6)] = v;
    }
  }
  r.skipped_groups = kv.get_list("skipped_groups");
  return r;
}

std::string DisparityReport::csv_header() { return "error,ei,dp,eo,eod,be,er"; }

std::string DisparityReport::csv_values() const {
  return format_double(error_rate) + "," + format_double(ei) + "," + format_double(dp) + "," +
         format_double(eo) + "," + format_double(eod) + "," + format_double(be) + "," +
         format_double(er);
}

}  // namespace improvkit
