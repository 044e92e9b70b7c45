#include "improvkit/penalties.hpp"

#include <cmath>
#include <numeric>

#include "improvkit/error.hpp"
#include "improvkit/gaussian.hpp"

namespace improvkit {

std::string to_string(PenaltyTag t) {
  switch (t) {
    case PenaltyTag::None: return "none";
    case PenaltyTag::EiCov: return "ei_cov";
    case PenaltyTag::EiKde: return "ei_kde";
    case PenaltyTag::EiLoss: return "ei_loss";
    case PenaltyTag::BeLoss: return "be_loss";
  }
  return "none";
}

PenaltyTag parse_penalty(const std::string& s) {
  for (auto t : {PenaltyTag::None, PenaltyTag::EiCov, PenaltyTag::EiKde, PenaltyTag::EiLoss,
                 PenaltyTag::BeLoss})
    if (to_string(t) == s) return t;
  throw ConfigError("unknown penalty '" + s + "' (valid: none, ei_cov, ei_kde, ei_loss, be_loss)");
}

void PenaltyKind::validate() const {
  if (tag == PenaltyTag::EiKde && !(kde_bandwidth > 0.0))
    throw ConfigError("kde_bandwidth must be > 0");
}

namespace {

double sgn(double v) { return double((v > 0) - (v < 0)); }

// U = sum_z |A_z - A| with A_z = sum_{i in z} g_i / n_z and A = sum_i g_i / n_pool,
// over groups with n_z > 0. Writes dU/dg_i into d_g.
double abs_gap_sum(const std::vector<int>& groups, const std::vector<double>& g,
                   const std::vector<double>& n_group, double n_pool, std::vector<double>& d_g) {
  const std::size_t Z = n_group.size();
  std::vector<double> sum(Z, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    sum[groups[i]] += g[i];
    total += g[i];
  }
  const double pooled = total / n_pool;
  double value = 0.0, sign_sum = 0.0;
  std::vector<double> sign(Z, 0.0);
  for (std::size_t z = 0; z < Z; ++z) {
    if (n_group[z] <= 0) continue;
    const double gap = sum[z] / n_group[z] - pooled;
    value += std::abs(gap);
    sign[z] = sgn(gap);
    sign_sum += sign[z];
  }
  d_g.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    d_g[i] = sign[groups[i]] / n_group[groups[i]] - sign_sum / n_pool;
  return value;
}

}  // namespace

ScorePenalty score_penalty(const PenaltyKind& kind, const std::vector<int>& rejected_groups,
                           const std::vector<double>& max_scores, const std::vector<int>& group_sizes) {
  kind.validate();
  ScorePenalty out;
  const std::size_t n = max_scores.size();
  const std::size_t Z = group_sizes.size();
  out.d_score.assign(n, 0.0);
  if (kind.tag == PenaltyTag::None) return out;
  if (n == 0) {
    out.degenerate = true;
    return out;
  }
  std::vector<double> rejected_per_group(Z, 0.0);
  for (int z : rejected_groups) rejected_per_group[z] += 1;

  switch (kind.tag) {
    case PenaltyTag::EiCov: {
      if (Z > 2) throw ConfigError("ei_cov needs a binary group attribute; use ei_kde or ei_loss");
      double zbar = 0.0;
      for (int z : rejected_groups) zbar += z;
      zbar /= n;
      double c = 0.0;
      for (std::size_t i = 0; i < n; ++i) c += (rejected_groups[i] - zbar) * max_scores[i];
      c /= n;
      out.value = c * c;
      for (std::size_t i = 0; i < n; ++i) out.d_score[i] = 2.0 * c * (rejected_groups[i] - zbar) / n;
      break;
    }
    case PenaltyTag::EiKde: {
      const double h = kind.kde_bandwidth;
      std::vector<double> g(n), dg;
      for (std::size_t i = 0; i < n; ++i) g[i] = normal_tail((0.5 - max_scores[i]) / h);
      out.value = abs_gap_sum(rejected_groups, g, rejected_per_group, static_cast<double>(n), dg);
      for (std::size_t i = 0; i < n; ++i)
        out.d_score[i] = dg[i] * normal_pdf((0.5 - max_scores[i]) / h) / h;
      break;
    }
    case PenaltyTag::EiLoss:
    case PenaltyTag::BeLoss: {
      std::vector<double> g(n), dg;
      for (std::size_t i = 0; i < n; ++i) g[i] = loss(1, max_scores[i]);
      if (kind.tag == PenaltyTag::EiLoss) {
        out.value = abs_gap_sum(rejected_groups, g, rejected_per_group, static_cast<double>(n), dg);
      } else {
        std::vector<double> sizes(group_sizes.begin(), group_sizes.end());
        const double total = std::accumulate(sizes.begin(), sizes.end(), 0.0);
        out.value = abs_gap_sum(rejected_groups, g, sizes, total, dg);
      }
      // d loss(1, s) / ds = -1/s, zero where the clamp is active
      for (std::size_t i = 0; i < n; ++i) {
        const double s = max_scores[i];
        out.d_score[i] = (s < kLossClamp || s > 1.0 - kLossClamp) ? 0.0 : -dg[i] / s;
      }
      break;
    }
    case PenaltyTag::None:
      break;
  }
  const auto& den = kind.tag == PenaltyTag::BeLoss
                        ? std::vector<double>(group_sizes.begin(), group_sizes.end())
                        : rejected_per_group;
  for (std::size_t z = 0; z < Z; ++z)
    if (den[z] <= 0) out.excluded_groups.push_back(static_cast<int>(z));
  return out;
}

PenaltyResult compute_penalty(const PenaltyKind& kind, const Scorer& model, const Dataset& ds,
                              const std::vector<int>& rows, const EffortBudget& budget,
                              const PgdConfig& pgd) {
  PenaltyResult res;
  res.grad = Eigen::VectorXd::Zero(num_params(model));
  if (kind.tag == PenaltyTag::None) return res;

  std::vector<int> all;
  const std::vector<int>* idx = &rows;
  if (rows.empty()) {
    all.resize(ds.rows());
    std::iota(all.begin(), all.end(), 0);
    idx = &all;
  }
  std::vector<int> sizes(ds.num_groups, 0), rej_groups;
  std::vector<double> max_scores;
  if (const auto* glm = std::get_if<GlmScorer>(&model)) {
    // The GLM best response is the same shift for every sample.
    const Eigen::VectorXd shift =
        best_response_glm(*glm, Eigen::VectorXd::Zero(ds.dim()), budget, ds.partition).delta_x;
    const double gain = glm->weights.dot(shift);
    std::vector<int> rej_rows;
    for (int i : *idx) {
      sizes[ds.groups[i]] += 1;
      const double z = ds.features.row(i).dot(glm->weights) + glm->bias;
      if (accepted(sigmoid(z))) continue;
      rej_rows.push_back(i);
      rej_groups.push_back(ds.groups[i]);
      max_scores.push_back(sigmoid(z + gain));
    }
    const ScorePenalty sp = score_penalty(kind, rej_groups, max_scores, sizes);
    res.value = sp.value;
    res.degenerate = sp.degenerate;
    res.excluded_groups = sp.excluded_groups;
    const int d = ds.dim();
    double coef_sum = 0.0;
    for (std::size_t k = 0; k < rej_rows.size(); ++k) {
      const double s = max_scores[k];
      const double c = sp.d_score[k] * s * (1.0 - s);
      if (c == 0.0) continue;
      res.grad.head(d).noalias() += c * ds.features.row(rej_rows[k]).transpose();
      coef_sum += c;
    }
    res.grad.head(d) += coef_sum * shift;
    res.grad(d) += coef_sum;
    return res;
  }
  std::vector<Eigen::VectorXd> improved;
  for (int i : *idx) {
    sizes[ds.groups[i]] += 1;
    const Eigen::VectorXd x = ds.row(i);
    if (accepted(score(model, x))) continue;
    const BestResponse br = best_response(model, x, budget, ds.partition, pgd);
    rej_groups.push_back(ds.groups[i]);
    max_scores.push_back(br.max_score);
    improved.push_back(x + br.delta_x);
  }
  const ScorePenalty sp = score_penalty(kind, rej_groups, max_scores, sizes);
  res.value = sp.value;
  res.degenerate = sp.degenerate;
  res.excluded_groups = sp.excluded_groups;
  Eigen::VectorXd g;
  for (std::size_t k = 0; k < improved.size(); ++k) {
    if (sp.d_score[k] == 0.0) continue;
    logit_param_grad(model, improved[k], g);
    const double s = max_scores[k];
    res.grad += sp.d_score[k] * s * (1.0 - s) * g;
  }
  return res;
}

PenaltyResult ei_penalty_cov(const Scorer& model, const Dataset& ds, const std::vector<int>& rows,
                             const EffortBudget& budget, const PgdConfig& pgd) {
  return compute_penalty({PenaltyTag::EiCov}, model, ds, rows, budget, pgd);
}

PenaltyResult ei_penalty_kde(const Scorer& model, const Dataset& ds, const std::vector<int>& rows,
                             const EffortBudget& budget, double h, const PgdConfig& pgd) {
  return compute_penalty({PenaltyTag::EiKde, h}, model, ds, rows, budget, pgd);
}

PenaltyResult ei_penalty_loss(const Scorer& model, const Dataset& ds, const std::vector<int>& rows,
                              const EffortBudget& budget, const PgdConfig& pgd) {
  return compute_penalty({PenaltyTag::EiLoss}, model, ds, rows, budget, pgd);
}

PenaltyResult be_penalty_loss(const Scorer& model, const Dataset& ds, const std::vector<int>& rows,
                              const EffortBudget& budget, const PgdConfig& pgd) {
  return compute_penalty({PenaltyTag::BeLoss}, model, ds, rows, budget, pgd);
}

}  // namespace improvkit
