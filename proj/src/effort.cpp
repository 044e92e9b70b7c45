#include "improvkit/effort.hpp"

#include <cmath>
#include <random>

#include "improvkit/error.hpp"
#include "improvkit/gaussian.hpp"
#include "improvkit/rng.hpp"

namespace improvkit {

std::string to_string(NormKind k) { return k == NormKind::Linf ? "linf" : "l2"; }

NormKind parse_norm(const std::string& s) {
  if (s == "linf") return NormKind::Linf;
  if (s == "l2" || s == "l2_weighted") return NormKind::L2Weighted;
  throw ConfigError("unknown norm '" + s + "' (valid: linf, l2)");
}

double EffortBudget::measure(const Eigen::VectorXd& v) const {
  if (v.size() == 0) return 0.0;
  if (norm == NormKind::Linf) return v.cwiseAbs().maxCoeff();
  double s = 0.0;
  for (int k = 0; k < v.size(); ++k) s += cost(k) * v(k) * v(k);
  return std::sqrt(s);
}

double EffortBudget::dual_norm(const Eigen::VectorXd& w) const {
  if (norm == NormKind::Linf) return w.cwiseAbs().sum();
  double s = 0.0;
  for (int k = 0; k < w.size(); ++k) s += w(k) * w(k) / cost(k);
  return std::sqrt(s);
}

void EffortBudget::validate(int n_improvable) const {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigError("effort delta must be >= 0");
  if (cost_diag.size() && cost_diag.size() != n_improvable)
    throw ConfigError("cost_diag length must equal the number of improvable features");
  if (cost_diag.size() && !(cost_diag.minCoeff() > 0.0)) throw ConfigError("cost_diag must be > 0");
}

void PgdConfig::validate() const {
  if (steps < 1) throw ConfigError("pgd steps must be >= 1");
  if (step_size < 0.0) throw ConfigError("pgd step_size must be > 0 (or 0 for delta/5)");
  if (restarts < 1) throw ConfigError("pgd restarts must be >= 1");
}

Eigen::VectorXd gather(const Eigen::VectorXd& x, const std::vector<int>& idx) {
  Eigen::VectorXd out(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out(k) = x(idx[k]);
  return out;
}

namespace {

Eigen::VectorXd scatter(const Eigen::VectorXd& v, const std::vector<int>& idx, int d) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
  for (std::size_t k = 0; k < idx.size(); ++k) out(idx[k]) = v(k);
  return out;
}

void project(Eigen::VectorXd& v, const EffortBudget& b) {
  if (b.norm == NormKind::Linf) {
    v = v.cwiseMax(-b.delta).cwiseMin(b.delta);
    return;
  }
  const double mu = b.measure(v);
  if (mu > b.delta) v *= b.delta / mu;
}

// Unit-measure steepest ascent direction for a linear objective g.v.
Eigen::VectorXd ascent_direction(const Eigen::VectorXd& g, const EffortBudget& b) {
  if (b.norm == NormKind::Linf) return g.unaryExpr([](double t) { return double((t > 0) - (t < 0)); });
  Eigen::VectorXd d(g.size());
  for (int k = 0; k < g.size(); ++k) d(k) = g(k) / b.cost(k);
  const double n = std::sqrt(g.dot(d));
  if (n == 0.0) return Eigen::VectorXd::Zero(g.size());
  return d / n;
}

}  // namespace

BestResponse best_response_glm(const GlmScorer& model, const Eigen::VectorXd& x,
                               const EffortBudget& budget, const FeaturePartition& partition) {
  const auto& I = partition.improvable;
  const Eigen::VectorXd w = gather(model.weights, I);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(I.size());
  if (budget.delta > 0.0 && w.size() && w.cwiseAbs().maxCoeff() > 0.0) {
    // delta*sign(w) for Linf, delta*C^-1 w / sqrt(w' C^-1 w) for weighted L2
    v = budget.delta * ascent_direction(w, budget);
  }
  BestResponse br;
  br.delta_x = scatter(v, I, static_cast<int>(x.size()));
  br.max_score = sigmoid(model.weights.dot(x) + model.bias + w.dot(v));
  return br;
}

BestResponse best_response_pgd(const Scorer& model, const Eigen::VectorXd& x,
                               const EffortBudget& budget, const PgdConfig& cfg,
                               const FeaturePartition& partition) {
  cfg.validate();
  const auto& I = partition.improvable;
  const int d = static_cast<int>(x.size());
  BestResponse best;
  best.delta_x = Eigen::VectorXd::Zero(d);
  best.max_score = score(model, x);
  if (budget.delta == 0.0 || I.empty()) return best;
  const double gamma = cfg.step_size > 0.0 ? cfg.step_size : budget.delta / 5.0;

  Rng rng(derive_seed(cfg.seed, streams::kPgd));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd xt(d);
  for (int r = 0; r < cfg.restarts; ++r) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(I.size());
    if (cfg.init == PgdInit::Random) {
      for (int k = 0; k < v.size(); ++k) v(k) = budget.delta * u(rng);
      project(v, budget);
    }
    // Ascent with step halving: a proposal is kept only if it raises the score.
    double step_size = gamma;
    auto eval = [&](const Eigen::VectorXd& vv) {
      xt = x;
      for (std::size_t k = 0; k < I.size(); ++k) xt(I[k]) += vv(k);
      return score(model, xt);
    };
    double current = eval(v);
    if (current > best.max_score) {
      best.max_score = current;
      best.delta_x = scatter(v, I, d);
    }
    Eigen::VectorXd g = gather(logit_input_grad(model, xt), I);
    for (int step = 0; step < cfg.steps; ++step) {
      if (!g.allFinite()) throw NumericalError("non-finite input gradient in PGD");
      Eigen::VectorXd proposal = v + step_size * ascent_direction(g, budget);
      project(proposal, budget);
      const double s = eval(proposal);
      if (s > current) {
        v = proposal;
        current = s;
        g = gather(logit_input_grad(model, xt), I);
        if (s > best.max_score) {
          best.max_score = s;
          best.delta_x = scatter(v, I, d);
        }
      } else {
        step_size /= 2.0;
      }
    }
  }
  return best;
}

BestResponse best_response(const Scorer& model, const Eigen::VectorXd& x, const EffortBudget& budget,
                           const FeaturePartition& partition, const PgdConfig& cfg) {
  if (const auto* g = std::get_if<GlmScorer>(&model)) return best_response_glm(*g, x, budget, partition);
  return best_response_pgd(model, x, budget, cfg, partition);
}

double recourse_distance(const Scorer& model, const Eigen::VectorXd& x, const EffortBudget& budget,
                         const FeaturePartition& partition, double delta_max, const PgdConfig& cfg,
                         bool* flagged) {
  if (flagged) *flagged = false;
  const double z = logit(model, x);
  if (z >= 0.0) throw PreconditionError("recourse_distance called on an accepted sample");
  if (const auto* g = std::get_if<GlmScorer>(&model)) {
    const double dual = budget.dual_norm(gather(g->weights, partition.improvable));
    if (dual > 0.0) return -z / dual;
    if (flagged) *flagged = true;
    return delta_max;
  }
  auto reaches = [&](double delta) {
    EffortBudget b = budget;
    b.delta = delta;
    return accepted(best_response_pgd(model, x, b, cfg, partition).max_score);
  };
  if (!reaches(delta_max)) {
    if (flagged) *flagged = true;
    return delta_max;
  }
  double lo = 0.0, hi = delta_max;
  while (hi - lo > kRecourseTol) {
    const double mid = 0.5 * (lo + hi);
    (reaches(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace improvkit
