#include "improvkit/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "improvkit/error.hpp"
#include "improvkit/gaussian.hpp"
#include "improvkit/log.hpp"
#include "improvkit/parallel.hpp"
#include "improvkit/rng.hpp"

namespace improvkit {

std::string to_string(ModelKind k) { return k == ModelKind::Logreg ? "logreg" : "mlp"; }

ModelKind parse_model_kind(const std::string& s) {
  if (s == "logreg" || s == "glm") return ModelKind::Logreg;
  if (s == "mlp") return ModelKind::Mlp;
  throw ConfigError("unknown model '" + s + "' (valid: logreg, mlp)");
}

std::string to_string(OptimizerKind k) { return k == OptimizerKind::Adam ? "adam" : "sgd"; }

OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "adam" || s == "adaptive_moment") return OptimizerKind::Adam;
  if (s == "sgd" || s == "plain_sgd") return OptimizerKind::PlainSgd;
  throw ConfigError("unknown optimizer '" + s + "' (valid: adam, sgd)");
}

void TrainConfig::validate() const {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw ConfigError("lambda must lie in [0,1)");
  if (epochs < 0) throw ConfigError("epochs must be >= 1");
  if (batch_size < 0) throw ConfigError("batch_size must be >= 1 (or 0 for full batch)");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (model == ModelKind::Mlp && hidden.empty()) throw ConfigError("mlp needs at least one hidden layer");
  for (int h : hidden)
    if (h < 1) throw ConfigError("hidden widths must be >= 1");
  penalty.validate();
  pgd.validate();
}

namespace {

std::string join_doubles(const Eigen::VectorXd& v) {
  std::string s;
  for (int k = 0; k < v.size(); ++k) s += (k ? ", " : "") + format_double(v(k));
  return s;
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + std::to_string(v[k]);
  return s;
}

std::vector<int> parse_ints(const KvConfig& kv, const std::string& key) {
  std::vector<int> out;
  for (const auto& s : kv.get_list(key)) out.push_back(static_cast<int>(parse_int(s, key)));
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

KvConfig TrainConfig::to_kv() const {
  KvConfig kv;
  kv.set("model", to_string(model));
  kv.set("hidden", join_ints(hidden));
  kv.set("penalty", to_string(penalty.tag));
  kv.set("kde_bandwidth", format_double(penalty.kde_bandwidth));
  kv.set("lambda", format_double(lambda));
  kv.set("norm", to_string(budget.norm));
  kv.set("delta", format_double(budget.delta));
  kv.set("cost", join_doubles(budget.cost_diag));
  kv.set("epochs", std::to_string(epochs));
  kv.set("batch_size", std::to_string(batch_size));
  kv.set("learning_rate", format_double(learning_rate));
  kv.set("optimizer", to_string(optimizer));
  kv.set("pgd_steps", std::to_string(pgd.steps));
  kv.set("pgd_step_size", format_double(pgd.step_size));
  kv.set("pgd_restarts", std::to_string(pgd.restarts));
  kv.set("pgd_init", pgd.init == PgdInit::Zero ? "zero" : "random");
  kv.set("seed", std::to_string(seed));
  return kv;
}

TrainConfig TrainConfig::from_kv(const KvConfig& kv) { return from_kv(kv, TrainConfig{}); }

TrainConfig TrainConfig::from_kv(const KvConfig& kv, TrainConfig c) {
  static const std::set<std::string> known = {
      "model", "hidden", "penalty", "kde_bandwidth", "lambda", "norm", "delta", "cost", "epochs",
      "batch_size", "learning_rate", "optimizer", "pgd_steps", "pgd_step_size", "pgd_restarts",
      "pgd_init", "seed"};
  for (const auto& [k, v] : kv.values())
    if (!known.count(k)) throw ConfigError(kv.origin() + ": unknown training key '" + k + "'");
  if (kv.has("model")) c.model = parse_model_kind(kv.get("model"));
  if (kv.has("hidden")) c.hidden = parse_ints(kv, "hidden");
  if (kv.has("penalty")) c.penalty.tag = parse_penalty(kv.get("penalty"));
  c.penalty.kde_bandwidth = kv.get_double_or("kde_bandwidth", c.penalty.kde_bandwidth);
  c.lambda = kv.get_double_or("lambda", c.lambda);
  if (kv.has("norm")) c.budget.norm = parse_norm(kv.get("norm"));
  c.budget.delta = kv.get_double_or("delta", c.budget.delta);
  if (kv.has("cost")) c.budget.cost_diag = to_vector(kv.get_doubles("cost"));
  c.epochs = static_cast<int>(kv.get_int_or("epochs", c.epochs));
  c.batch_size = static_cast<int>(kv.get_int_or("batch_size", c.batch_size));
  c.learning_rate = kv.get_double_or("learning_rate", c.learning_rate);
  if (kv.has("optimizer")) c.optimizer = parse_optimizer(kv.get("optimizer"));
  c.pgd.steps = static_cast<int>(kv.get_int_or("pgd_steps", c.pgd.steps));
  c.pgd.step_size = kv.get_double_or("pgd_step_size", c.pgd.step_size);
  c.pgd.restarts = static_cast<int>(kv.get_int_or("pgd_restarts", c.pgd.restarts));
  if (kv.has("pgd_init")) {
    const std::string init = kv.get("pgd_init");
    if (init != "zero" && init != "random") throw ConfigError("pgd_init must be zero or random");
    c.pgd.init = init == "zero" ? PgdInit::Zero : PgdInit::Random;
  }
  c.seed = static_cast<std::uint64_t>(kv.get_int_or("seed", static_cast<long long>(c.seed)));
  c.validate();
  return c;
}

ObjectiveValue objective_and_gradient(const Scorer& model, const Dataset& ds,
                                      const std::vector<int>& rows, const TrainConfig& cfg) {
  ObjectiveValue out;
  out.grad = Eigen::VectorXd::Zero(num_params(model));
  const int n = rows.empty() ? ds.rows() : static_cast<int>(rows.size());
  if (n == 0) throw PreconditionError("objective on an empty batch");
  Eigen::VectorXd g;
  double total = 0.0;
  const auto* glm = std::get_if<GlmScorer>(&model);
  const int d = ds.dim();
  for (int k = 0; k < n; ++k) {
    const int i = rows.empty() ? k : rows[k];
    if (glm) {
      const double s = sigmoid(ds.features.row(i).dot(glm->weights) + glm->bias);
      const double c = loss_grad_logit(ds.labels[i], s);
      total += loss(ds.labels[i], s);
      out.errors += (accepted(s) ? 1 : 0) != ds.labels[i];
      out.grad.head(d).noalias() += c * ds.features.row(i).transpose();
      out.grad(d) += c;
      continue;
    }
    const double z = logit_param_grad(model, ds.row(i), g);
    const double s = sigmoid(z);
    total += loss(ds.labels[i], s);
    out.errors += (accepted(s) ? 1 : 0) != ds.labels[i];
    out.grad += loss_grad_logit(ds.labels[i], s) * g;
  }
  out.mean_loss = total / n;
  out.grad *= (1.0 - cfg.lambda) / n;
  out.objective = (1.0 - cfg.lambda) * out.mean_loss;
  if (cfg.lambda > 0.0 && cfg.penalty.tag != PenaltyTag::None) {
    PgdConfig pgd = cfg.pgd;
    pgd.seed = cfg.seed;
    const PenaltyResult p = compute_penalty(cfg.penalty, model, ds, rows, cfg.budget, pgd);
    out.penalty = p.value;
    out.objective += cfg.lambda * p.value;
    out.grad += cfg.lambda * p.grad;
  }
  return out;
}

HistoryRow evaluate_history_row(const Scorer& model, const Dataset& ds, const TrainConfig& cfg) {
  HistoryRow row;
  double total = 0.0;
  int wrong = 0;
  const Eigen::VectorXd sc = scores(model, ds.features);
  for (int i = 0; i < ds.rows(); ++i) {
    const double s = sc(i);
    total += loss(ds.labels[i], s);
    wrong += (accepted(s) ? 1 : 0) != ds.labels[i];
  }
  row.error = static_cast<double>(wrong) / ds.rows();
  row.objective = (1.0 - cfg.lambda) * (total / ds.rows());
  if (cfg.penalty.tag != PenaltyTag::None) {
    PgdConfig pgd = cfg.pgd;
    pgd.seed = cfg.seed;
    row.penalty = compute_penalty(cfg.penalty, model, ds, {}, cfg.budget, pgd).value;
    row.objective += cfg.lambda * row.penalty;
  }
  return row;
}

Scorer initial_scorer(const TrainConfig& cfg, int d) {
  if (cfg.model == ModelKind::Logreg) return make_glm(d);
  return make_mlp(d, cfg.hidden, cfg.seed);
}

TrainedModel train(const Dataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  ds.validate();
  if (cfg.penalty.tag != PenaltyTag::None) cfg.budget.validate(static_cast<int>(ds.partition.improvable.size()));
  TrainedModel out;
  out.config = cfg;
  out.partition = ds.partition;
  out.scorer = initial_scorer(cfg, ds.dim());

  const int n = ds.rows();
  const int batch = cfg.batch_size > 0 ? std::min(cfg.batch_size, n) : n;
  const int epochs = cfg.resolved_epochs();
  Eigen::VectorXd theta = get_params(out.scorer);
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(theta.size()), m2 = m1;
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double b1t = 1.0, b2t = 1.0;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(derive_seed(cfg.seed, streams::kShuffle));
  auto fail = [&](int epoch, int b, const ObjectiveValue& ov) {
    std::ostringstream os;
    os << "non-finite objective at epoch " << epoch << ", batch " << b << " (loss " << ov.mean_loss
       << ", penalty " << ov.penalty << ")";
    throw NumericalError(os.str());
  };
  auto step = [&](const Eigen::VectorXd& grad) {
    if (cfg.optimizer == OptimizerKind::Adam) {
      b1t *= b1;
      b2t *= b2;
      m1 = b1 * m1 + (1 - b1) * grad;
      m2 = b2 * m2 + (1 - b2) * grad.cwiseProduct(grad);
      const Eigen::VectorXd mhat = m1 / (1 - b1t);
      const Eigen::VectorXd vhat = m2 / (1 - b2t);
      theta -= cfg.learning_rate * mhat.cwiseQuotient((vhat.cwiseSqrt().array() + eps).matrix());
    } else {
      theta -= cfg.learning_rate * grad;
    }
    set_params(out.scorer, theta);
  };

  // Full batch: the objective evaluated for the next step is exactly the history
  // row of the previous epoch, so one pass per epoch suffices.
  const bool full = batch == n && (cfg.lambda > 0.0 || cfg.penalty.tag == PenaltyTag::None);
  ObjectiveValue ov;
  if (full) ov = objective_and_gradient(out.scorer, ds, {}, cfg);
  std::vector<int> rows;
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    HistoryRow row;
    if (full) {
      if (!std::isfinite(ov.objective) || !ov.grad.allFinite()) fail(epoch, 0, ov);
      step(ov.grad);
      ov = objective_and_gradient(out.scorer, ds, {}, cfg);
      row.objective = ov.objective;
      row.penalty = ov.penalty;
      row.error = static_cast<double>(ov.errors) / n;
    } else {
      if (batch < n) std::shuffle(perm.begin(), perm.end(), rng);
      for (int start = 0, b = 0; start < n; start += batch, ++b) {
        const int end = std::min(n, start + batch);
        rows.assign(perm.begin() + start, perm.begin() + end);
        const ObjectiveValue bv = objective_and_gradient(out.scorer, ds, batch < n ? rows : std::vector<int>{}, cfg);
        if (!std::isfinite(bv.objective) || !bv.grad.allFinite()) fail(epoch, b, bv);
        step(bv.grad);
      }
      row = evaluate_history_row(out.scorer, ds, cfg);
    }
    row.epoch = epoch;
    if (!std::isfinite(row.objective))
      throw NumericalError("non-finite objective at epoch " + std::to_string(epoch));
    out.history.push_back(row);
    log_debug("epoch " + std::to_string(epoch) + " objective " + format_double(row.objective));
  }
  return out;
}

std::string serialize_model(const TrainedModel& m) {
  KvConfig kv;
  kv.set("format", "improvkit-model");
  kv.set("version", "1");
  kv.set("input_dim", std::to_string(input_dim(m.scorer)));
  if (const auto* g = std::get_if<GlmScorer>(&m.scorer)) {
    kv.set("kind", "glm");
    kv.set("weights", join_doubles(g->weights));
    kv.set("bias", format_double(g->bias));
  } else {
    const auto& n = std::get<MlpScorer>(m.scorer);
    kv.set("kind", "mlp");
    std::vector<int> dims{static_cast<int>(n.weights.front().cols())};
    for (std::size_t l = 0; l < n.weights.size(); ++l) {
      dims.push_back(static_cast<int>(n.weights[l].rows()));
      Eigen::MatrixXd rowmajor = n.weights[l].transpose();
      kv.set("layer" + std::to_string(l) + ".weights",
             join_doubles(Eigen::Map<const Eigen::VectorXd>(rowmajor.data(), rowmajor.size())));
      kv.set("layer" + std::to_string(l) + ".bias", join_doubles(n.biases[l]));
    }
    kv.set("layers", join_ints(dims));
  }
  kv.set("partition.improvable", join_ints(m.partition.improvable));
  kv.set("partition.manipulable", join_ints(m.partition.manipulable));
  kv.set("partition.immutable", join_ints(m.partition.immutable));
  const KvConfig train_kv = m.config.to_kv();
  for (const auto& [k, v] : train_kv.values()) kv.set("train." + k, v);
  return kv.dump();
}

TrainedModel parse_model(const std::string& text, const std::string& origin) {
  const KvConfig kv = KvConfig::parse(text, origin);
  if (kv.get_or("format", "") != "improvkit-model") throw DataError(origin + ": not an improvkit model file");
  TrainedModel m;
  try {
    const int d = static_cast<int>(kv.get_int("input_dim"));
    const std::string kind = kv.get("kind");
    if (kind == "glm") {
      GlmScorer g;
      g.weights = to_vector(kv.get_doubles("weights"));
      g.bias = kv.get_double("bias");
      if (g.weights.size() != d) throw DataError(origin + ": weights length != input_dim");
      m.scorer = g;
    } else if (kind == "mlp") {
      const auto dims = parse_ints(kv, "layers");
      if (dims.size() < 2 || dims.front() != d || dims.back() != 1)
        throw DataError(origin + ": malformed layers");
      MlpScorer n;
      for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const auto w = kv.get_doubles("layer" + std::to_string(l) + ".weights");
        const auto b = kv.get_doubles("layer" + std::to_string(l) + ".bias");
        if (static_cast<int>(w.size()) != dims[l] * dims[l + 1] || static_cast<int>(b.size()) != dims[l + 1])
          throw DataError(origin + ": layer " + std::to_string(l) + " has the wrong size");
        Eigen::MatrixXd W(dims[l + 1], dims[l]);
        for (int r = 0; r < W.rows(); ++r)
          for (int c = 0; c < W.cols(); ++c) W(r, c) = w[r * W.cols() + c];
        n.weights.push_back(W);
        n.biases.push_back(to_vector(b));
      }
      m.scorer = n;
    } else {
      throw DataError(origin + ": unknown model kind '" + kind + "'");
    }
    m.partition.improvable = parse_ints(kv, "partition.improvable");
    m.partition.manipulable = parse_ints(kv, "partition.manipulable");
    m.partition.immutable = parse_ints(kv, "partition.immutable");
    m.partition.validate(d);
    KvConfig train_kv;
    for (const auto& [k, v] : kv.values())
      if (k.rfind("train.", 0) == 0) train_kv.set(k.substr(6), v);
    m.config = TrainConfig::from_kv(train_kv);
  } catch (const ConfigError& e) {
    throw DataError(origin + ": " + e.what());
  }
  return m;
}

void save_model(const TrainedModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file " + path);
  out << serialize_model(m);
}

TrainedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str(), path);
}

std::string history_csv(const std::vector<HistoryRow>& h) {
  std::string s = "epoch,objective,penalty,error\n";
  for (const auto& r : h)
    s += std::to_string(r.epoch) + "," + format_double(r.objective) + "," + format_double(r.penalty) + "," +
         format_double(r.error) + "\n";
  return s;
}

std::vector<double> stage2_grid(double lambda_star) {
  std::vector<double> out;
  for (double e : {-0.1, -0.05, 0.0, 0.05, 0.1}) {
    // round to kill representation noise such as 0.4 - 0.1 = 0.30000000000000004
    const double v = std::round(std::max(lambda_star + e, 0.0) * 1e12) / 1e12;
    if (v >= 1.0) continue;
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t select_lambda(const std::vector<CvScore>& c, double baseline_error, double slack) {
  constexpr double kTie = 1e-12;
  std::size_t best = c.size();
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (c[k].folds_used == 0 || !(c[k].error <= baseline_error + slack + kTie)) continue;
    if (best == c.size() || c[k].ei < c[best].ei - kTie ||
        (std::abs(c[k].ei - c[best].ei) <= kTie && c[k].lambda < c[best].lambda))
      best = k;
  }
  if (best == c.size()) throw EvaluationError("cross-validation: no candidate satisfies the error constraint");
  return best;
}

namespace {

// Mean validation (error, ei) of one configuration over the folds.
CvScore cv_score(const Dataset& ds, const std::vector<std::vector<int>>& folds, const TrainConfig& cfg,
                 std::vector<std::string>& flags) {
  CvScore s;
  s.lambda = cfg.lambda;
  const int k = static_cast<int>(folds.size());
  for (int f = 0; f < k; ++f) {
    std::vector<int> train_idx;
    for (int g = 0; g < k; ++g)
      if (g != f) train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
    std::sort(train_idx.begin(), train_idx.end());
    const Dataset tr = ds.subset(train_idx), va = ds.subset(folds[f]);
    const TrainedModel m = train(tr, cfg);
    double ei;
    try {
      EvalOptions opts;
      opts.pgd = cfg.pgd;
      ei = ei_disparity(m.scorer, va, cfg.budget, opts);
    } catch (const EvaluationError& e) {
      flags.push_back("lambda " + format_double(cfg.lambda) + " fold " + std::to_string(f) +
                      " skipped: " + e.what());
      continue;
    }
    s.error += error_rate(m.scorer, va);
    s.ei += ei;
    ++s.folds_used;
  }
  if (s.folds_used) {
    s.error /= s.folds_used;
    s.ei /= s.folds_used;
  }
  return s;
}

std::vector<CvScore> score_lambdas(const Dataset& ds, const std::vector<std::vector<int>>& folds,
                                   const TrainConfig& base, const std::vector<double>& lambdas, int stage,
                                   int jobs, std::vector<std::string>& flags) {
  std::vector<CvScore> out(lambdas.size());
  std::vector<std::vector<std::string>> local(lambdas.size());
  parallel_for(lambdas.size(), jobs, [&](std::size_t i) {
    TrainConfig cfg = base;
    cfg.lambda = lambdas[i];
    out[i] = cv_score(ds, folds, cfg, local[i]);
    out[i].stage = stage;
  });
  for (auto& l : local) flags.insert(flags.end(), l.begin(), l.end());
  return out;
}

}  // namespace

CvResult cross_validate(const Dataset& ds, const TrainConfig& base, const CvOptions& opts) {
  if (opts.stage1.empty()) throw ConfigError("cross-validation needs a non-empty lambda grid");
  const auto folds = kfold_indices(ds.rows(), opts.folds, base.seed);
  CvResult res;
  TrainConfig cfg = base;
  res.learning_rate = base.learning_rate;
  if (opts.tune_learning_rate) {
    TrainConfig erm = base;
    erm.lambda = 0.0;
    erm.penalty.tag = PenaltyTag::None;
    double best_err = 2.0;
    for (double lr : opts.lr_grid) {
      erm.learning_rate = lr;
      const CvScore s = cv_score(ds, folds, erm, res.flags);
      if (s.folds_used && s.error < best_err - 1e-12) {
        best_err = s.error;
        res.learning_rate = lr;
      }
    }
    cfg.learning_rate = res.learning_rate;
  }
  std::vector<double> grid1 = opts.stage1;
  if (std::find(grid1.begin(), grid1.end(), 0.0) == grid1.end()) grid1.insert(grid1.begin(), 0.0);
  auto s1 = score_lambdas(ds, folds, cfg, grid1, 1, opts.jobs, res.flags);
  res.scores = s1;
  for (const auto& s : s1)
    if (s.lambda == 0.0) res.baseline_error = s.error;
  const double star = s1[select_lambda(s1, res.baseline_error, opts.error_slack)].lambda;

  std::vector<double> grid2 = stage2_grid(star);
  std::vector<CvScore> s2(grid2.size());
  std::vector<double> todo;
  for (std::size_t k = 0; k < grid2.size(); ++k) {
    auto hit = std::find_if(s1.begin(), s1.end(), [&](const CvScore& s) { return std::abs(s.lambda - grid2[k]) < 1e-12; });
    if (hit == s1.end()) todo.push_back(grid2[k]);
  }
  auto fresh = score_lambdas(ds, folds, cfg, todo, 2, opts.jobs, res.flags);
  for (std::size_t k = 0; k < grid2.size(); ++k) {
    auto hit = std::find_if(s1.begin(), s1.end(), [&](const CvScore& s) { return std::abs(s.lambda - grid2[k]) < 1e-12; });
    if (hit != s1.end()) {
      s2[k] = *hit;
      s2[k].stage = 2;
    } else {
      s2[k] = *std::find_if(fresh.begin(), fresh.end(), [&](const CvScore& s) { return s.lambda == grid2[k]; });
    }
  }
  res.scores.insert(res.scores.end(), fresh.begin(), fresh.end());
  res.best_lambda = s2[select_lambda(s2, res.baseline_error, opts.error_slack)].lambda;
  return res;
}

std::vector<std::size_t> pareto_frontier(const std::vector<std::pair<double, double>>& p) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (std::isnan(p[i].first) || std::isnan(p[i].second)) continue;
    bool dominated = false;
    for (std::size_t j = 0; j < p.size() && !dominated; ++j) {
      if (j == i) continue;
      dominated = p[j].first <= p[i].first && p[j].second <= p[i].second &&
                  (p[j].first < p[i].first || p[j].second < p[i].second);
    }
    if (!dominated) out.push_back(i);
  }
  return out;
}

SweepResult pareto_sweep(const Dataset& ds, const TrainConfig& base, const std::vector<double>& lambdas,
                         const std::vector<std::uint64_t>& seeds, double test_fraction, int jobs) {
  if (lambdas.empty() || seeds.empty()) throw ConfigError("pareto sweep needs non-empty lambda and seed lists");
  const std::size_t runs = lambdas.size() * seeds.size();
  std::vector<SweepRow> train_rows(runs), test_rows(runs);
  parallel_for(runs, jobs, [&](std::size_t r) {
    const double lambda = lambdas[r / seeds.size()];
    const std::uint64_t seed = seeds[r % seeds.size()];
    SweepRow a{lambda, seed, "train", {}, ""}, b{lambda, seed, "test", {}, ""};
    try {
      auto [tr, te] = split(ds, test_fraction, seed);
      TrainConfig cfg = base;
      cfg.lambda = lambda;
      cfg.seed = seed;
      const TrainedModel m = train(tr, cfg);
      EvalOptions opts;
      opts.pgd = cfg.pgd;
      a.report = full_report(m.scorer, tr, cfg.budget, opts);
      b.report = full_report(m.scorer, te, cfg.budget, opts);
    } catch (const std::exception& e) {
      a.failure = b.failure = e.what();
      log_error("sweep run lambda=" + format_double(lambda) + " seed=" + std::to_string(seed) +
                " failed: " + e.what());
    }
    train_rows[r] = a;
    test_rows[r] = b;
  });
  SweepResult res;
  std::vector<std::pair<double, double>> pts;
  std::vector<std::size_t> where;
  for (std::size_t r = 0; r < runs; ++r) {
    res.rows.push_back(train_rows[r]);
    res.rows.push_back(test_rows[r]);
    if (test_rows[r].failure.empty()) {
      pts.emplace_back(test_rows[r].report.error_rate, test_rows[r].report.ei);
      where.push_back(res.rows.size() - 1);
    }
  }
  for (std::size_t k : pareto_frontier(pts)) res.frontier.push_back(where[k]);
  return res;
}

std::string sweep_csv(const SweepResult& r) {
  std::string s = "lambda,seed,split,error,ei,dp,eo,eod,be,er\n";
  for (const auto& row : r.rows) {
    s += format_double(row.lambda) + "," + std::to_string(row.seed) + "," + row.split + ",";
    if (row.failure.empty()) s += row.report.csv_values();
    else s += "nan,nan,nan,nan,nan,nan,nan";
    s += "\n";
  }
  return s;
}

}  // namespace improvkit
