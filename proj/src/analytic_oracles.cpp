#include "improvkit/analytic_oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "improvkit/error.hpp"
#include "improvkit/gaussian.hpp"
#include "improvkit/kv_config.hpp"

namespace improvkit::oracles {

namespace {

constexpr double kTwoPi = 6.283185307179586476925;
constexpr double kMinRejection = 1e-12;
constexpr double kErrorTie = 1e-12;

// Moments of w.x for one (y, z) cluster.
struct Projected {
  double m = 0.0;
  double v = 1.0;
};

Projected project(const Eigen::Vector2d& w, const SyntheticConfig& cfg, int y, int z) {
  const auto& mu = cfg.mean(y, z);
  const auto& var = cfg.var(y, z);
  return {w.dot(mu), std::sqrt(w[0] * w[0] * var[0] + w[1] * w[1] * var[1])};
}

double group_weight(const SyntheticConfig& cfg, int z) { return z == 1 ? cfg.p_z : 1.0 - cfg.p_z; }

// Per-group terms at one (theta, b).
struct GroupTerms {
  double err = 0.0;     // P(misclassified | z)
  double rej = 0.0;     // P(w.x < b | z)
  double imp = 0.0;     // P(b' <= w.x < b | z)
  double recnum = 0.0;  // E[(b - w.x) 1{w.x < b} | z] / (|sin| + |cos|)
};

GroupTerms group_terms(double theta, double b, int z, const SyntheticConfig& cfg, double delta) {
  const Eigen::Vector2d w(std::sin(theta), std::cos(theta));
  const double l1 = std::abs(w[0]) + std::abs(w[1]);
  const double b_shift = b - delta * l1;
  GroupTerms t;
  for (int y = 0; y < 2; ++y) {
    const double py = y == 1 ? cfg.p_y_given_z[z] : 1.0 - cfg.p_y_given_z[z];
    const Projected p = project(w, cfg, y, z);
    const double a = (b - p.m) / p.v;
    const double below = normal_cdf(a);
    t.err += py * (y == 1 ? below : normal_tail(a));
    t.rej += py * below;
    t.imp += py * (below - normal_cdf((b_shift - p.m) / p.v));
    t.recnum += py * ((b - p.m) * below + p.v * normal_pdf(a)) / l1;
  }
  return t;
}

double gap2(double n0, double d0, double n1, double d1, double w0, double w1) {
  const double pooled = (w0 * n0 + w1 * n1) / (w0 * d0 + w1 * d1);
  return std::max(std::abs(n0 / d0 - pooled), std::abs(n1 / d1 - pooled));
}

// NaN when the notion is undefined (a group with negligible rejection mass).
double disparity_from_terms(Notion n, const GroupTerms& g0, const GroupTerms& g1, double w0, double w1) {
  switch (n) {
    case Notion::Be:
      return std::abs(g0.imp - g1.imp) * std::max(w0, w1) / (w0 + w1);
    case Notion::Ei:
    case Notion::Er:
      if (g0.rej < kMinRejection || g1.rej < kMinRejection) return std::numeric_limits<double>::quiet_NaN();
      return n == Notion::Ei ? gap2(g0.imp, g0.rej, g1.imp, g1.rej, w0, w1)
                             : gap2(g0.recnum, g0.rej, g1.recnum, g1.rej, w0, w1);
  }
  return 0.0;
}

struct Candidate {
  double error = std::numeric_limits<double>::infinity();
  double disparity = std::numeric_limits<double>::infinity();
  GaussianAwareClassifier c;
  bool found = false;
};

// Lower error, then lower disparity, then lexicographically smaller (theta, b0, b1).
bool better(double err, double disp, const GaussianAwareClassifier& c, const Candidate& cur) {
  if (!cur.found) return true;
  if (err < cur.error - kErrorTie) return true;
  if (err > cur.error + kErrorTie) return false;
  if (disp != cur.disparity) return disp < cur.disparity;
  if (c.theta != cur.c.theta) return c.theta < cur.c.theta;
  if (c.b0 != cur.c.b0) return c.b0 < cur.c.b0;
  return c.b1 < cur.c.b1;
}

double wrap_angle(double t) {
  t = std::fmod(t, kTwoPi);
  return t < 0 ? t + kTwoPi : t;
}

// Two local refinement rounds around `start` at step/10, step/100.
Candidate refine(Candidate best, double c_limit, const SyntheticConfig& cfg, double delta,
                 const TradeoffOptions& opts, double h_theta, double h_b) {
  const double w0 = group_weight(cfg, 0), w1 = group_weight(cfg, 1);
  for (int r = 0; r < opts.refine_rounds; ++r) {
    h_theta /= 10.0;
    h_b /= 10.0;
    const GaussianAwareClassifier center = best.c;
    for (int i = -10; i <= 10; ++i) {
      const double theta = wrap_angle(center.theta + i * h_theta);
      std::vector<GroupTerms> t0(21), t1(21);
      for (int j = -10; j <= 10; ++j) {
        t0[j + 10] = group_terms(theta, center.b0 + j * h_b, 0, cfg, delta);
        t1[j + 10] = group_terms(theta, center.b1 + j * h_b, 1, cfg, delta);
      }
      for (int j = 0; j < 21; ++j) {
        for (int k = 0; k < 21; ++k) {
          const double d = disparity_from_terms(opts.notion, t0[j], t1[k], w0, w1);
          if (std::isnan(d) || d > c_limit) continue;
          const double err = w0 * t0[j].err + w1 * t1[k].err;
          GaussianAwareClassifier c{theta, center.b0 + (j - 10) * h_b, center.b1 + (k - 10) * h_b};
          if (better(err, d, c, best)) best = {err, d, c, true};
        }
      }
    }
  }
  return best;
}

struct CoarseTable {
  std::vector<double> thetas, bs;
  std::vector<GroupTerms> terms[2];  // [theta * nb + b]
};

CoarseTable coarse_table(const SyntheticConfig& cfg, double delta, const TradeoffOptions& opts) {
  CoarseTable t;
  const int n = opts.grid;
  for (int i = 0; i < n; ++i) t.thetas.push_back(kTwoPi * i / n);
  for (int j = 0; j < n; ++j) t.bs.push_back(opts.b_lo + (opts.b_hi - opts.b_lo) * j / (n - 1));
  for (int z = 0; z < 2; ++z) {
    t.terms[z].resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) t.terms[z][i * n + j] = group_terms(t.thetas[i], t.bs[j], z, cfg, delta);
  }
  return t;
}

// Sorted c values; bucket k collects combos with disparity in (c_{k-1}, c_k] (+ tol).
std::vector<Candidate> coarse_buckets(const CoarseTable& t, const std::vector<double>& limits,
                                      const SyntheticConfig& cfg, const TradeoffOptions& opts) {
  const double w0 = group_weight(cfg, 0), w1 = group_weight(cfg, 1);
  const int n = static_cast<int>(t.thetas.size());
  std::vector<Candidate> bucket(limits.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const GroupTerms& g0 = t.terms[0][i * n + j];
      for (int k = 0; k < n; ++k) {
        const GroupTerms& g1 = t.terms[1][i * n + k];
        const double d = disparity_from_terms(opts.notion, g0, g1, w0, w1);
        if (std::isnan(d)) continue;
        const auto it = std::lower_bound(limits.begin(), limits.end(), d);
        if (it == limits.end()) continue;
        const double err = w0 * g0.err + w1 * g1.err;
        Candidate& cur = bucket[it - limits.begin()];
        if (cur.found && err > cur.error + kErrorTie) continue;
        GaussianAwareClassifier c{t.thetas[i], t.bs[j], t.bs[k]};
        if (better(err, d, c, cur)) cur = {err, d, c, true};
      }
    }
  }
  return bucket;
}

}  // namespace

std::string to_string(Notion n) {
  switch (n) {
    case Notion::Ei: return "ei";
    case Notion::Be: return "be";
    case Notion::Er: return "er";
  }
  return "?";
}

Notion parse_notion(const std::string& s) {
  if (s == "ei") return Notion::Ei;
  if (s == "be") return Notion::Be;
  if (s == "er") return Notion::Er;
  throw ConfigError("unknown oracle notion '" + s + "' (valid: ei, be, er)");
}

double qform_error(const GaussianAwareClassifier& c, const SyntheticConfig& cfg) {
  cfg.validate();
  return group_weight(cfg, 0) * group_terms(c.theta, c.b0, 0, cfg, 0.0).err +
         group_weight(cfg, 1) * group_terms(c.theta, c.b1, 1, cfg, 0.0).err;
}

double qform_disparity(Notion n, const GaussianAwareClassifier& c, const SyntheticConfig& cfg, double delta) {
  cfg.validate();
  if (!(delta >= 0.0)) throw PreconditionError("delta must be non-negative");
  const GroupTerms g0 = group_terms(c.theta, c.b0, 0, cfg, delta);
  const GroupTerms g1 = group_terms(c.theta, c.b1, 1, cfg, delta);
  const double d = disparity_from_terms(n, g0, g1, group_weight(cfg, 0), group_weight(cfg, 1));
  if (std::isnan(d)) throw EvaluationError(to_string(n) + " disparity: rejection mass below 1e-12");
  return d;
}

double qform_ei_disparity(const GaussianAwareClassifier& c, const SyntheticConfig& cfg, double delta) {
  return qform_disparity(Notion::Ei, c, cfg, delta);
}

double qform_be_disparity(const GaussianAwareClassifier& c, const SyntheticConfig& cfg, double delta) {
  return qform_disparity(Notion::Be, c, cfg, delta);
}

double qform_er_disparity(const GaussianAwareClassifier& c, const SyntheticConfig& cfg) {
  return qform_disparity(Notion::Er, c, cfg, 0.0);
}

GlmScorer to_glm(const GaussianAwareClassifier& c, bool group_as_feature) {
  GlmScorer g;
  const Eigen::Vector2d w = c.w();
  if (group_as_feature) {
    g.weights = Eigen::Vector3d(w[0], w[1], -(c.b1 - c.b0));
  } else {
    if (c.b0 != c.b1) throw PreconditionError("group-specific thresholds need z as a feature");
    g.weights = w;
  }
  g.bias = -c.b0;
  return g;
}

TradeoffPoint unconstrained_optimum(const SyntheticConfig& cfg, double delta, const TradeoffOptions& opts) {
  const double inf = std::numeric_limits<double>::infinity();
  auto pts = optimal_tradeoff(cfg, delta, {inf}, opts);
  return pts.front();
}

std::vector<double> default_c_grid(const SyntheticConfig& cfg, double delta, int n, const TradeoffOptions& opts) {
  if (n < 2) throw PreconditionError("c grid needs at least two points");
  const double top = unconstrained_optimum(cfg, delta, opts).disparity;
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) grid[i] = top * i / (n - 1);
  return grid;
}

std::vector<TradeoffPoint> optimal_tradeoff(const SyntheticConfig& cfg, double delta,
                                            const std::vector<double>& c_grid, const TradeoffOptions& opts) {
  cfg.validate();
  if (c_grid.empty()) throw PreconditionError("empty c grid");
  if (opts.grid < 3 || !(opts.b_hi > opts.b_lo)) throw PreconditionError("bad solver grid");
  for (double c : c_grid)
    if (!(c >= 0.0)) throw PreconditionError("c values must be non-negative");

  // Distinct feasibility limits in ascending order, plus the unconstrained one.
  std::vector<double> limits;
  for (double c : c_grid) limits.push_back(c + opts.feasibility_tol);
  limits.push_back(std::numeric_limits<double>::infinity());
  std::sort(limits.begin(), limits.end());
  limits.erase(std::unique(limits.begin(), limits.end()), limits.end());

  const CoarseTable table = coarse_table(cfg, delta, opts);
  std::vector<Candidate> bucket = coarse_buckets(table, limits, cfg, opts);
  // Coarse optimum per limit = best over buckets at or below it.
  std::vector<Candidate> coarse(limits.size());
  Candidate run;
  for (std::size_t k = 0; k < limits.size(); ++k) {
    const Candidate& b = bucket[k];
    if (b.found && better(b.error, b.disparity, b.c, run)) run = b;
    coarse[k] = run;
  }

  const double h_theta = kTwoPi / opts.grid;
  const double h_b = (opts.b_hi - opts.b_lo) / (opts.grid - 1);
  std::vector<Candidate> refined(limits.size());
  for (std::size_t k = 0; k < limits.size(); ++k) {
    if (!coarse[k].found) continue;
    refined[k] = refine(coarse[k], limits[k], cfg, delta, opts, h_theta, h_b);
  }

  std::vector<TradeoffPoint> out;
  for (double c : c_grid) {
    const double limit = c + opts.feasibility_tol;
    Candidate best;
    for (std::size_t k = 0; k < limits.size(); ++k) {
      const Candidate& r = refined[k];
      if (r.found && r.disparity <= limit && better(r.error, r.disparity, r.c, best)) best = r;
    }
    if (!best.found) throw NumericalError("optimal_tradeoff: no feasible classifier for c = " + format_double(c));
    out.push_back({c, best.error, best.disparity, best.c});
  }
  // Monotonicity holds by construction; keep the assertion as a guard.
  std::vector<std::size_t> order(out.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return out[a].c < out[b].c; });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (out[order[i]].error > out[order[i - 1]].error + kErrorTie)
      throw NumericalError("optimal_tradeoff: error increased with c");
  return out;
}

double tradeoff_error_at(const std::vector<TradeoffPoint>& curve, double c) {
  if (curve.empty()) throw PreconditionError("empty tradeoff curve");
  std::vector<TradeoffPoint> pts = curve;
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.c < b.c; });
  if (c <= pts.front().c) return pts.front().error;
  if (c >= pts.back().c) return pts.back().error;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (c <= pts[i].c) {
      const double span = pts[i].c - pts[i - 1].c;
      if (span <= 0) return pts[i].error;
      const double t = (c - pts[i - 1].c) / span;
      return pts[i - 1].error + t * (pts[i].error - pts[i - 1].error);
    }
  }
  return pts.back().error;
}

std::string tradeoff_csv(const std::vector<TradeoffPoint>& curve) {
  std::ostringstream os;
  os << "c,error,disparity,theta,b0,b1\n";
  for (const auto& p : curve) {
    os << format_double(p.c) << ',' << format_double(p.error) << ',' << format_double(p.disparity) << ','
       << format_double(p.classifier.theta) << ',' << format_double(p.classifier.b0) << ','
       << format_double(p.classifier.b1) << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------

std::string to_string(const Rational& r) { return r.str(); }

double to_double(const Rational& r) { return r.convert_to<double>(); }

Rational PiecewiseUniform::mass() const {
  Rational s = 0;
  for (const auto& seg : segments) s += seg.density * (seg.right - seg.left);
  return s;
}

Rational PiecewiseUniform::mass_between(const Rational& a, const Rational& b) const {
  Rational s = 0;
  for (const auto& seg : segments) {
    const Rational lo = std::max(a, seg.left), hi = std::min(b, seg.right);
    if (hi > lo) s += seg.density * (hi - lo);
  }
  return s;
}

Rational PiecewiseUniform::moment_below(const Rational& t) const {
  Rational s = 0;
  for (const auto& seg : segments) {
    const Rational hi = std::min(t, seg.right);
    if (hi > seg.left) s += seg.density * (hi * hi - seg.left * seg.left) / 2;
  }
  return s;
}

std::vector<Rational> PiecewiseUniform::breakpoints() const {
  std::vector<Rational> pts;
  for (const auto& seg : segments) {
    pts.push_back(seg.left);
    pts.push_back(seg.right);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

Rational PiecewiseUniform::density_at(const Rational& x) const {
  Rational d = 0;
  for (const auto& seg : segments)
    if (seg.left <= x && x < seg.right) d += seg.density;
  return d;
}

PiecewiseUniform PiecewiseUniform::canonical() const {
  const auto pts = breakpoints();
  PiecewiseUniform out;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Rational d = density_at((pts[i] + pts[i + 1]) / 2);
    if (d == 0) continue;
    if (!out.segments.empty() && out.segments.back().right == pts[i] && out.segments.back().density == d) {
      out.segments.back().right = pts[i + 1];
    } else {
      out.segments.push_back({pts[i], pts[i + 1], d});
    }
  }
  return out;
}

PiecewiseUniform PiecewiseUniform::improve(const Rational& tau, const Rational& delta) const {
  const Rational lo = tau - delta;
  PiecewiseUniform raw;
  for (const auto& seg : segments) {
    const Rational cuts[] = {seg.left, std::clamp(lo, seg.left, seg.right), std::clamp(tau, seg.left, seg.right),
                             seg.right};
    for (int i = 0; i < 3; ++i) {
      if (cuts[i + 1] <= cuts[i]) continue;
      const bool moves = i == 1;
      const Rational shift = moves ? delta : Rational(0);
      raw.segments.push_back({cuts[i] + shift, cuts[i + 1] + shift, seg.density});
    }
  }
  return raw.canonical();
}

Rational tv_distance(const PiecewiseUniform& p, const PiecewiseUniform& q) {
  std::vector<Rational> pts = p.breakpoints();
  const auto qp = q.breakpoints();
  pts.insert(pts.end(), qp.begin(), qp.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  Rational s = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Rational mid = (pts[i] + pts[i + 1]) / 2;
    s += abs(p.density_at(mid) - q.density_at(mid)) * (pts[i + 1] - pts[i]);
  }
  return s / 2;
}

AppendixExample parse_example(const std::string& s) {
  if (s == "d1") return AppendixExample::D1;
  if (s == "d2") return AppendixExample::D2;
  throw ConfigError("unknown example '" + s + "' (valid: d1, d2)");
}

AppendixDInstance appendix_d_instance(AppendixExample ex, const Rational& m) {
  if (m <= 0) throw PreconditionError("m must be positive");
  AppendixDInstance inst;
  inst.delta = m / 2;
  if (ex == AppendixExample::D1) {
    inst.p[0].segments = {{-m, m / 2, 1 / (2 * m)}, {m / 2, 3 * m / 2, 1 / (4 * m)}};
    inst.p[1].segments = {{-m, m, 1 / (2 * m)}};
    inst.label_threshold[0] = m / 2;
    inst.label_threshold[1] = 0;
    inst.p_group[0] = Rational(1, 4);
    inst.p_group[1] = Rational(3, 4);
  } else {
    const Rational d = 2 / (3 * m);
    inst.p[0].segments = {{-10 * m, -19 * m / 2, d}, {-m / 2, m / 2, d}};
    inst.p[1].segments = {{-m, m / 2, d}};
    inst.label_threshold[0] = 0;
    inst.label_threshold[1] = 0;
    inst.p_group[0] = Rational(1, 2);
    inst.p_group[1] = Rational(1, 2);
  }
  return inst;
}

Rational appendix_error(const AppendixDInstance& inst, const Rational& tau0, const Rational& tau1) {
  const Rational tau[2] = {tau0, tau1};
  Rational err = 0;
  for (int z = 0; z < 2; ++z) {
    const Rational lo = std::min(tau[z], inst.label_threshold[z]);
    const Rational hi = std::max(tau[z], inst.label_threshold[z]);
    err += inst.p_group[z] * inst.p[z].mass_between(lo, hi);
  }
  return err;
}

namespace {

// Max gap to the P(z)-weighted pool; groups with zero denominator are skipped.
Rational rational_gap(const Rational num[2], const Rational den[2], const Rational w[2]) {
  Rational sn = 0, sd = 0;
  for (int z = 0; z < 2; ++z) {
    if (den[z] == 0) continue;
    sn += w[z] * num[z];
    sd += w[z] * den[z];
  }
  if (sd == 0) return 0;
  const Rational pooled = sn / sd;
  Rational g = 0;
  for (int z = 0; z < 2; ++z)
    if (den[z] != 0) g = std::max(g, Rational(abs(num[z] / den[z] - pooled)));
  return g;
}

}  // namespace

Rational appendix_disparity(const std::string& notion, const AppendixDInstance& inst, const Rational& tau0,
                            const Rational& tau1) {
  const Rational tau[2] = {tau0, tau1};
  Rational num[2], den[2];
  const Rational lowest = std::min(inst.p[0].segments.front().left, inst.p[1].segments.front().left) - 1;
  for (int z = 0; z < 2; ++z) {
    const Rational rejected = inst.p[z].mass_between(lowest, tau[z]);
    const Rational improvable = inst.p[z].mass_between(tau[z] - inst.delta, tau[z]);
    if (notion == "ei") {
      num[z] = improvable;
      den[z] = rejected;
    } else if (notion == "be") {
      num[z] = improvable;
      den[z] = 1;
    } else if (notion == "er") {
      num[z] = tau[z] * rejected - inst.p[z].moment_below(tau[z]);
      den[z] = rejected;
    } else if (notion == "dp") {
      num[z] = 1 - rejected;
      den[z] = 1;
    } else if (notion == "erm") {
      return 0;
    } else {
      throw ConfigError("unknown notion '" + notion + "' (valid: erm, dp, be, ei, er)");
    }
  }
  return rational_gap(num, den, inst.p_group);
}

Rational appendix_tv_after(const AppendixDInstance& inst, const Rational& tau0, const Rational& tau1) {
  return tv_distance(inst.p[0].improve(tau0, inst.delta), inst.p[1].improve(tau1, inst.delta));
}

const PolicyOutcome& AppendixDReport::policy(const std::string& name) const {
  for (const auto& p : published)
    if (p.policy == name) return p;
  throw PreconditionError("no published policy '" + name + "' in example " + example);
}

const PolicyOutcome& AppendixDReport::solved_policy(const std::string& name) const {
  for (const auto& p : solved)
    if (p.policy == name) return p;
  throw PreconditionError("no solved policy '" + name + "' in example " + example);
}

std::string AppendixDReport::to_text() const {
  std::ostringstream os;
  auto line = [&](const std::string& key, const Rational& v) {
    os << key << " = " << to_string(v) << " (" << format_double(to_double(v)) << ")\n";
  };
  os << "example = " << example << "\n";
  line("m", m);
  line("tv_before", tv_before);
  for (const auto* list : {&published, &solved}) {
    const std::string prefix = list == &published ? "published." : "solved.";
    for (const auto& p : *list) {
      const std::string k = prefix + p.policy + ".";
      line(k + "tau0", p.tau0);
      line(k + "tau1", p.tau1);
      line(k + "error", p.error);
      line(k + "disparity", p.disparity);
      line(k + "tv_after", p.tv_after);
    }
  }
  return os.str();
}

AppendixDReport appendix_d_oracle(AppendixExample ex, const Rational& m) {
  const AppendixDInstance inst = appendix_d_instance(ex, m);
  AppendixDReport rep;
  rep.example = ex == AppendixExample::D1 ? "d1" : "d2";
  rep.m = m;
  rep.tv_before = tv_distance(inst.p[0], inst.p[1]);

  auto outcome = [&](const std::string& name, const Rational& t0, const Rational& t1) {
    return PolicyOutcome{name, t0, t1, appendix_error(inst, t0, t1), appendix_disparity(name, inst, t0, t1),
                         appendix_tv_after(inst, t0, t1)};
  };

  std::vector<std::string> notions;
  if (ex == AppendixExample::D1) {
    rep.published = {outcome("erm", m / 2, 0), outcome("be", m / 2, 0), outcome("ei", 0, 0)};
    notions = {"erm", "be", "ei"};
  } else {
    rep.published = {outcome("er", -9 * m, 0), outcome("ei", 0, 0)};
    notions = {"er", "ei"};
  }

  // Exact search on the lattice k m / 4 over [-11m, 2m]: minimum error with zero
  // disparity, ties to smaller (tau0, tau1).
  std::vector<Rational> lattice;
  for (int k = -44; k <= 8; ++k) lattice.push_back(Rational(k) * m / 4);
  for (const auto& notion : notions) {
    bool found = false;
    Rational best_err, b0, b1;
    for (const auto& t0 : lattice) {
      for (const auto& t1 : lattice) {
        const Rational err = appendix_error(inst, t0, t1);
        if (found && err >= best_err) continue;
        if (appendix_disparity(notion, inst, t0, t1) != 0) continue;
        found = true;
        best_err = err;
        b0 = t0;
        b1 = t1;
      }
    }
    if (!found) throw NumericalError("no exactly fair lattice thresholds for " + notion);
    rep.solved.push_back(outcome(notion, b0, b1));
  }
  return rep;
}

}  // namespace improvkit::oracles
