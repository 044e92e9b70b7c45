#include "improvkit/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "improvkit/gaussian.hpp"
#include "improvkit/kv_config.hpp"

namespace improvkit::dynamics {

namespace {

constexpr double kMinRejection = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

double phi_std(double a) { return normal_cdf(a); }

// Mean recourse of rejected samples, sigma * (a + phi(a)/Phi(a)).
double er_recourse(double a, double sigma) { return sigma * (a + normal_pdf(a) / normal_cdf(a)); }

}  // namespace

void GroupGaussianState::validate() const {
  for (int z = 0; z < 2; ++z) {
    if (!std::isfinite(mu[z])) throw ConfigError("group mean must be finite");
    if (!(sigma[z] > 0.0) || !std::isfinite(sigma[z])) throw ConfigError("group sigma must be > 0");
  }
}

std::string to_string(Policy p) {
  switch (p) {
    case Policy::Erm: return "erm";
    case Policy::Dp: return "dp";
    case Policy::Be: return "be";
    case Policy::Er: return "er";
    case Policy::Ei: return "ei";
    case Policy::Ilfcr: return "ilfcr";
  }
  return "erm";
}

Policy parse_policy(const std::string& s) {
  for (auto p : {Policy::Erm, Policy::Dp, Policy::Be, Policy::Er, Policy::Ei, Policy::Ilfcr})
    if (to_string(p) == s) return p;
  throw ConfigError("unknown policy '" + s + "' (valid: erm, dp, be, er, ei, ilfcr)");
}

std::string to_string(EffortModel m) { return m == EffortModel::InverseSquare ? "inverse_square" : "log_capped"; }

EffortModel parse_effort_model(const std::string& s) {
  if (s == "inverse_square") return EffortModel::InverseSquare;
  if (s == "log_capped") return EffortModel::LogCapped;
  throw ConfigError("unknown effort model '" + s + "' (valid: inverse_square, log_capped)");
}

void DynamicsConfig::validate() const {
  init.validate();
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
  if (!(c >= 0.0 && c < 1.0)) throw ConfigError("c must lie in [0,1)");
  if (!(beta > 0.0)) throw ConfigError("beta must be > 0");
  if (rounds < 1) throw ConfigError("rounds must be >= 1");
}

double accept_threshold_chi(const GroupGaussianState& s, double alpha) {
  auto tail = [&](double c) {
    return 0.5 * (normal_tail((c - s.mu[0]) / s.sigma[0]) + normal_tail((c - s.mu[1]) / s.sigma[1]));
  };
  const double spread = 40.0 * std::max(s.sigma[0], s.sigma[1]);
  double lo = std::min(s.mu[0], s.mu[1]) - spread, hi = std::max(s.mu[0], s.mu[1]) + spread;
  while (hi - lo > 1e-12 * std::max(1.0, std::abs(lo) + std::abs(hi)) && hi - lo > 1e-10 * 1e-3) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (tail(mid) > alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double effort_nu(double x, double tau, double beta, EffortModel model) {
  if (x >= tau) return 0.0;
  const double v = 1.0 / ((tau - x + beta) * (tau - x + beta));
  return model == EffortModel::InverseSquare ? v : std::log(std::max(v, 1.0));
}

namespace {

struct Moments {
  double e1 = 0.0;  // E[nu]
  double e2 = 0.0;  // E[(x - mu) nu]
  double e3 = 0.0;  // E[nu^2]
};

Moments effort_moments(double mu, double sigma, double tau, double beta, EffortModel model) {
  Moments m;
  const double lo = mu - 8.0 * sigma;
  const double hi = std::min(tau, mu + 8.0 * sigma);
  if (!(hi > lo)) return m;
  // split at tau (hi) and, for log_capped, at the cap kink x = tau + beta - 1
  std::vector<double> cuts{lo};
  const double kink = tau + beta - 1.0;
  if (model == EffortModel::LogCapped && kink > lo && kink < hi) cuts.push_back(kink);
  cuts.push_back(hi);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    auto pdf = [&](double x) { return normal_pdf(x, mu, sigma); };
    m.e1 += integrate([&](double x) { return effort_nu(x, tau, beta, model) * pdf(x); }, a, b);
    m.e2 += integrate([&](double x) { return (x - mu) * effort_nu(x, tau, beta, model) * pdf(x); }, a, b);
    m.e3 += integrate([&](double x) {
      const double v = effort_nu(x, tau, beta, model);
      return v * v * pdf(x);
    }, a, b);
  }
  return m;
}

}  // namespace

double group_mean_effort(double mu, double sigma, double tau, double beta, EffortModel model) {
  return effort_moments(mu, sigma, tau, beta, model).e1;
}

GroupGaussianState step_distribution(const GroupGaussianState& s, const ThresholdPair& t, double beta,
                                     EffortModel model) {
  s.validate();
  GroupGaussianState out = s;
  for (int z = 0; z < 2; ++z) {
    const Moments m = effort_moments(s.mu[z], s.sigma[z], t[z], beta, model);
    const double var = s.sigma[z] * s.sigma[z] + 2.0 * m.e2 + m.e3 - m.e1 * m.e1;
    if (!(var > 0.0) || !std::isfinite(var)) {
      std::ostringstream os;
      os << "refit variance " << var << " for group " << z << " is not positive";
      throw NumericalError(os.str());
    }
    out.mu[z] = s.mu[z] + m.e1;
    out.sigma[z] = std::sqrt(var);
  }
  return out;
}

double mean_effort_delta_t(const GroupGaussianState& s, const ThresholdPair& t, double beta,
                           EffortModel model) {
  return 0.5 * (group_mean_effort(s.mu[0], s.sigma[0], t.tau0, beta, model) +
                group_mean_effort(s.mu[1], s.sigma[1], t.tau1, beta, model));
}

namespace {

// Per-group quantities for one threshold, shared by the disparity formulas.
struct Side {
  double a = 0.0;       // (tau - mu) / sigma
  double rej = 0.0;     // Phi(a)
  double rej_d = 0.0;   // Phi(a - delta/sigma)
  double u_kink = 0.0;  // ILFCR kink in u
  double tau_mu = 0.0;  // tau - mu
  double sigma = 1.0;
  double recourse = 0.0;
};

Side side(double mu, double sigma, double tau, double delta_t) {
  Side s;
  s.a = (tau - mu) / sigma;
  s.rej = phi_std(s.a);
  s.rej_d = phi_std(s.a - delta_t / sigma);
  s.tau_mu = tau - mu;
  s.sigma = sigma;
  s.u_kink = s.a;
  s.recourse = s.rej > kMinRejection ? er_recourse(s.a, sigma) : kInf;
  return s;
}

bool needs_rejection(Policy p) { return p == Policy::Ei || p == Policy::Er; }

double ilfcr(const Side& s0, const Side& s1) {
  auto gap = [&](double u) {
    return std::abs(std::max(s0.tau_mu - s0.sigma * u, 0.0) - std::max(s1.tau_mu - s1.sigma * u, 0.0));
  };
  double best = std::max(gap(-3.0), gap(3.0));
  for (double u : {s0.u_kink, s1.u_kink})
    if (u > -3.0 && u < 3.0) best = std::max(best, gap(u));
  return best;
}

// NaN when the conditioning is degenerate.
double disparity(Policy p, const Side& s0, const Side& s1) {
  if (needs_rejection(p) && (s0.rej < kMinRejection || s1.rej < kMinRejection))
    return std::numeric_limits<double>::quiet_NaN();
  switch (p) {
    case Policy::Ei: return std::abs(s0.rej_d / s0.rej - s1.rej_d / s1.rej);
    case Policy::Dp: return std::abs(s0.rej - s1.rej);
    case Policy::Be: return std::abs((s0.rej - s0.rej_d) - (s1.rej - s1.rej_d));
    case Policy::Er: return std::abs(s0.recourse - s1.recourse);
    case Policy::Ilfcr: return ilfcr(s0, s1);
    case Policy::Erm: return 0.0;
  }
  return 0.0;
}

double group_error(double mu, double sigma, double tau, double chi) {
  return std::abs(phi_std((tau - mu) / sigma) - phi_std((chi - mu) / sigma));
}

}  // namespace

double policy_disparity(Policy p, const GroupGaussianState& s, const ThresholdPair& t, double delta_t) {
  if (p == Policy::Erm) throw PreconditionError("policy_disparity is undefined for erm");
  const double d = disparity(p, side(s.mu[0], s.sigma[0], t.tau0, delta_t),
                             side(s.mu[1], s.sigma[1], t.tau1, delta_t));
  if (std::isnan(d)) throw EvaluationError("rejection probability below 1e-12");
  return d;
}

double error_rate(const GroupGaussianState& s, const ThresholdPair& t, double alpha) {
  const double chi = accept_threshold_chi(s, alpha);
  return 0.5 * (group_error(s.mu[0], s.sigma[0], t.tau0, chi) + group_error(s.mu[1], s.sigma[1], t.tau1, chi));
}

double final_grid_step(double sigma) {
  return 8.0 * sigma / (kCoarseGrid - 1) / std::pow(10.0, kRefineRounds);
}

ThresholdPair solve_thresholds(Policy p, const GroupGaussianState& s, double alpha, double c, double delta_t) {
  s.validate();
  const double chi = accept_threshold_chi(s, alpha);
  if (p == Policy::Erm) return {chi, chi};
  const double limit = p == Policy::Ilfcr ? alpha / 2.0 : c;

  struct Best {
    bool found = false;
    double disp = kInf, err = kInf, t0 = 0.0, t1 = 0.0;
  } best;
  double min_error = kInf;

  std::array<double, 2> center{s.mu[0], s.mu[1]};
  std::array<double, 2> step{8.0 * s.sigma[0] / (kCoarseGrid - 1), 8.0 * s.sigma[1] / (kCoarseGrid - 1)};
  int half = (kCoarseGrid - 1) / 2;
  for (int round = 0; round <= kRefineRounds; ++round) {
    std::array<std::vector<Side>, 2> sides;
    std::array<std::vector<double>, 2> errs, taus;
    for (int z = 0; z < 2; ++z) {
      for (int k = -half; k <= half; ++k) {
        const double tau = center[z] + k * step[z];
        taus[z].push_back(tau);
        sides[z].push_back(side(s.mu[z], s.sigma[z], tau, delta_t));
        errs[z].push_back(group_error(s.mu[z], s.sigma[z], tau, chi));
      }
    }
    for (std::size_t i = 0; i < taus[0].size(); ++i) {
      for (std::size_t j = 0; j < taus[1].size(); ++j) {
        const double err = 0.5 * (errs[0][i] + errs[1][j]);
        min_error = std::min(min_error, err);
        if (err > limit) continue;
        const double d = disparity(p, sides[0][i], sides[1][j]);
        if (std::isnan(d)) continue;
        const double t0 = taus[0][i], t1 = taus[1][j];
        bool better;
        if (!best.found || d < best.disp - kTieTolerance) better = true;
        else if (d > best.disp + kTieTolerance) better = false;
        else if (err != best.err) better = err < best.err;
        else if (t0 != best.t0) better = t0 < best.t0;
        else better = t1 < best.t1;
        if (better) best = {true, d, err, t0, t1};
      }
    }
    if (!best.found) {
      std::ostringstream os;
      os << "no thresholds satisfy error <= " << limit << " (minimum achievable " << min_error << ")";
      throw InfeasibleError(os.str(), min_error);
    }
    center = {best.t0, best.t1};
    step = {step[0] / 10.0, step[1] / 10.0};
    half = 10;
  }
  return {best.t0, best.t1};
}

double tv_distance(const GroupGaussianState& s) {
  s.validate();
  const double smax = std::max(s.sigma[0], s.sigma[1]);
  const double lo = std::min(s.mu[0], s.mu[1]) - 8.0 * smax;
  const double hi = std::max(s.mu[0], s.mu[1]) + 8.0 * smax;
  // split where the densities cross: quadratic in x from equating log densities
  std::vector<double> cuts{lo, hi};
  const double m0 = s.mu[0], m1 = s.mu[1], v0 = s.sigma[0] * s.sigma[0], v1 = s.sigma[1] * s.sigma[1];
  const double A = 1.0 / v1 - 1.0 / v0;
  const double B = 2.0 * (m0 / v0 - m1 / v1);
  const double C = m1 * m1 / v1 - m0 * m0 / v0 + std::log(v1 / v0);
  if (std::abs(A) < 1e-14) {
    if (std::abs(B) > 0.0) cuts.push_back(-C / B);
  } else {
    const double disc = B * B - 4.0 * A * C;
    if (disc >= 0.0) {
      cuts.push_back((-B + std::sqrt(disc)) / (2.0 * A));
      cuts.push_back((-B - std::sqrt(disc)) / (2.0 * A));
    }
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  auto f = [&](double x) { return std::abs(normal_pdf(x, m0, s.sigma[0]) - normal_pdf(x, m1, s.sigma[1])); };
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = std::max(cuts[k], lo), b = std::min(cuts[k + 1], hi);
    if (b > a) total += integrate(f, a, b);
  }
  return std::clamp(0.5 * total, 0.0, 1.0);
}

Trajectory run_simulation(const DynamicsConfig& cfg) {
  cfg.validate();
  Trajectory tr;
  tr.policy = cfg.policy;
  GroupGaussianState state = cfg.init;
  const double chi0 = accept_threshold_chi(state, cfg.alpha);
  ThresholdPair prev{chi0, chi0};
  for (int t = 0; t <= cfg.rounds; ++t) {
    RoundRecord rec;
    rec.round = t;
    rec.state = state;
    rec.tv = tv_distance(state);
    if (t == cfg.rounds) {
      rec.delta_t = std::numeric_limits<double>::quiet_NaN();
      rec.error = std::numeric_limits<double>::quiet_NaN();
      tr.rounds.push_back(rec);
      break;
    }
    try {
      rec.delta_t = mean_effort_delta_t(state, prev, cfg.beta, cfg.effort_model);
      const ThresholdPair th = solve_thresholds(cfg.policy, state, cfg.alpha, cfg.c, rec.delta_t);
      rec.thresholds = th;
      rec.error = error_rate(state, th, cfg.alpha);
      tr.rounds.push_back(rec);
      state = step_distribution(state, th, cfg.beta, cfg.effort_model);
      prev = th;
    } catch (const InfeasibleError& e) {
      throw InfeasibleError("round " + std::to_string(t) + ": " + e.what(), e.min_error);
    } catch (const NumericalError& e) {
      throw NumericalError("round " + std::to_string(t) + ": " + e.what());
    }
  }
  return tr;
}

std::string trajectory_csv(const std::vector<Trajectory>& trajectories) {
  std::string s = "round,policy,mu0,sigma0,mu1,sigma1,tau0,tau1,delta_t,tv,error\n";
  auto opt = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
  for (const auto& tr : trajectories) {
    for (const auto& r : tr.rounds) {
      s += std::to_string(r.round) + "," + to_string(tr.policy) + "," + format_double(r.state.mu[0]) + "," +
           format_double(r.state.sigma[0]) + "," + format_double(r.state.mu[1]) + "," +
           format_double(r.state.sigma[1]) + ",";
      s += r.thresholds ? format_double(r.thresholds->tau0) + "," + format_double(r.thresholds->tau1) : ",";
      s += "," + opt(r.delta_t) + "," + format_double(r.tv) + "," + opt(r.error) + "\n";
    }
  }
  return s;
}

}  // namespace improvkit::dynamics
