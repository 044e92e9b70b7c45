// improvkit command-line front end.
#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "improvkit/analytic_oracles.hpp"
#include "improvkit/data.hpp"
#include "improvkit/dynamics.hpp"
#include "improvkit/error.hpp"
#include "improvkit/log.hpp"
#include "improvkit/parallel.hpp"
#include "improvkit/rng.hpp"
#include "improvkit/trainer.hpp"

namespace fs = std::filesystem;
using namespace improvkit;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Output directory plus the manifest that lists everything written into it.
class Run {
public:
  Run(std::string command, std::string out, std::uint64_t seed)
      : command_(std::move(command)), out_(std::move(out)), seed_(seed),
        start_(std::chrono::steady_clock::now()) {
    if (out_.empty()) throw ConfigError("--out is required");
    std::error_code ec;
    fs::create_directories(out_, ec);
    if (ec) throw DataError("cannot create output directory " + out_ + ": " + ec.message());
  }

  void write(const std::string& name, const std::string& content) {
    const std::string path = (fs::path(out_) / name).string();
    std::ofstream o(path, std::ios::binary);
    if (!o) throw DataError("cannot write " + path);
    o << content;
    if (!o) throw DataError("write failed for " + path);
    artifacts_[name] = fnv1a64(content);
  }

  void input(const std::string& path) { inputs_[path] = fnv1a64(read_file(path)); }
  void config(const KvConfig& kv) {
    for (const auto& [k, v] : kv.values()) config_[k] = v;
  }
  void config(const std::string& k, const std::string& v) { config_[k] = v; }

  void finish() {
    json j;
    j["command"] = command_;
    j["seed"] = seed_;
    j["config"] = config_;
    j["inputs"] = inputs_;
    j["artifacts"] = artifacts_;
    j["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const std::string path = (fs::path(out_) / "manifest.json").string();
    std::ofstream o(path);
    if (!o) throw DataError("cannot write " + path);
    o << j.dump(2) << "\n";
  }

private:
  std::string command_, out_;
  std::uint64_t seed_;
  std::chrono::steady_clock::time_point start_;
  std::map<std::string, std::string> config_, inputs_, artifacts_;
};

struct Common {
  std::string out;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string config_path;
};

void add_common(CLI::App* sub, Common& c, bool needs_out = true) {
  auto* o = sub->add_option("--out", c.out, "Output directory");
  if (needs_out) o->required();
  sub->add_option("--seed", c.seed, "Run seed; sub-seeds are derived from it");
  sub->add_option("--jobs", c.jobs, "Parallel workers")->check(CLI::PositiveNumber);
  sub->add_option("--config", c.config_path, "Key-value config file; flags override it");
}

struct DataArgs {
  std::string data = "synth";
  std::string schema;
  std::string scenario = "paper";
  int samples = 20000;
  double test_fraction = 0.2;
};

void add_data(CLI::App* sub, DataArgs& d) {
  sub->add_option("--data", d.data, "'synth' or a CSV path");
  sub->add_option("--schema", d.schema, "Schema file for CSV data (default: <csv>.schema)");
  sub->add_option("--scenario", d.scenario, "Synthetic family: paper, outlier_clean, same_negative_rate, "
                                            "different_negative_rate");
  sub->add_option("--samples", d.samples, "Synthetic sample count")->check(CLI::PositiveNumber);
  sub->add_option("--test-fraction", d.test_fraction, "Held-out fraction")->check(CLI::Range(0.0, 1.0));
}

SyntheticConfig scenario_config(const std::string& name) {
  if (name == "paper") return SyntheticConfig::paper_default();
  if (name == "outlier_clean") return SyntheticConfig::outlier_clean();
  if (name == "same_negative_rate") return SyntheticConfig::same_negative_rate();
  if (name == "different_negative_rate") return SyntheticConfig::different_negative_rate();
  throw ConfigError("unknown scenario '" + name +
                    "' (valid: paper, outlier_clean, same_negative_rate, different_negative_rate)");
}

Dataset load_data(const DataArgs& d, std::uint64_t seed, Run& run) {
  if (d.data == "synth") {
    SyntheticConfig cfg = scenario_config(d.scenario);
    cfg.n_samples = d.samples;
    run.config("data", "synth");
    run.config("scenario", d.scenario);
    run.config("samples", std::to_string(d.samples));
    run.config("test_fraction", format_double(d.test_fraction));
    return generate_synthetic(cfg, derive_seed(seed, streams::kData));
  }
  const std::string schema = d.schema.empty() ? d.data + ".schema" : d.schema;
  if (!fs::exists(d.data)) throw DataError("data file not found: " + d.data);
  if (!fs::exists(schema)) throw DataError("schema file not found: " + schema);
  run.input(d.data);
  run.input(schema);
  run.config("data", d.data);
  run.config("schema", schema);
  run.config("test_fraction", format_double(d.test_fraction));
  return load_csv(d.data, SchemaConfig::load(schema));
}

// Training flags, stored as strings so they can override config-file keys.
struct TrainArgs {
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  KvConfig base;  // from a replayed manifest; the config file and flags override it

  void add(CLI::App* sub) {
    const std::pair<const char*, const char*> flags[] = {
        {"model", "logreg or mlp"},
        {"hidden", "MLP hidden widths, comma separated"},
        {"penalty", "none, ei_cov, ei_kde, ei_loss, be_loss"},
        {"kde-bandwidth", "KDE bandwidth h"},
        {"lambda", "Penalty weight in [0,1)"},
        {"norm", "linf or l2"},
        {"delta", "Effort budget"},
        {"cost", "Diagonal L2 costs, comma separated"},
        {"epochs", "Epochs (0: model default)"},
        {"batch-size", "Minibatch size (0: full batch)"},
        {"learning-rate", "Step size"},
        {"optimizer", "adam or sgd"},
        {"pgd-steps", "PGD iterations"},
        {"pgd-step-size", "PGD step (0: delta/5)"},
        {"pgd-restarts", "PGD restarts"},
        {"pgd-init", "zero or random"},
    };
    for (const auto& [name, help] : flags) {
      std::string key = name;
      for (auto& ch : key)
        if (ch == '-') ch = '_';
      auto* opt = sub->add_option(std::string("--") + name, values[key], help);
      options.emplace_back(key, opt);
    }
  }

  TrainConfig resolve(const Common& c, Run& run) const {
    KvConfig kv = base;
    if (!c.config_path.empty()) {
      for (const auto& [k, v] : KvConfig::load(c.config_path).values()) kv.set(k, v);
      run.input(c.config_path);
    }
    for (const auto& [key, opt] : options)
      if (opt->count()) kv.set(key, values.at(key));
    kv.set("seed", std::to_string(c.seed));
    const TrainConfig cfg = TrainConfig::from_kv(kv);
    run.config(cfg.to_kv());
    return cfg;
  }
};

std::pair<Dataset, Dataset> split_for(const Dataset& ds, const DataArgs& d, std::uint64_t seed) {
  return split(ds, d.test_fraction, derive_seed(seed, streams::kSplit));
}

std::string report_csv(const DisparityReport& r) { return DisparityReport::csv_header() + "\n" + r.csv_values() + "\n"; }

std::vector<double> parse_doubles(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(parse_double(item, what));
  return out;
}

oracles::Rational parse_rational(const std::string& s) {
  try {
    oracles::Rational r(trim(s));
    return r;
  } catch (const std::exception&) {
    throw ConfigError("--m must be a positive rational such as 1 or 3/2, got '" + s + "'");
  }
}

// Restores seed, data flags and training keys recorded by an earlier train run.
void load_replay(const std::string& path, Common& common, DataArgs& data, TrainArgs& targs) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError("cannot parse manifest " + path + ": " + e.what());
  }
  if (j.value("command", "") != "train") throw ConfigError("--replay needs a manifest written by train");
  common.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& [k, v] : j.at("config").items()) {
    const std::string val = v.get<std::string>();
    if (k == "data") data.data = val;
    else if (k == "scenario") data.scenario = val;
    else if (k == "samples") data.samples = parse_int(val, "samples");
    else if (k == "schema") data.schema = val;
    else if (k == "test_fraction") data.test_fraction = parse_double(val, "test_fraction");
    else if (k != "seed") targs.base.set(k, val);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fair classification with equal improvability: training, evaluation, dynamics and oracles"};
  app.require_subcommand(1);

  Common common;
  DataArgs data;
  TrainArgs targs;

  auto* train_cmd = app.add_subcommand("train", "Train a classifier and report held-out disparities");
  add_common(train_cmd, common);
  add_data(train_cmd, data);
  targs.add(train_cmd);
  std::string replay_path;
  train_cmd->add_option("--replay", replay_path, "manifest.json of an earlier train run to repeat");

  std::string model_path, eval_split = "test", eval_norm, eval_cost;
  double eval_delta = -1.0;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a saved model");
  add_common(eval_cmd, common);
  add_data(eval_cmd, data);
  eval_cmd->add_option("--model", model_path, "Model file written by train")->required();
  eval_cmd->add_option("--split", eval_split, "train, test or all")->check(CLI::IsMember({"train", "test", "all"}));
  auto* delta_opt = eval_cmd->add_option("--delta", eval_delta, "Override the model's effort budget");
  auto* norm_opt = eval_cmd->add_option("--norm", eval_norm, "Override the model's norm");
  auto* cost_opt = eval_cmd->add_option("--cost", eval_cost, "Override the model's L2 costs");

  std::string lambdas_arg, seeds_arg = "0";
  auto* pareto_cmd = app.add_subcommand("pareto", "Sweep lambda and seeds; write the frontier");
  add_common(pareto_cmd, common);
  add_data(pareto_cmd, data);
  targs.add(pareto_cmd);
  pareto_cmd->add_option("--lambdas", lambdas_arg, "Comma-separated lambda values")->required();
  pareto_cmd->add_option("--seeds", seeds_arg, "Comma-separated split/init seeds");

  CvOptions cv_opts;
  std::string stage1_arg;
  auto* cv_cmd = app.add_subcommand("cv", "Two-step cross-validation of lambda");
  add_common(cv_cmd, common);
  add_data(cv_cmd, data);
  targs.add(cv_cmd);
  cv_cmd->add_option("--folds", cv_opts.folds, "Number of folds")->check(CLI::Range(2, 1000));
  cv_cmd->add_option("--stage1", stage1_arg, "Stage-1 lambda grid");
  cv_cmd->add_option("--error-slack", cv_opts.error_slack, "Allowed error above the lambda=0 baseline");
  cv_cmd->add_flag("--tune-lr", cv_opts.tune_learning_rate, "Pick the learning rate on the unpenalized model");

  std::string policies_arg = "ei", init_arg = "0,1,1,0.5", effort_arg = "inverse_square";
  dynamics::DynamicsConfig dyn;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the long-term dynamics for one or more policies");
  add_common(sim_cmd, common);
  sim_cmd->add_option("--policy", policies_arg, "Comma-separated: erm, dp, be, er, ei, ilfcr, or all");
  sim_cmd->add_option("--init", init_arg, "mu0,sigma0,mu1,sigma1");
  sim_cmd->add_option("--alpha", dyn.alpha, "Acceptance fraction");
  sim_cmd->add_option("--c", dyn.c, "Maximum error rate");
  sim_cmd->add_option("--beta", dyn.beta, "Effort offset");
  sim_cmd->add_option("--rounds", dyn.rounds, "Number of rounds");
  sim_cmd->add_option("--effort-model", effort_arg, "inverse_square or log_capped");

  std::string example_arg, m_arg = "1", notion_arg = "ei";
  bool tradeoff = false;
  double oracle_delta = 0.5;
  int c_count = 20;
  auto* oracle_cmd = app.add_subcommand("oracle", "Exact worked examples and the optimal tradeoff curve");
  add_common(oracle_cmd, common, false);
  oracle_cmd->add_option("--example", example_arg, "d1 or d2");
  oracle_cmd->add_option("--m", m_arg, "Positive rational scale for the worked examples");
  oracle_cmd->add_flag("--tradeoff", tradeoff, "Solve the optimal tradeoff on a synthetic scenario");
  oracle_cmd->add_option("--scenario", data.scenario, "Synthetic family for --tradeoff");
  oracle_cmd->add_option("--notion", notion_arg, "ei, be or er");
  oracle_cmd->add_option("--delta", oracle_delta, "Effort budget");
  oracle_cmd->add_option("--c-count", c_count, "Number of c values")->check(CLI::Range(2, 10000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (train_cmd->parsed()) {
      if (!replay_path.empty()) load_replay(replay_path, common, data, targs);
      Run run("train", common.out, common.seed);
      const TrainConfig cfg = targs.resolve(common, run);
      const Dataset ds = load_data(data, common.seed, run);
      auto [tr, te] = split_for(ds, data, common.seed);
      const TrainedModel m = train(tr, cfg);
      EvalOptions opts;
      opts.pgd = cfg.pgd;
      const DisparityReport rep = full_report(m.scorer, te, cfg.budget, opts);
      run.write("model.txt", serialize_model(m));
      run.write("history.csv", history_csv(m.history));
      run.write("report.txt", rep.to_text());
      run.write("report.csv", report_csv(rep));
      run.finish();
      std::cout << rep.to_text();
    } else if (eval_cmd->parsed()) {
      Run run("eval", common.out, common.seed);
      const TrainedModel m = load_model(model_path);
      run.input(model_path);
      EffortBudget budget = m.config.budget;
      if (delta_opt->count()) budget.delta = eval_delta;
      if (norm_opt->count()) budget.norm = parse_norm(eval_norm);
      if (cost_opt->count()) {
        const auto v = parse_doubles(eval_cost, "--cost");
        budget.cost_diag = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
      }
      run.config("split", eval_split);
      run.config("delta", format_double(budget.delta));
      Dataset ds = load_data(data, common.seed, run);
      if (eval_split != "all") {
        auto parts = split_for(ds, data, common.seed);
        ds = eval_split == "train" ? parts.first : parts.second;
      }
      if (ds.dim() != input_dim(m.scorer))
        throw DataError("model expects " + std::to_string(input_dim(m.scorer)) + " features, data has " +
                        std::to_string(ds.dim()));
      ds.partition = m.partition;
      EvalOptions opts;
      opts.pgd = m.config.pgd;
      const DisparityReport rep = full_report(m.scorer, ds, budget, opts);
      run.write("report.txt", rep.to_text());
      run.write("report.csv", report_csv(rep));
      run.finish();
      std::cout << rep.to_text();
    } else if (pareto_cmd->parsed()) {
      Run run("pareto", common.out, common.seed);
      const TrainConfig cfg = targs.resolve(common, run);
      const auto lambdas = parse_doubles(lambdas_arg, "--lambdas");
      if (lambdas.empty()) throw ConfigError("--lambdas must list at least one value");
      std::vector<std::uint64_t> seeds;
      for (const auto& s : split_list(seeds_arg)) seeds.push_back(static_cast<std::uint64_t>(parse_int(s, "--seeds")));
      run.config("lambdas", lambdas_arg);
      run.config("seeds", seeds_arg);
      const Dataset ds = load_data(data, common.seed, run);
      const SweepResult res = pareto_sweep(ds, cfg, lambdas, seeds, data.test_fraction, common.jobs);
      SweepResult front;
      for (std::size_t i : res.frontier) front.rows.push_back(res.rows[i]);
      run.write("sweep.csv", sweep_csv(res));
      run.write("frontier.csv", sweep_csv(front));
      std::string failures;
      for (const auto& r : res.rows)
        if (!r.failure.empty() && r.split == "test")
          failures += "lambda=" + format_double(r.lambda) + " seed=" + std::to_string(r.seed) + ": " + r.failure + "\n";
      if (!failures.empty()) run.write("failures.txt", failures);
      run.finish();
      std::cout << sweep_csv(front);
    } else if (cv_cmd->parsed()) {
      Run run("cv", common.out, common.seed);
      const TrainConfig cfg = targs.resolve(common, run);
      if (cv_cmd->count("--stage1")) cv_opts.stage1 = parse_doubles(stage1_arg, "--stage1");
      cv_opts.jobs = common.jobs;
      const Dataset ds = load_data(data, common.seed, run);
      auto [tr, te] = split_for(ds, data, common.seed);
      const CvResult res = cross_validate(tr, cfg, cv_opts);
      std::string csv = "stage,lambda,error,ei,folds_used\n";
      for (const auto& s : res.scores)
        csv += std::to_string(s.stage) + "," + format_double(s.lambda) + "," + format_double(s.error) + "," +
               format_double(s.ei) + "," + std::to_string(s.folds_used) + "\n";
      KvConfig summary;
      summary.set("best_lambda", format_double(res.best_lambda));
      summary.set("learning_rate", format_double(res.learning_rate));
      summary.set("baseline_error", format_double(res.baseline_error));
      summary.set("flags", std::to_string(res.flags.size()));
      run.write("cv.csv", csv);
      run.write("cv.txt", summary.dump());
      if (!res.flags.empty()) {
        std::string f;
        for (const auto& s : res.flags) f += s + "\n";
        run.write("cv_flags.txt", f);
      }
      run.finish();
      std::cout << summary.dump();
    } else if (sim_cmd->parsed()) {
      Run run("simulate", common.out, common.seed);
      const auto init = parse_doubles(init_arg, "--init");
      if (init.size() != 4) throw ConfigError("--init needs mu0,sigma0,mu1,sigma1");
      dyn.init.mu = {init[0], init[2]};
      dyn.init.sigma = {init[1], init[3]};
      dyn.effort_model = dynamics::parse_effort_model(effort_arg);
      std::vector<dynamics::Policy> policies;
      if (policies_arg == "all") {
        policies = {dynamics::Policy::Erm, dynamics::Policy::Dp, dynamics::Policy::Be,
                    dynamics::Policy::Er,  dynamics::Policy::Ei, dynamics::Policy::Ilfcr};
      } else {
        for (const auto& p : split_list(policies_arg)) policies.push_back(dynamics::parse_policy(p));
      }
      if (policies.empty()) throw ConfigError("--policy must name at least one policy");
      dyn.validate();
      run.config("policy", policies_arg);
      run.config("init", init_arg);
      run.config("alpha", format_double(dyn.alpha));
      run.config("c", format_double(dyn.c));
      run.config("beta", format_double(dyn.beta));
      run.config("rounds", std::to_string(dyn.rounds));
      run.config("effort_model", effort_arg);
      std::vector<dynamics::Trajectory> trajs(policies.size());
      parallel_for(policies.size(), common.jobs, [&](std::size_t i) {
        dynamics::DynamicsConfig c = dyn;
        c.policy = policies[i];
        trajs[i] = dynamics::run_simulation(c);
      });
      const std::string csv = dynamics::trajectory_csv(trajs);
      run.write("trajectory.csv", csv);
      run.finish();
      std::cout << csv;
    } else if (oracle_cmd->parsed()) {
      if (tradeoff == !example_arg.empty())
        throw ConfigError("oracle needs exactly one of --example or --tradeoff");
      std::string text, name;
      Run* run = nullptr;
      std::unique_ptr<Run> holder;
      if (!common.out.empty()) {
        holder = std::make_unique<Run>("oracle", common.out, common.seed);
        run = holder.get();
      }
      if (!example_arg.empty()) {
        const auto ex = oracles::parse_example(example_arg);
        const auto m = parse_rational(m_arg);
        if (m <= 0) throw ConfigError("--m must be positive");
        text = oracles::appendix_d_oracle(ex, m).to_text();
        name = "oracle_" + example_arg + ".txt";
        if (run) {
          run->config("example", example_arg);
          run->config("m", m_arg);
        }
      } else {
        oracles::TradeoffOptions opts;
        opts.notion = oracles::parse_notion(notion_arg);
        const SyntheticConfig cfg = scenario_config(data.scenario);
        const auto grid = oracles::default_c_grid(cfg, oracle_delta, c_count, opts);
        text = oracles::tradeoff_csv(oracles::optimal_tradeoff(cfg, oracle_delta, grid, opts));
        name = "tradeoff.csv";
        if (run) {
          run->config("scenario", data.scenario);
          run->config("notion", notion_arg);
          run->config("delta", format_double(oracle_delta));
          run->config("c_count", std::to_string(c_count));
        }
      }
      if (run) {
        run->write(name, text);
        run->finish();
      }
      std::cout << text;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const PreconditionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const EvaluationError& e) {
    std::cerr << "evaluation error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
