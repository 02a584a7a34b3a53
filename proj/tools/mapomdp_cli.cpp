// mapomdp: command-line front end for the repair experiments.
//
//   mapomdp evaluate      --config run.json [overrides]   results CSV + manifest
//   mapomdp compare       --policy base --policy one-at-a-time ...   plus paired statistics
//   mapomdp train-pi      --iterations 3 --out pi/          classifier binaries + JSON + cost trace
//   mapomdp sweep-comms   --rhos 0.3,0.5,0.8,1.0 --radius 2  comms grid against one-at-a-time
//   mapomdp make-instance --out data/                      benchmark/desk graphs, chains, tiny tabular models
//
// Config file (every field optional):
// {
//   "instance":   {"graph": "builtin:desk", "chain": "builtin:desk", "agents": 2,
//                  "discount": 0.95, "p_damaged": 0.3, "terminating": false},
//   "policies":   ["base", "one-at-a-time", {"policy": "amr-ilc", "rho": 0.8, "radius": 2, "id": "ilc"}],
//   "rollout":    {"lookahead": 1, "truncation": 10, "trajectories": 30, "obs_branch": 4, "agent_order": []},
//   "evaluation": {"states": 200, "horizon": 200, "seed": 1, "workers": 1},
//   "output":     {"csv": "results.csv", "manifest": "manifest.json", "timing": "", "comparison": ""}
// }
//
// --out DIR redirects every output into DIR. Flags override the file.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "mapomdp/harness/config.hpp"
#include "mapomdp/harness/experiment.hpp"
#include "mapomdp/pi/features.hpp"
#include "mapomdp/pi/iteration.hpp"
#include "mapomdp/policy/greedy.hpp"
#include "mapomdp/repair/tabular_bridge.hpp"

namespace fs = std::filesystem;
using namespace mapomdp;
using namespace mapomdp::harness;

namespace {

struct Overrides {
  std::string config;
  std::uint64_t seed = 0;
  int agents = 0;
  std::vector<std::string> policies;
  double rho = 1.0;
  int radius = 1;
  int lookahead = 0;
  int truncation = 0;
  int trajectories = 0;
  int horizon = 0;
  std::size_t states = 0;
  unsigned workers = 0;
  std::string graph, chain, out;
  bool terminating = false;
  bool quiet = false;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON experiment config")->check(CLI::ExistingFile);
  app->add_option("--seed", o.seed, "root seed");
  app->add_option("--agents", o.agents, "number of agents")->check(CLI::PositiveNumber);
  app->add_option("--policy", o.policies, "policy spec, repeatable");
  app->add_option("--rho", o.rho, "cloud connection probability")->check(CLI::Range(0.0, 1.0));
  app->add_option("--radius", o.radius, "communication radius in hops")->check(CLI::NonNegativeNumber);
  app->add_option("--lookahead", o.lookahead, "lookahead depth l")->check(CLI::PositiveNumber);
  app->add_option("--truncation", o.truncation, "base-policy stages t")->check(CLI::NonNegativeNumber);
  app->add_option("--trajectories", o.trajectories, "Monte Carlo trajectories per Q-factor")
      ->check(CLI::PositiveNumber);
  app->add_option("--horizon", o.horizon, "evaluation horizon H")->check(CLI::NonNegativeNumber);
  app->add_option("--states", o.states, "number of paired initial states")->check(CLI::PositiveNumber);
  app->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--graph", o.graph, "graph JSON or builtin:desk|builtin:benchmark");
  app->add_option("--chain", o.chain, "chain JSON or builtin:desk|builtin:benchmark");
  app->add_flag("--terminating", o.terminating, "zero every escalation probability");
  app->add_option("--out", o.out, "output directory");
  app->add_flag("--quiet", o.quiet, "no progress on stderr");
}

ExperimentConfig resolve(CLI::App* app, const Overrides& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : ExperimentConfig::load(o.config);
  auto given = [&](const char* name) { return app->count(name) > 0; };
  if (given("--seed")) c.evaluation.seed = o.seed;
  if (given("--agents")) c.instance.agents = o.agents;
  if (given("--lookahead")) c.rollout.lookahead = o.lookahead;
  if (given("--truncation")) c.rollout.truncation = o.truncation;
  if (given("--trajectories")) c.rollout.n_traj = o.trajectories;
  if (given("--horizon")) c.evaluation.horizon = o.horizon;
  if (given("--states")) c.evaluation.states = o.states;
  if (given("--workers")) c.evaluation.workers = o.workers;
  if (given("--graph")) c.instance.graph = o.graph;
  if (given("--chain")) c.instance.chain = o.chain;
  if (o.terminating) c.instance.terminating = true;
  if (!o.policies.empty()) {
    c.policies.clear();
    for (const auto& p : o.policies) c.policies.push_back(PolicySpec::parse(p, o.radius, o.rho));
  } else if (given("--rho") || given("--radius")) {
    for (auto& p : c.policies) {
      if (p.kind != PolicyKind::kComms) continue;
      if (given("--rho")) p.arch.rho = o.rho;
      if (given("--radius")) p.arch.radius = o.radius;
      p.id = PolicySpec::default_id(p);
    }
  }
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    const fs::path dir(o.out);
    c.output.csv = (dir / "results.csv").string();
    c.output.manifest = (dir / "manifest.json").string();
    c.output.timing = (dir / "timing.csv").string();
    c.output.comparison = (dir / "comparison.csv").string();
  }
  return c;
}

Progress progress_bar(bool quiet) {
  if (quiet) return {};
  return [](std::size_t done, std::size_t total) {
    if (done == total || done % std::max<std::size_t>(1, total / 20) == 0)
      std::fprintf(stderr, "\r%zu/%zu episodes", done, total);
    if (done == total) std::fputc('\n', stderr);
  };
}

void print_summary(const ExperimentResult& r) {
  std::printf("%-28s %8s %12s %10s %12s %12s\n", "policy", "n", "mean", "stderr", "Q/stage", "s/stage");
  for (const auto& p : r.policies)
    std::printf("%-28s %8zu %12.2f %10.2f %12.2f %12.5f\n", p.id.c_str(), p.summary.n, p.summary.mean,
                p.summary.stderr_mean, p.summary.q_per_stage, p.summary.seconds_per_stage);
}

void print_comparisons(const std::vector<PairedComparison>& rows) {
  std::printf("%-24s %-24s %12s %10s %9s %10s  %s\n", "a", "b", "mean(b-a)", "stderr", "t", "p(b<a)", "verdict");
  for (const auto& c : rows)
    std::printf("%-24s %-24s %12.3f %10.3f %9.3f %10.3g  %s\n", c.a.c_str(), c.b.c_str(), c.mean_diff, c.stderr_diff,
                c.t, c.p_lower, c.verdict().c_str());
}

int run_grid(const ExperimentConfig& c, bool compare, bool quiet) {
  c.validate();
  if (compare && c.policies.size() < 2) throw std::invalid_argument("compare needs at least two policies");
  const repair::RepairModel model = load_model(c.instance);
  const ExperimentResult r = run_experiment(c, model, progress_bar(quiet));
  ExperimentConfig written = c;
  if (!compare) written.output.comparison.clear();
  persist(written, model, r);
  print_summary(r);
  if (compare) print_comparisons(compare_grid(r));
  if (!c.output.csv.empty()) std::printf("results: %s\n", c.output.csv.c_str());
  return 0;
}

int sweep_comms(ExperimentConfig c, const std::vector<double>& rhos, int radius, bool quiet) {
  c.policies = {PolicySpec::parse("one-at-a-time"), PolicySpec::parse("amr-b"),
                PolicySpec::parse("amr-lc", radius)};
  for (double rho : rhos) c.policies.push_back(PolicySpec::parse("amr-ilc", radius, rho));
  for (double rho : rhos) c.policies.push_back(PolicySpec::parse("amr-ib1", radius, rho));
  return run_grid(c, true, quiet);
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << doc.dump(2) << '\n';
}

int train_pi(const ExperimentConfig& c, pi::PiConfig pc, const std::string& out_dir, bool quiet) {
  c.validate();
  const repair::RepairModel model = load_model(c.instance);
  pc.rollout = c.rollout;
  pc.buffer.init = {c.instance.p_damaged};
  pc.eval_states = c.evaluation.states;
  pc.eval_horizon = c.evaluation.horizon;
  pc.workers = c.evaluation.workers;
  const fs::path dir(out_dir.empty() ? "pi" : out_dir);
  fs::create_directories(dir);
  auto progress = [&](int k, const pi::PiResult& r) {
    if (quiet) return;
    if (k == 0) {
      std::fprintf(stderr, "base policy: cost %.2f\n", r.cost_trace.back());
      return;
    }
    const auto& it = r.iterations.back();
    std::fprintf(stderr, "iteration %d: %zu samples, train accuracy %.3f, cost %.2f\n", k, it.samples,
                 it.report.train_accuracy, r.cost_trace.back());
  };
  const pi::PiResult r = pi::pi_iterate(model, std::make_shared<const policy::GreedyPolicy>(model), pc,
                                        c.evaluation.seed, progress);
  std::ofstream trace(dir / "pi_trace.csv");
  trace << "schema_version,iteration,policy,samples,train_accuracy,mean_cost\n";
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t k = 0; k < r.cost_trace.size(); ++k) {
    char cost[32], acc[32];
    std::snprintf(cost, sizeof cost, "%.2f", r.cost_trace[k]);
    if (k == 0) {
      trace << kCsvSchemaVersion << ",0,base,0,," << cost << '\n';
      continue;
    }
    const auto& it = r.iterations[k - 1];
    const std::string stem = "classifier_" + std::to_string(k);
    it.classifier->save((dir / (stem + ".bin")).string());
    write_json(dir / (stem + ".json"), it.classifier->to_json());
    files.push_back((dir / (stem + ".bin")).string());
    std::snprintf(acc, sizeof acc, "%.4f", it.report.train_accuracy);
    trace << kCsvSchemaVersion << ',' << k << ',' << stem << ',' << it.samples << ',' << acc << ',' << cost << '\n';
    std::printf("iteration %zu: cost %s (base %.2f)\n", k, cost, r.cost_trace[0]);
  }
  write_json(dir / "manifest.json",
             {{"config", c.to_json()},
              {"pi",
               {{"iterations", pc.iterations},
                {"beliefs_per_iteration", pc.beliefs_per_iteration},
                {"beliefs_schedule", pc.beliefs_schedule},
                {"history_share", pc.buffer.history_share},
                {"hidden", pc.hidden},
                {"epochs", pc.train.epochs},
                {"buffer_size", pc.buffer.size}}},
              {"classifiers", files},
              {"cost_trace", r.cost_trace},
              {"versions", {{"mapomdp", version_string()}}}});
  return 0;
}

int make_instance(const std::string& out_dir) {
  const fs::path dir(out_dir.empty() ? "data" : out_dir);
  fs::create_directories(dir);
  write_json(dir / "benchmark_graph.json", repair::benchmark_graph().to_json());
  write_json(dir / "benchmark_chain.json", repair::benchmark_chain().to_json());
  write_json(dir / "desk_graph.json", repair::desk_graph().to_json());
  write_json(dir / "desk_chain.json", repair::desk_chain().to_json());
  const repair::DamageChain two({0.2}, {0.0, 10.0});
  struct Tiny {
    const char* name;
    int vertices, agents;
  };
  for (const Tiny t : {Tiny{"tiny_path2_m1", 2, 1}, Tiny{"tiny_path3_m1", 3, 1}, Tiny{"tiny_path2_m2", 2, 2},
                       Tiny{"tiny_path3_m2", 3, 2}}) {
    const repair::RepairModel model(repair::RepairGraph::path(t.vertices), two, t.agents, 0.9);
    write_json(dir / (std::string(t.name) + "_graph.json"), model.graph().to_json());
    write_json(dir / (std::string(t.name) + "_chain.json"), model.chain().to_json());
    write_json(dir / (std::string(t.name) + "_tabular.json"), repair::to_tabular(model).to_json());
  }
  std::printf("wrote instances to %s\n", dir.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiagent rollout for the repair POMDP"};
  app.require_subcommand(1);

  Overrides eval_o, cmp_o, sweep_o, pi_o;
  auto* evaluate = app.add_subcommand("evaluate", "evaluate policies on paired initial states");
  add_common(evaluate, eval_o);
  auto* compare = app.add_subcommand("compare", "evaluate and compare policies pairwise");
  add_common(compare, cmp_o);

  auto* sweep = app.add_subcommand("sweep-comms", "communication architectures against one-at-a-time");
  add_common(sweep, sweep_o);
  std::vector<double> rhos{0.3, 0.5, 0.8, 1.0};
  sweep->add_option("--rhos", rhos, "cloud probabilities")->delimiter(',');

  auto* train = app.add_subcommand("train-pi", "approximate policy iteration with classifier policies");
  add_common(train, pi_o);
  pi::PiConfig pc;
  train->add_option("--iterations", pc.iterations, "policy iterations K")->check(CLI::PositiveNumber);
  train->add_option("--beliefs", pc.beliefs_per_iteration, "sampled beliefs per iteration")
      ->check(CLI::PositiveNumber);
  train->add_option("--beliefs-schedule", pc.beliefs_schedule, "beliefs for iterations 1, 2, ...")
      ->delimiter(',');
  train->add_option("--epochs", pc.train.epochs, "training epochs")->check(CLI::PositiveNumber);
  train->add_option("--buffer", pc.buffer.size, "memory buffer size")->check(CLI::PositiveNumber);
  train->add_option("--hidden", pc.hidden, "hidden layer widths")->delimiter(',');

  auto* make = app.add_subcommand("make-instance", "write instance files");
  std::string make_out = "data";
  make->add_option("--out", make_out, "output directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*evaluate) return run_grid(resolve(evaluate, eval_o), false, eval_o.quiet);
    if (*compare) return run_grid(resolve(compare, cmp_o), true, cmp_o.quiet);
    if (*sweep) return sweep_comms(resolve(sweep, sweep_o), rhos, sweep_o.radius, sweep_o.quiet);
    if (*train) {
      ExperimentConfig c = resolve(train, pi_o);
      if (c.policies.empty()) c.policies.push_back(PolicySpec::parse("base"));
      return train_pi(c, pc, pi_o.out, pi_o.quiet);
    }
    if (*make) return make_instance(make_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
