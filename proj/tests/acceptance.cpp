// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--only 3,4] [--out DIR] [--workers N] [--cli PATH] [--strict]
//
// Criteria 3, 4 and 6 share one paired grid on the desk instance. Every CSV
// written along the way lands in --out. With --strict the exit code is the
// number of failed criteria.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mapomdp/comms/architectures.hpp"
#include "mapomdp/core/evaluate.hpp"
#include "mapomdp/core/parallel.hpp"
#include "mapomdp/harness/config.hpp"
#include "mapomdp/harness/experiment.hpp"
#include "mapomdp/pi/classifier.hpp"
#include "mapomdp/pi/features.hpp"
#include "mapomdp/pi/iteration.hpp"
#include "mapomdp/pi/policy.hpp"
#include "mapomdp/policy/greedy.hpp"
#include "mapomdp/repair/tabular_bridge.hpp"
#include "mapomdp/rollout/rollout.hpp"
#include "mapomdp/sim/episode.hpp"
#include "repair_support.hpp"

namespace fs = std::filesystem;
using namespace mapomdp;
using repair::FactoredBelief;
using repair::RepairAction;
using repair::RepairModel;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Options {
  std::set<int> only;
  fs::path out = "acceptance_out";
  unsigned workers = 1;
  std::string cli;
  bool strict = false;
};

std::string format(const char* spec, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, spec, args...);
  return buf;
}

using Terminal = TerminalCost<RepairModel>;

Terminal terminal_of(const RepairModel& m) {
  return [&m](const FactoredBelief& b) { return m.terminal_cost(b); };
}

// ---------------------------------------------------------------------------
// 1. Oracle equivalence on flattened instances.

Outcome oracle_equivalence() {
  Rng rng(1001);
  constexpr int kInstances = 20;
  double worst_belief = 0.0;
  double worst_sigma = 0.0;
  int belief_checks = 0, mc_pass = 0;
  for (int inst = 0; inst < kInstances; ++inst) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 2));
    const int agents = 1 + inst % 2;
    const RepairModel m(testing::random_connected_graph(rng, n, 0.5), testing::random_chain(rng, 2), agents, 0.9);
    const TabularPOMDP tab = repair::to_tabular(m);

    for (int trial = 0; trial < 5; ++trial) {
      const FactoredBelief b = testing::random_factored_belief(m, rng);
      const auto u = testing::random_feasible_control(m, b, rng);
      const auto ui = repair::control_indices(u);
      const BeliefVector flat = repair::flatten_belief(m, b);
      const auto dist = m.observation_distribution(b, u, 1024);
      for (const auto& [z, pz] : *dist) {
        const auto factored = repair::flatten_belief(m, m.belief_step(b, u, z));
        const auto tabular = belief_update(tab, flat, ui, repair::observation_index(m, z));
        for (std::size_t i = 0; i < factored.size(); ++i)
          worst_belief = std::max(worst_belief, std::abs(factored[i] - tabular[i]));
        ++belief_checks;
      }
    }

    // Monte Carlo Q-factor on the factored model against the exhaustive
    // expectation on the flattened one.
    const FactoredBelief b = testing::random_factored_belief(m, rng);
    const auto u = testing::random_feasible_control(m, b, rng);
    const auto base = std::make_shared<const policy::GreedyPolicy>(m);
    rollout::RolloutConfig cfg;
    cfg.truncation = 3;
    cfg.n_traj = 10'000;
    const auto est = rollout::q_factor(m, b, u, *base, cfg, terminal_of(m), derive_seed(1001, {std::uint64_t(inst)}));

    const repair::FlattenedPolicy flat_base(m, base);
    const TerminalCost<TabularPOMDP> flat_terminal = [&m](const BeliefVector& x) {
      return m.terminal_cost(repair::unflatten_belief(m, x));
    };
    const auto ui = repair::control_indices(u);
    const BeliefVector flat = repair::flatten_belief(m, b);
    double oracle = tab.expected_stage_cost(flat, ui);
    double cont = 0.0;
    const auto dist = tab.observation_distribution(flat, ui, 1 << 20);
    for (const auto& [z, pz] : *dist)
      cont += pz * policy_cost_exact(tab, static_cast<const Policy<TabularPOMDP>&>(flat_base),
                                     belief_update(tab, flat, ui, z), cfg.truncation, flat_terminal);
    oracle += tab.discount() * cont;
    const double gap = std::abs(est.mean - oracle);
    const double sigma = est.stderr_ > 0.0 ? gap / est.stderr_ : (gap <= 1e-9 ? 0.0 : 1e9);
    worst_sigma = std::max(worst_sigma, sigma);
    mc_pass += sigma <= 3.0;
  }
  return {worst_belief <= 1e-12 && mc_pass == kInstances,
          format("%d instances, %d belief updates max |diff| %.2e (tol 1e-12); q_factor n_traj=1e4 within 3 stderr "
                 "on %d/%d, worst %.2f stderr",
                 kInstances, belief_checks, worst_belief, mc_pass, kInstances, worst_sigma)};
}

// ---------------------------------------------------------------------------
// 2. Complexity laws on the 32-vertex benchmark with four agents.

Outcome complexity() {
  const RepairModel m(repair::benchmark_graph(), repair::benchmark_chain(), 4, 0.95);
  const policy::GreedyPolicy base(m);
  rollout::RolloutConfig cfg;
  cfg.truncation = 2;
  cfg.n_traj = 2;
  std::vector<int> deg4;
  for (int v = 0; v < m.num_vertices(); ++v)
    if (m.graph().degree(v) == 4) deg4.push_back(v);
  if (deg4.size() < 4) return {false, format("only %zu degree-4 vertices", deg4.size())};

  Rng rng(2002);
  auto belief_at = [&](std::vector<int> locations) {
    repair::HiddenRepairState s{std::move(locations), std::vector<int>(m.num_vertices())};
    for (int& level : s.levels) level = static_cast<int>(uniform_index(rng, m.levels()));
    return m.point_belief(s);
  };

  bool ok = true;
  std::uint64_t std_q = 0, oat_q = 0, oo_min = 0;
  std::string laws;
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<int> loc;
    if (trial == 0) {
      loc.assign(deg4.begin(), deg4.begin() + 4);
    } else {
      for (int l = 0; l < 4; ++l) loc.push_back(static_cast<int>(uniform_index(rng, m.num_vertices())));
    }
    const FactoredBelief b = belief_at(loc);
    std::uint64_t prod = 1, sum = 0;
    for (int l = 0; l < 4; ++l) {
      const auto n = m.control_set(b, l).size();
      prod *= n;
      sum += n;
    }
    rollout::EvalCounter c;
    rollout::standard_rollout_control(m, b, base, cfg, {}, 7, &c);
    const std::uint64_t sq = c.q_factor_evaluations;
    c.reset();
    rollout::one_at_a_time_control(m, b, base, cfg, {}, 7, &c);
    const std::uint64_t oq = c.q_factor_evaluations;
    c.reset();
    rollout::order_optimized_control(m, b, base, cfg, {}, 7, &c);
    const std::uint64_t om = c.minimizations;
    ok = ok && sq == prod && oq == sum && om == 10;
    if (trial == 0) {
      std_q = sq;
      oat_q = oq;
      oo_min = om;
      ok = ok && prod == 625 && sq == 625 && oq <= 20;
    }
  }
  return {ok, format("degree-4 placement: standard %llu Q-factors (expect 625), one-at-a-time %llu (<= 20), "
                     "order-optimized %llu minimizations (expect 10); product/sum laws on 5 random placements %s",
                     static_cast<unsigned long long>(std_q), static_cast<unsigned long long>(oat_q),
                     static_cast<unsigned long long>(oo_min), ok ? "hold" : "violated")};
}

// ---------------------------------------------------------------------------
// 3, 4, 6. Paired grid on the desk instance.

const double kRhos[] = {0.3, 0.5, 0.8, 1.0};
constexpr int kIlcRadius = 2;

harness::ExperimentConfig desk_grid_config(const Options& opt) {
  harness::ExperimentConfig c;
  c.instance.graph = "builtin:desk";
  c.instance.chain = "builtin:desk";
  c.instance.agents = 2;
  c.instance.discount = 0.95;
  c.instance.p_damaged = 0.3;
  c.rollout.lookahead = 1;
  c.rollout.truncation = 10;
  c.rollout.n_traj = 30;
  c.evaluation.states = 200;
  c.evaluation.horizon = 150;
  c.evaluation.seed = 3003;
  c.evaluation.workers = opt.workers;
  c.policies = {harness::PolicySpec::parse("base"), harness::PolicySpec::parse("one-at-a-time"),
                harness::PolicySpec::parse("standard"), harness::PolicySpec::parse("order-optimized"),
                harness::PolicySpec::parse("amr-b")};
  for (double rho : kRhos) c.policies.push_back(harness::PolicySpec::parse("amr-ilc", kIlcRadius, rho));
  c.output.csv = (opt.out / "desk_grid.csv").string();
  c.output.manifest = (opt.out / "desk_grid_manifest.json").string();
  c.output.timing = (opt.out / "desk_grid_timing.csv").string();
  c.output.comparison = (opt.out / "desk_grid_comparison.csv").string();
  return c;
}

std::string ilc_id(double rho) {
  return harness::PolicySpec::default_id(harness::PolicySpec::parse("amr-ilc", kIlcRadius, rho));
}

Outcome cost_improvement(const harness::ExperimentResult& r) {
  const auto& base = r.at("base");
  const auto& oat = r.at("one-at-a-time");
  const auto c = harness::paired_compare("base", base.costs(), "one-at-a-time", oat.costs());
  return {c.mean_b < c.mean_a && c.p_lower < 0.01,
          format("base %.2f +- %.2f, one-at-a-time %.2f +- %.2f, paired diff %.2f (t=%.2f, one-sided p=%.3g; need "
                 "p<0.01)",
                 c.mean_a, base.summary.stderr_mean, c.mean_b, oat.summary.stderr_mean, c.mean_diff, c.t, c.p_lower)};
}

Outcome variant_ordering(const harness::ExperimentResult& r) {
  const double oat = r.at("one-at-a-time").summary.mean;
  const double std_mean = r.at("standard").summary.mean;
  const double oo = r.at("order-optimized").summary.mean;
  const double amrb = r.at("amr-b").summary.mean;
  const bool a = std_mean <= 1.10 * oat, b = oo <= 1.02 * oat, c = amrb >= oat;
  const auto pb = harness::paired_compare("one-at-a-time", r.at("one-at-a-time").costs(), "amr-b",
                                          r.at("amr-b").costs());
  return {a && b && c,
          format("(a) standard %.2f <= 1.10 x %.2f: %s; (b) order-optimized %.2f <= 1.02 x %.2f: %s; (c) AMR-B %.2f >= "
                 "%.2f: %s (paired p=%.3g)",
                 std_mean, oat, a ? "yes" : "no", oo, oat, b ? "yes" : "no", amrb, oat, c ? "yes" : "no",
                 pb.p_upper)};
}

Outcome comms_trend(const harness::ExperimentResult& r) {
  // Adjacent pairs: no significant increase as rho grows. Pooled trend:
  // per-state least-squares slope of cost on rho, one-sided t-test < 0.
  std::string pairs;
  bool adjacent_ok = true;
  for (std::size_t i = 0; i + 1 < std::size(kRhos); ++i) {
    const auto& lo = r.at(ilc_id(kRhos[i]));
    const auto& hi = r.at(ilc_id(kRhos[i + 1]));
    const auto c = harness::paired_compare(lo.id, lo.costs(), hi.id, hi.costs());
    adjacent_ok = adjacent_ok && c.p_upper >= 0.05;
    pairs += format("%s%.1f->%.1f: %.2f->%.2f (p_up=%.3g)", i ? ", " : "", kRhos[i], kRhos[i + 1], c.mean_a,
                    c.mean_b, c.p_upper);
  }
  const std::size_t n = r.at(ilc_id(kRhos[0])).states.size();
  const double rho_mean = std::accumulate(std::begin(kRhos), std::end(kRhos), 0.0) / std::size(kRhos);
  double sxx = 0.0;
  for (double x : kRhos) sxx += (x - rho_mean) * (x - rho_mean);
  std::vector<double> slopes(n, 0.0), zeros(n, 0.0);
  for (double x : kRhos) {
    const auto costs = r.at(ilc_id(x)).costs();
    for (std::size_t i = 0; i < n; ++i) slopes[i] += (x - rho_mean) * costs[i] / sxx;
  }
  const auto pooled = harness::paired_compare("zero", zeros, "slope", slopes);
  return {adjacent_ok && pooled.p_lower < 0.05,
          format("AMR-ILC r=%d means %s; pooled slope %.2f per unit rho (t=%.2f, one-sided p=%.3g; need p<0.05)",
                 kIlcRadius, pairs.c_str(), pooled.mean_b, pooled.t, pooled.p_lower)};
}

// ---------------------------------------------------------------------------
// 5. Communication degeneracies, control for control.

Outcome comms_degeneracies() {
  const RepairModel m(repair::desk_graph(), repair::desk_chain(), 3, 0.95);
  const auto base = std::make_shared<const policy::GreedyPolicy>(m);
  rollout::RolloutConfig cfg;
  cfg.truncation = 5;
  cfg.n_traj = 10;
  const int diameter = policy::ShortestPathTable(m.graph()).diameter();
  comms::Resources res;
  res.base = base;
  auto controls = [&](sim::Controller& c) {
    std::vector<sim::Joint> all;
    for (std::size_t i = 0; i < 4; ++i) {
      const auto init = sim::initial_condition(m, {0.4}, 5005, i);
      auto e = sim::run_episode(m, c, init, 30, sim::episode_seed(5005, i), true);
      all.insert(all.end(), e.controls.begin(), e.controls.end());
    }
    return all;
  };
  auto comms_controls = [&](const std::string& tag, int radius, double rho) {
    comms::CommsController c(m, comms::Architecture::parse(tag, radius, rho), res, cfg);
    return controls(c);
  };
  sim::RolloutController oat_c(m, base, cfg, sim::RolloutKind::kOneAtATime);
  const auto oat = controls(oat_c);
  const auto amrb = comms_controls("amr-b", 0, 1.0);
  struct Case {
    const char* name;
    std::vector<sim::Joint> got;
    const std::vector<sim::Joint>* want;
  };
  const Case cases[] = {
      {"ILC(rho=1)", comms_controls("amr-ilc", 1, 1.0), &oat},
      {"IB1(rho=1)", comms_controls("amr-ib1", 0, 1.0), &oat},
      {"IB0(rho=1)", comms_controls("amr-ib0", 0, 1.0), &oat},
      {"LC(r=0)=AMR-B", comms_controls("amr-lc", 0, 1.0), &amrb},
      {"LC(r=diam)", comms_controls("amr-lc", diameter, 1.0), &oat},
  };
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    const bool same = c.got == *c.want;
    ok = ok && same;
    detail += format("%s%s %s", detail.empty() ? "" : ", ", c.name, same ? "identical" : "DIFFERENT");
  }
  // LC(r=0) must differ from one-at-a-time somewhere for the check to mean anything.
  return {ok, format("%zu stages, m=3, diameter %d: %s; AMR-B vs one-at-a-time differ: %s", oat.size(), diameter,
                     detail.c_str(), amrb != oat ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 7. Classifier: gradients, learnability, masked inference.

Outcome classifier_checks(const Options& opt) {
  const RepairModel m(repair::desk_graph(), repair::desk_chain(), 2, 0.95);
  const int dim = static_cast<int>(pi::feature_dim(m));
  const int classes = m.num_vertices() + 1;

  // (a) central differences per parameter block, both modes.
  Rng rng(7007);
  pi::PolicyClassifier net({dim, {256, 64}, classes}, 7);
  for (double& p : net.parameters()) p += 0.02 * (uniform01(rng) - 0.5);
  for (double& v : net.running_mean()) v = uniform01(rng) - 0.5;
  for (double& v : net.running_var()) v = 0.5 + uniform01(rng);
  pi::Dataset batch(dim);
  for (int i = 0; i < 16; ++i) {
    const FactoredBelief b = testing::random_factored_belief(m, rng);
    const auto u = testing::random_feasible_control(m, b, rng);
    const std::vector<int> order{0, 1};
    batch.add(pi::encode_features(m, b, i % 2, u, order), static_cast<int>(uniform_index(rng, classes)));
  }
  std::vector<std::pair<std::string, std::size_t>> blocks;
  {
    int in = dim;
    for (int h : {256, 64}) {
      blocks.push_back({format("dense%zu.W", blocks.size() / 2), static_cast<std::size_t>(in) * h});
      blocks.push_back({format("dense%zu.b", blocks.size() / 2), static_cast<std::size_t>(h)});
      in = h;
    }
    blocks.push_back({"bn.gamma", 64});
    blocks.push_back({"bn.beta", 64});
    blocks.push_back({"out.W", static_cast<std::size_t>(64) * classes});
    blocks.push_back({"out.b", static_cast<std::size_t>(classes)});
  }
  std::vector<std::size_t> rows(batch.size());
  std::iota(rows.begin(), rows.end(), 0);
  double worst = 0.0;
  auto params = net.parameters();
  for (bool training : {true, false}) {
    std::vector<double> grad;
    net.loss(batch, rows, training, &grad);
    std::size_t offset = 0;
    for (const auto& [name, size] : blocks) {
      for (int k = 0; k < 25; ++k) {
        const std::size_t p = offset + uniform_index(rng, size);
        const double keep = params[p];
        params[p] = keep + 1e-6;
        const double up = net.loss(batch, rows, training);
        params[p] = keep - 1e-6;
        const double down = net.loss(batch, rows, training);
        params[p] = keep;
        const double numeric = (up - down) / 2e-6;
        worst = std::max(worst, std::abs(numeric - grad[p]) / std::max({std::abs(numeric), std::abs(grad[p]), 1e-4}));
      }
      offset += size;
    }
    if (offset != params.size()) return {false, "parameter layout mismatch"};
  }
  const bool grads_ok = worst <= 1e-4;

  // (b) 10k rollout-labelled samples, held-out agreement.
  const auto base = std::make_shared<const policy::GreedyPolicy>(m);
  rollout::RolloutConfig cfg;
  cfg.truncation = 10;
  cfg.n_traj = 30;
  const std::vector<pi::RepairPolicyPtr> previous{base};
  pi::BufferConfig bcfg;
  bcfg.size = 5000;
  const auto train_buffer = pi::MemoryBuffer::build(m, previous, bcfg, 71);
  const auto test_buffer = pi::MemoryBuffer::build(m, previous, bcfg, 72);
  const pi::Dataset train = pi::generate_samples(m, *base, cfg, 5000, train_buffer, 73, opt.workers);
  const pi::Dataset held_out = pi::generate_samples(m, *base, cfg, 1000, test_buffer, 74, opt.workers);
  pi::PolicyClassifier clf({dim, {256, 64}, classes}, 75);
  const auto report = clf.train(train, {}, 76);
  const double agreement = clf.accuracy(held_out);
  clf.save((opt.out / "desk_classifier.bin").string());

  // (c) adversarial logits: the output bias pushes an infeasible class far
  // above everything else.
  Rng arng(7070);
  pi::PolicyClassifier adv = clf;
  auto bias = adv.parameters().last(classes);
  int infeasible_emitted = 0, trials = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const FactoredBelief b = testing::random_factored_belief(m, arng);
    int target = 0;
    const int loc = b.agent_locations[trial % 2];
    do target = static_cast<int>(uniform_index(arng, m.num_vertices()));
    while (m.graph().adjacent(loc, target));
    for (int k = 0; k < classes; ++k) bias[k] = (uniform01(arng) - 0.5) * 1e3;
    bias[RepairAction::move(target).class_index()] = 1e9;
    const std::vector<int> order{0, 1};
    const auto u = pi::infer_control(adv, m, b, base->act(b), order);
    for (int l = 0; l < m.num_agents(); ++l) {
      infeasible_emitted += !m.feasible(b.agent_locations[l], u[l]);
      ++trials;
    }
  }
  return {grads_ok && agreement >= 0.60 && infeasible_emitted == 0,
          format("(a) worst relative gradient error %.2e over 8 blocks x 2 modes (tol 1e-4); (b) %zu samples, %d epochs, "
                 "train %.3f, held-out agreement %.3f on %zu samples (need >= 0.60); (c) %d/%d adversarial "
                 "components infeasible",
                 worst, train.size(), report.epochs_run, report.train_accuracy, agreement, held_out.size(),
                 infeasible_emitted, trials)};
}

// ---------------------------------------------------------------------------
// 8. Approximate policy iteration on the terminating variant.

Outcome pi_improvement(const Options& opt) {
  const RepairModel m(repair::desk_graph(), harness::load_chain("builtin:desk", true), 2, 0.99);
  pi::PiConfig cfg;
  cfg.iterations = 3;
  cfg.rollout.truncation = 10;
  cfg.rollout.n_traj = 30;
  // Iterations past the first run the classifier inside every simulated
  // stage, so they get smaller budgets; only iteration 1 is asserted.
  cfg.beliefs_schedule = {50000, 2000, 1000};
  cfg.buffer.size = 50000;
  cfg.workers = opt.workers;
  const auto r = pi::pi_iterate(m, std::make_shared<const policy::GreedyPolicy>(m), cfg, 8008);
  std::string trace;
  for (std::size_t k = 0; k < r.cost_trace.size(); ++k)
    trace += format("%s%s %.2f", k ? ", " : "", k ? format("iter%zu", k).c_str() : "base", r.cost_trace[k]);
  bool monotone = true;
  for (std::size_t k = 2; k < r.cost_trace.size(); ++k) monotone = monotone && r.cost_trace[k] <= r.cost_trace[k - 1];
  std::ofstream f(opt.out / "pi_trace.csv");
  f << "iteration,mean_cost\n";
  for (std::size_t k = 0; k < r.cost_trace.size(); ++k) f << k << ',' << format("%.6f", r.cost_trace[k]) << '\n';
  return {r.cost_trace.size() > 1 && r.cost_trace[1] < r.cost_trace[0],
          format("gamma=0, alpha=0.99, %zu eval states, beliefs per iteration 50000/2000/1000: %s; "
                 "non-increasing after iteration 1: %s (logged only)",
                 cfg.eval_states, trace.c_str(), monotone ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 9. Byte-identical CSVs across worker counts.

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism(const Options& opt) {
  harness::ExperimentConfig c;
  c.instance.agents = 3;
  c.rollout.truncation = 4;
  c.rollout.n_traj = 6;
  c.evaluation.states = 12;
  c.evaluation.horizon = 30;
  c.evaluation.seed = 9009;
  for (const char* p : {"base", "one-at-a-time", "order-optimized", "amr-lc"})
    c.policies.push_back(harness::PolicySpec::parse(p, 2, 0.5));
  c.policies.push_back(harness::PolicySpec::parse("amr-ilc", 2, 0.5));
  c.policies.push_back(harness::PolicySpec::parse("amr-ib1", 2, 0.5));
  std::vector<std::string> csv;
  for (unsigned w : {1u, 2u, 4u, 1u}) {
    c.evaluation.workers = w;
    std::ostringstream out;
    harness::write_results_csv(out, harness::run_experiment(c));
    csv.push_back(out.str());
  }
  bool lib_ok = std::all_of(csv.begin(), csv.end(), [&](const std::string& s) { return s == csv[0]; });

  std::string cli_detail = "CLI not given";
  bool cli_ok = true;
  if (!opt.cli.empty()) {
    std::vector<std::string> files;
    for (const auto& [verb, w] : std::vector<std::pair<std::string, int>>{
             {"evaluate", 1}, {"evaluate", 3}, {"compare", 1}, {"compare", 4}, {"compare", 1}}) {
      const fs::path dir = opt.out / format("cli_%s_w%d_%zu", verb.c_str(), w, files.size());
      const std::string cmd =
          format("\"%s\" %s --policy base --policy one-at-a-time --policy amr-ilc --policy amr-ib0 --rho 0.5 "
                 "--radius 1 --agents 2 --states 10 --horizon 25 --truncation 4 --trajectories 5 --seed 99 "
                 "--workers %d --quiet --out \"%s\" > /dev/null",
                 opt.cli.c_str(), verb.c_str(), w, dir.string().c_str());
      if (std::system(cmd.c_str()) != 0) {
        cli_ok = false;
        break;
      }
      files.push_back(slurp(dir / "results.csv"));
    }
    cli_ok = cli_ok && !files.empty() &&
             std::all_of(files.begin(), files.end(), [&](const std::string& s) { return s == files[0]; });
    cli_detail = format("CLI evaluate/compare with 1, 3, 4 workers: %s", cli_ok ? "identical" : "DIFFERENT");
  }
  return {lib_ok && cli_ok, format("library grid with 1, 2, 4, 1 workers: %s; %s", lib_ok ? "identical" : "DIFFERENT",
                                   cli_detail.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  Options opt;
  std::vector<int> only;
  std::string out = opt.out.string();
  app.add_option("--only", only, "criteria to run")->delimiter(',');
  app.add_option("--out", out, "artifact directory");
  app.add_option("--workers", opt.workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--cli", opt.cli, "path to the mapomdp CLI for the determinism check");
  app.add_flag("--strict", opt.strict, "exit code = number of failed criteria");
  CLI11_PARSE(app, argc, argv);
  opt.only = {only.begin(), only.end()};
  opt.out = out;
  fs::create_directories(opt.out);

  std::ofstream report(opt.out / "acceptance_report.txt");
  int failed = 0;
  auto run = [&](int id, const char* title, const std::function<Outcome()>& fn) {
    if (!opt.only.empty() && !opt.only.count(id)) return;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::string line =
        format("criterion %d %s: %s [%.0fs] %s", id, title, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    report << line << '\n';
    report.flush();
    failed += !o.pass;
  };

  run(1, "oracle equivalence", oracle_equivalence);
  run(2, "complexity laws", complexity);

  std::unique_ptr<harness::ExperimentResult> grid;
  auto desk_grid = [&]() -> const harness::ExperimentResult& {
    if (!grid) {
      const auto cfg = desk_grid_config(opt);
      const RepairModel model = harness::load_model(cfg.instance);
      grid = std::make_unique<harness::ExperimentResult>(harness::run_experiment(cfg, model));
      harness::persist(cfg, model, *grid);
    }
    return *grid;
  };
  run(3, "cost improvement", [&] { return cost_improvement(desk_grid()); });
  run(4, "variant ordering", [&] { return variant_ordering(desk_grid()); });
  run(5, "comms degeneracies", comms_degeneracies);
  run(6, "comms trend", [&] { return comms_trend(desk_grid()); });
  run(7, "classifier", [&] { return classifier_checks(opt); });
  run(8, "approximate PI", [&] { return pi_improvement(opt); });
  run(9, "determinism", [&] { return determinism(opt); });

  std::printf("%d criteria failed\n", failed);
  return opt.strict ? failed : 0;
}
