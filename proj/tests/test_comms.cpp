#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "mapomdp/comms/architectures.hpp"
#include "mapomdp/policy/greedy.hpp"
#include "mapomdp/rollout/rollout.hpp"
#include "mapomdp/sim/episode.hpp"
#include "repair_support.hpp"

using namespace mapomdp;
using namespace mapomdp::comms;
using repair::RepairAction;

namespace {

rollout::RolloutConfig quick() {
  rollout::RolloutConfig cfg;
  cfg.truncation = 3;
  cfg.n_traj = 3;
  return cfg;
}

struct Fixture {
  repair::RepairModel model;
  std::shared_ptr<policy::GreedyPolicy> base;
  policy::ShortestPathTable paths;
  Terminal terminal;

  explicit Fixture(int agents)
      : model(repair::desk_graph(), repair::desk_chain(), agents, 0.95),
        base(std::make_shared<policy::GreedyPolicy>(model)),
        paths(model.graph()),
        terminal([this](const FactoredBelief& b) { return model.terminal_cost(b); }) {}

  FactoredBelief belief(Rng& rng) const { return model.random_initial_state({0.5}, rng).belief; }

  Joint one(const FactoredBelief& b, std::uint64_t seed) const {
    return rollout::one_at_a_time_control(model, b, *base, quick(), terminal, seed).control;
  }

  std::vector<Joint> episode(Architecture arch, std::uint64_t seed, int horizon = 25) const {
    CommsController c(model, arch, {base, nullptr, {}, -1}, quick());
    Rng rng(seed);
    const auto ic = model.random_initial_state({0.5}, rng);
    return sim::run_episode(model, c, ic, horizon, seed, true).controls;
  }
};

}  // namespace

TEST_SUITE("architecture") {
  TEST_CASE("parse and validate") {
    CHECK(Architecture::parse("amr-ilc", 2, 0.5).variant == Variant::kILC);
    CHECK(Architecture::parse("amr-ib0").name() == "amr-ib0");
    CHECK_THROWS(Architecture::parse("amr-x"));
    CHECK_THROWS(Architecture::parse("amr-ilc", 1, 0.0));
    CHECK_THROWS(Architecture::parse("amr-lc", -1));
  }

  TEST_CASE("cloud frequency matches rho") {
    for (double rho : {0.3, 0.8}) {
      const int n = 10000;
      int hits = 0;
      for (int k = 0; k < n; ++k) hits += cloud_available(rho, derive_seed(17, {static_cast<std::uint64_t>(k)}));
      CHECK(std::abs(static_cast<double>(hits) / n - rho) <= 3 * std::sqrt(rho * (1 - rho) / n));
    }
  }
}

TEST_SUITE("signaling") {
  TEST_CASE("single agent: every architecture is one-at-a-time") {
    const Fixture f(1);
    Rng rng(101);
    for (int trial = 0; trial < 10; ++trial) {
      const auto b = f.belief(rng);
      const auto want = f.one(b, trial);
      CHECK(amr_b_control(f.model, b, *f.base, quick(), f.terminal, trial) == want);
      CHECK(amr_lc_control(f.model, b, *f.base, f.paths, 0, quick(), f.terminal, trial) == want);
    }
  }

  TEST_CASE("radius endpoints: r=0 is AMR-B, r >= diameter is one-at-a-time") {
    const Fixture f(3);
    Rng rng(102);
    const int diameter = f.paths.diameter();
    for (int trial = 0; trial < 40; ++trial) {
      const auto b = f.belief(rng);
      CHECK(amr_lc_control(f.model, b, *f.base, f.paths, 0, quick(), f.terminal, trial) ==
            amr_b_control(f.model, b, *f.base, quick(), f.terminal, trial));
      CHECK(amr_lc_control(f.model, b, *f.base, f.paths, diameter, quick(), f.terminal, trial) == f.one(b, trial));
      CHECK(amr_lc_control(f.model, b, *f.base, f.paths, diameter + 3, quick(), f.terminal, trial) ==
            f.one(b, trial));
    }
  }

  TEST_CASE("agents three hops apart on a path do not communicate at r=2") {
    const repair::RepairModel m(repair::RepairGraph::path(5), repair::desk_chain(), 2, 0.95);
    const policy::GreedyPolicy base(m);
    const policy::ShortestPathTable paths(m.graph());
    const Terminal terminal = [&m](const FactoredBelief& b) { return m.terminal_cost(b); };
    Rng rng(103);
    for (int trial = 0; trial < 20; ++trial) {
      auto b = testing::random_factored_belief(m, rng);
      b.agent_locations = {0, 3};
      for (int v : {0, 3}) {
        auto d = b.d(v);
        std::fill(d.begin(), d.end(), 0.0);
        d[uniform_index(rng, 3)] = 1.0;
      }
      CHECK_FALSE(in_range(paths, 0, 3, 2));
      CHECK(amr_lc_control(m, b, base, paths, 2, quick(), terminal, trial) ==
            amr_b_control(m, b, base, quick(), terminal, trial));
      CHECK(amr_lc_control(m, b, base, paths, 3, quick(), terminal, trial) ==
            rollout::one_at_a_time_control(m, b, base, quick(), terminal, trial).control);
    }
  }

  TEST_CASE("AMR-B minimizes each agent against base components only") {
    const Fixture f(2);
    Rng rng(104);
    for (int trial = 0; trial < 10; ++trial) {
      const auto b = f.belief(rng);
      const auto base_u = f.base->act(b);
      const auto q = rollout::make_q_evaluator(f.model, *f.base, quick(), f.terminal, trial, nullptr);
      const auto u = amr_b_control(f.model, b, *f.base, quick(), f.terminal, trial);
      for (int l = 0; l < 2; ++l)
        CHECK(u[l] == rollout::minimize_component(f.model, b, l, base_u, base_u[l], q, nullptr).component);
    }
  }

  TEST_CASE("perfect signals reproduce one-at-a-time") {
    const Fixture f(3);
    Rng rng(105);
    for (int trial = 0; trial < 10; ++trial) {
      const auto b = f.belief(rng);
      const auto want = f.one(b, trial);
      CHECK(signaled_control(f.model, b, *f.base, want, quick(), f.terminal, trial) == want);
    }
  }

  TEST_CASE("counter law for the independent minimizations") {
    const Fixture f(3);
    Rng rng(106);
    const auto b = f.belief(rng);
    rollout::EvalCounter counter;
    amr_b_control(f.model, b, *f.base, quick(), f.terminal, 1, &counter);
    std::uint64_t sum = 0;
    for (int l = 0; l < 3; ++l) sum += f.model.control_set(b, l).size();
    CHECK(counter.q_factor_evaluations == sum);
    CHECK(counter.minimizations == 3);
  }

  TEST_CASE("missing resources are errors") {
    const Fixture f(2);
    Rng rng(107);
    const auto b = f.belief(rng);
    CHECK_THROWS(amr_n_control(f.model, b, *f.base, nullptr, quick(), f.terminal, 1));
    const std::vector<RepairPolicyPtr> two{f.base, f.base};
    CHECK_THROWS(amr_pi_control(f.model, b, two, 1, quick(), f.terminal, 1));
    CHECK_THROWS(CommsController(f.model, Architecture::parse("amr-n"), {f.base, nullptr, {}, -1}, quick()));
  }

  TEST_CASE("AMR-PI with identical iterations signals that policy") {
    const Fixture f(2);
    Rng rng(108);
    const std::vector<RepairPolicyPtr> chain{f.base, f.base, f.base};
    for (int trial = 0; trial < 5; ++trial) {
      const auto b = f.belief(rng);
      CHECK(amr_pi_control(f.model, b, chain, 2, quick(), f.terminal, trial) ==
            amr_b_control(f.model, b, *f.base, quick(), f.terminal, trial));
    }
  }
}

TEST_SUITE("episodes") {
  TEST_CASE("rho=1: ILC, IB1 and IB0 reproduce one-at-a-time control sequences") {
    const Fixture f(2);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto want = f.episode(Architecture::parse("shared"), seed);
      CHECK(f.episode(Architecture::parse("amr-ilc", 1, 1.0), seed) == want);
      CHECK(f.episode(Architecture::parse("amr-ib1", 0, 1.0), seed) == want);
      CHECK(f.episode(Architecture::parse("amr-ib0", 0, 1.0), seed) == want);
    }
  }

  TEST_CASE("shared architecture matches the plain rollout controller") {
    const Fixture f(2);
    sim::RolloutController rc(f.model, f.base, quick(), sim::RolloutKind::kOneAtATime);
    Rng rng(4);
    const auto ic = f.model.random_initial_state({0.5}, rng);
    CHECK(sim::run_episode(f.model, rc, ic, 25, 4, true).controls == f.episode(Architecture::parse("shared"), 4));
  }

  TEST_CASE("IB0 with an unreachable cloud is the base policy on local beliefs") {
    const Fixture f(2);
    const double rho = 1e-12;
    CommsController c(f.model, Architecture::parse("amr-ib0", 0, rho), {f.base, nullptr, {}, -1}, quick());
    Rng rng(5);
    const auto ic = f.model.random_initial_state({0.5}, rng);
    const auto got = sim::run_episode(f.model, c, ic, 30, 5, true).controls;
    CHECK(c.cloud_hits() == 0);

    // Replay: every agent follows the greedy policy on its own local belief.
    std::vector<FactoredBelief> local(2, ic.belief);
    auto state = ic.state;
    for (int tau = 0; tau < 30; ++tau) {
      Joint assumed[2] = {f.base->act(local[0]), f.base->act(local[1])};
      const Joint u{assumed[0][0], assumed[1][1]};
      CHECK(u == got[tau]);
      Rng env = make_rng(derive_seed(5, {key(Stream::kEnvironment), static_cast<std::uint64_t>(tau)}));
      const auto out = f.model.step(state, u, env);
      for (int l = 0; l < 2; ++l) {
        std::vector<char> own(2, 0);
        own[l] = 1;
        f.model.advance_belief_partial(local[l], assumed[l], out.observation, own, true);
      }
      state = out.next;
    }
  }

  TEST_CASE("single agent: IB1 is one-at-a-time for any rho and its local belief is exact") {
    const Fixture f(1);
    for (double rho : {0.2, 0.7}) {
      CommsController c(f.model, Architecture::parse("amr-ib1", 0, rho), {f.base, nullptr, {}, -1}, quick());
      Rng rng(6);
      const auto ic = f.model.random_initial_state({0.5}, rng);
      auto state = ic.state;
      auto global = ic.belief;
      c.reset(ic, 6);
      for (int tau = 0; tau < 25; ++tau) {
        const auto u = c.choose(global, tau);
        CHECK(u == rollout::one_at_a_time_control(f.model, global, *f.base, quick(), f.terminal,
                                                  derive_seed(6, {key(Stream::kRollout), static_cast<std::uint64_t>(tau)}))
                       .control);
        Rng env = make_rng(derive_seed(6, {key(Stream::kEnvironment), static_cast<std::uint64_t>(tau)}));
        const auto out = f.model.step(state, u, env);
        f.model.advance_belief(global, u, out.observation);
        c.observe(u, out.observation, global);
        state = out.next;
        CHECK(c.bank().local[0] == global);
      }
    }
  }

  TEST_CASE("local beliefs stay valid and equal the global belief at every sync") {
    const Fixture f(3);
    for (const char* tag : {"amr-ib1", "amr-ib0"}) {
      CommsController c(f.model, Architecture::parse(tag, 0, 0.5), {f.base, nullptr, {}, -1}, quick());
      Rng rng(7);
      const auto ic = f.model.random_initial_state({0.5}, rng);
      auto state = ic.state;
      auto global = ic.belief;
      c.reset(ic, 7);
      std::uint64_t hits = 0;
      for (int tau = 0; tau < 40; ++tau) {
        const auto u = c.choose(global, tau);
        if (c.cloud_hits() > hits) {
          hits = c.cloud_hits();
          for (const auto& b : c.bank().local) CHECK(b == global);
        }
        for (int l = 0; l < 3; ++l) CHECK(f.model.feasible(state.agent_locations[l], u[l]));
        Rng env = make_rng(derive_seed(7, {key(Stream::kEnvironment), static_cast<std::uint64_t>(tau)}));
        const auto out = f.model.step(state, u, env);
        f.model.advance_belief(global, u, out.observation);
        c.observe(u, out.observation, global);
        state = out.next;
        CHECK_NOTHROW(c.bank().validate(f.model));
        for (int l = 0; l < 3; ++l) CHECK(c.bank().local[l].agent_locations[l] == state.agent_locations[l]);
      }
      CHECK(hits > 0);
      CHECK(c.cloud_draws() == 40);
    }
  }
}
