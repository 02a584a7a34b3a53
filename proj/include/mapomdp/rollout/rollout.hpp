#pragma once

// Truncated rollout over any PomdpModel: Monte Carlo Q-factors with
// base-policy continuation and a terminal cost, and the lookahead
// minimizations built on them (standard, one-agent-at-a-time,
// order-optimized, multistep).
//
// Every Q-factor evaluated during one decision uses the same seed, so all
// candidates see the same simulated randomness and Q is a deterministic
// function of (belief, control, seed).

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "mapomdp/core/error.hpp"
#include "mapomdp/core/evaluate.hpp"
#include "mapomdp/core/model.hpp"
#include "mapomdp/core/rng.hpp"
#include "mapomdp/rollout/config.hpp"

namespace mapomdp::rollout {

template <PomdpModel M>
struct QFactorEstimate {
  JointControl<M> control;
  double mean = 0.0;
  double stderr_ = 0.0;
  int n = 0;
};

template <PomdpModel M>
struct Decision {
  JointControl<M> control;
  double q = 0.0;          // Q-factor of the returned control
  std::vector<int> order;  // agent order used (order-optimized reports its own)
};

template <PomdpModel M>
using QEvaluator = std::function<QFactorEstimate<M>(const typename M::Belief&, const JointControl<M>&)>;

// Discounted cost of t base-policy stages from (belief, hidden state) plus
// alpha^t * terminal at the last belief. Stage costs are the belief-expected
// costs g(b,u).
template <PomdpModel M>
double truncated_base_cost(const M& model, const Policy<M>& base, typename M::Belief belief,
                           typename M::State state, int stages, const TerminalCost<M>& terminal,
                           Rng& rng) {
  double value = 0.0;
  double scale = 1.0;
  constexpr bool in_place = requires(typename M::State& s, typename M::Observation& z) {
    model.advance_state(s, JointControl<M>{}, rng, z);
  };
  [[maybe_unused]] typename M::Observation z{};
  for (int k = 0; k < stages; ++k) {
    const JointControl<M> u = base.act(belief);
    value += scale * model.expected_stage_cost(belief, u);
    if constexpr (in_place) {
      model.advance_state(state, u, rng, z);
      model.advance_belief(belief, u, z);
    } else {
      StepOutcome<M> out = model.step(state, u, rng);
      model.advance_belief(belief, u, out.observation);
      state = std::move(out.next);
    }
    scale *= model.discount();
  }
  if (terminal) value += scale * terminal(belief);
  return value;
}

namespace detail {

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  int n = 0;
  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  double mean() const { return sum / n; }
  // Unbiased sample variance of the observations.
  double variance() const {
    if (n < 2) return 0.0;
    const double m = mean();
    return std::max(0.0, (sum_sq - n * m * m) / (n - 1));
  }
};

}  // namespace detail

// g(b,u) + alpha * E_z[ J~(F(b,u,z)) ]. The z-expectation is exact when the
// model enumerates at most cfg.obs_enum_cap outcomes; otherwise it is sampled
// jointly with the continuation through n_traj hidden-state draws.
template <PomdpModel M>
QFactorEstimate<M> q_factor(const M& model, const typename M::Belief& b, const JointControl<M>& u,
                            const Policy<M>& base, const RolloutConfig& cfg,
                            const TerminalCost<M>& terminal, std::uint64_t seed,
                            EvalCounter* counter = nullptr) {
  if (!is_feasible(model, b, u)) throw InfeasibleControl("q_factor: control is infeasible at b");
  const double alpha = model.discount();
  const double g = model.expected_stage_cost(b, u);
  QFactorEstimate<M> est{u, g, 0.0, cfg.n_traj};
  std::uint64_t trajectories = 0;

  if (auto dist = model.observation_distribution(b, u, cfg.obs_enum_cap)) {
    // Trajectory k uses the same stream under every z, so the branches are
    // combined per k before taking the sample variance.
    double cont = 0.0;
    std::vector<double> combined(cfg.truncation == 0 ? 0 : cfg.n_traj, 0.0);
    for (const auto& [z, pz] : *dist) {
      typename M::Belief next = b;
      model.advance_belief(next, u, z);
      if (cfg.truncation == 0) {
        cont += pz * (terminal ? terminal(next) : 0.0);
        continue;
      }
      for (int k = 0; k < cfg.n_traj; ++k) {
        Rng rng = make_rng(derive_seed(seed, {static_cast<std::uint64_t>(k)}));
        typename M::State s = model.sample_state(next, rng);
        combined[k] +=
            pz * truncated_base_cost(model, base, next, std::move(s), cfg.truncation, terminal, rng);
      }
      trajectories += static_cast<std::uint64_t>(cfg.n_traj);
    }
    if (!combined.empty()) {
      detail::Moments mom;
      for (double y : combined) mom.add(y);
      cont = mom.mean();
      est.stderr_ = alpha * std::sqrt(mom.variance() / cfg.n_traj);
    }
    est.mean = g + alpha * cont;
  } else {
    detail::Moments mom;
    for (int k = 0; k < cfg.n_traj; ++k) {
      Rng rng = make_rng(derive_seed(seed, {static_cast<std::uint64_t>(k)}));
      typename M::State s = model.sample_state(b, rng);
      StepOutcome<M> out = model.step(s, u, rng);
      typename M::Belief next = b;
      model.advance_belief(next, u, out.observation);
      mom.add(truncated_base_cost(model, base, std::move(next), std::move(out.next),
                                  cfg.truncation, terminal, rng));
    }
    trajectories += static_cast<std::uint64_t>(cfg.n_traj);
    est.mean = g + alpha * mom.mean();
    est.stderr_ = alpha * std::sqrt(mom.variance() / cfg.n_traj);
  }
  if (counter) {
    counter->q_factor_evaluations.fetch_add(1, std::memory_order_relaxed);
    counter->trajectories_simulated.fetch_add(trajectories, std::memory_order_relaxed);
  }
  return est;
}

// Keeps references to `model` and `base`; the config is copied.
template <PomdpModel M>
QEvaluator<M> make_q_evaluator(const M& model, const Policy<M>& base, const RolloutConfig& cfg,
                               TerminalCost<M> terminal, std::uint64_t seed,
                               EvalCounter* counter) {
  return [&model, &base, cfg, terminal = std::move(terminal), seed, counter](
             const typename M::Belief& b, const JointControl<M>& u) {
    return q_factor(model, b, u, base, cfg, terminal, seed, counter);
  };
}

template <PomdpModel M>
struct ComponentChoice {
  typename M::Control component;
  double q = std::numeric_limits<double>::infinity();
};

// argmin over agent `agent`'s components with the other components of
// `partial` held fixed. Ties go to `preferred` (the base component), then to
// the earliest component in control-set order.
template <PomdpModel M>
ComponentChoice<M> minimize_component(const M& model, const typename M::Belief& b, int agent,
                                      JointControl<M> partial,
                                      const typename M::Control& preferred,
                                      const QEvaluator<M>& q, EvalCounter* counter) {
  ComponentChoice<M> best;
  bool best_is_preferred = false;
  bool have = false;
  for (const auto& c : model.control_set(b, agent)) {
    partial[agent] = c;
    const double value = q(b, partial).mean;
    const bool is_pref = c == preferred;
    if (!have || value < best.q || (value == best.q && is_pref && !best_is_preferred)) {
      best = {c, value};
      best_is_preferred = is_pref;
      have = true;
    }
  }
  if (counter) counter->minimizations.fetch_add(1, std::memory_order_relaxed);
  return best;
}

// Sequential minimization in `order`: agents already visited keep their
// optimized components, agents not yet visited sit at `start`'s components.
template <PomdpModel M>
Decision<M> one_at_a_time(const M& model, const typename M::Belief& b,
                          const JointControl<M>& start, const std::vector<int>& order,
                          const QEvaluator<M>& q, EvalCounter* counter) {
  Decision<M> d{start, 0.0, order};
  for (int agent : order) {
    const ComponentChoice<M> best =
        minimize_component(model, b, agent, d.control, start[agent], q, counter);
    d.control[agent] = best.component;
    d.q = best.q;
  }
  return d;
}

template <PomdpModel M>
Decision<M> one_at_a_time_control(const M& model, const typename M::Belief& b,
                                  const Policy<M>& base, const RolloutConfig& cfg,
                                  const TerminalCost<M>& terminal, std::uint64_t seed,
                                  EvalCounter* counter = nullptr) {
  cfg.validate(model.num_agents());
  const auto q = make_q_evaluator(model, base, cfg, terminal, seed, counter);
  return one_at_a_time(model, b, base.act(b), cfg.order(model.num_agents()), q, counter);
}

// Minimizes over the full joint control set. Ties go to the base joint
// control, then to the lexicographically smallest tuple in control-set order.
template <PomdpModel M>
Decision<M> standard_rollout_control(const M& model, const typename M::Belief& b,
                                     const Policy<M>& base, const RolloutConfig& cfg,
                                     const TerminalCost<M>& terminal, std::uint64_t seed,
                                     EvalCounter* counter = nullptr) {
  const int m = model.num_agents();
  cfg.validate(m);
  std::vector<std::vector<typename M::Control>> sets(m);
  std::size_t joint = 1;
  for (int l = 0; l < m; ++l) {
    sets[l] = model.control_set(b, l);
    joint *= sets[l].size();
    if (joint > cfg.joint_cap)
      throw CapExceeded("standard rollout: joint control set exceeds cap of " +
                        std::to_string(cfg.joint_cap));
  }
  const auto q = make_q_evaluator(model, base, cfg, terminal, seed, counter);
  const JointControl<M> base_u = base.act(b);

  Decision<M> best{base_u, std::numeric_limits<double>::infinity(), cfg.order(m)};
  bool best_is_base = false;
  std::vector<std::size_t> digit(m, 0);
  JointControl<M> u(m);
  for (std::size_t n = 0; n < joint; ++n) {
    for (int l = 0; l < m; ++l) u[l] = sets[l][digit[l]];
    const double value = q(b, u).mean;
    const bool is_base = u == base_u;
    if (n == 0 || value < best.q || (value == best.q && is_base && !best_is_base)) {
      best.control = u;
      best.q = value;
      best_is_base = is_base;
    }
    for (int l = m; l-- > 0;) {
      if (++digit[l] < sets[l].size()) break;
      digit[l] = 0;
    }
  }
  if (counter) counter->minimizations.fetch_add(1, std::memory_order_relaxed);
  return best;
}

// Greedy order construction: at each slot, every unplaced agent runs its
// single-agent minimization (placed agents at their chosen components,
// unplaced agents at base); the agent with the smallest resulting Q takes the
// slot, ties to the lowest agent index. m(m+1)/2 minimizations in total.
template <PomdpModel M>
Decision<M> order_optimized_control(const M& model, const typename M::Belief& b,
                                    const Policy<M>& base, const RolloutConfig& cfg,
                                    const TerminalCost<M>& terminal, std::uint64_t seed,
                                    EvalCounter* counter = nullptr) {
  const int m = model.num_agents();
  cfg.validate(m);
  const auto q = make_q_evaluator(model, base, cfg, terminal, seed, counter);
  const JointControl<M> base_u = base.act(b);
  Decision<M> d{base_u, 0.0, {}};
  std::vector<char> placed(m, 0);
  for (int slot = 0; slot < m; ++slot) {
    int best_agent = -1;
    ComponentChoice<M> best;
    for (int a = 0; a < m; ++a) {
      if (placed[a]) continue;
      const ComponentChoice<M> c = minimize_component(model, b, a, d.control, base_u[a], q, counter);
      if (best_agent < 0 || c.q < best.q) {
        best_agent = a;
        best = c;
      }
    }
    placed[best_agent] = 1;
    d.control[best_agent] = best.component;
    d.q = best.q;
    d.order.push_back(best_agent);
  }
  return d;
}

namespace detail {

template <PomdpModel M>
QEvaluator<M> lookahead_evaluator(const M& model, const Policy<M>& base, const RolloutConfig& cfg,
                                  const TerminalCost<M>& terminal, std::uint64_t seed,
                                  int depth, EvalCounter* counter) {
  if (depth <= 1) return make_q_evaluator(model, base, cfg, terminal, seed, counter);
  return [&model, &base, cfg, terminal, seed, depth, counter](const typename M::Belief& b,
                                                               const JointControl<M>& u) {
    const double g = model.expected_stage_cost(b, u);
    const std::vector<int> order = cfg.order(model.num_agents());
    detail::Moments mom;
    for (int k = 0; k < cfg.obs_branch; ++k) {
      Rng rng = make_rng(derive_seed(seed, {key(Stream::kScenario),
                                            static_cast<std::uint64_t>(depth),
                                            static_cast<std::uint64_t>(k)}));
      typename M::State s = model.sample_state(b, rng);
      StepOutcome<M> out = model.step(s, u, rng);
      typename M::Belief next = b;
      model.advance_belief(next, u, out.observation);
      const std::uint64_t child_seed =
          derive_seed(seed, {static_cast<std::uint64_t>(depth), static_cast<std::uint64_t>(k)});
      const QEvaluator<M> inner =
          lookahead_evaluator(model, base, cfg, terminal, child_seed, depth - 1, counter);
      mom.add(one_at_a_time(model, next, base.act(next), order, inner, nullptr).q);
    }
    if (counter) counter->q_factor_evaluations.fetch_add(1, std::memory_order_relaxed);
    return QFactorEstimate<M>{u, g + model.discount() * mom.mean(),
                              model.discount() * std::sqrt(mom.variance() / mom.n), mom.n};
  };
}

}  // namespace detail

// l-step lookahead on a sampled scenario tree: obs_branch equally weighted
// observation samples per node, one-agent-at-a-time minimization at every
// node, truncated base rollout with terminal cost at the leaves. Intermediate
// agent-by-agent transitions carry no cost.
template <PomdpModel M>
Decision<M> multistep_lookahead_control(const M& model, const typename M::Belief& b,
                                        const Policy<M>& base, const RolloutConfig& cfg,
                                        const TerminalCost<M>& terminal, std::uint64_t seed,
                                        EvalCounter* counter = nullptr) {
  const int m = model.num_agents();
  cfg.validate(m);
  std::size_t per_node = 0;
  for (int l = 0; l < m; ++l) per_node += model.control_set(b, l).size();
  double leaves = 1.0;
  for (int level = 0; level < cfg.lookahead; ++level)
    leaves *= static_cast<double>(per_node) * (level + 1 < cfg.lookahead ? cfg.obs_branch : 1);
  if (leaves > static_cast<double>(cfg.tree_cap))
    throw CapExceeded("multistep lookahead: tree exceeds cap of " + std::to_string(cfg.tree_cap) +
                      " Q-factor leaves");
  const QEvaluator<M> q =
      detail::lookahead_evaluator(model, base, cfg, terminal, seed, cfg.lookahead, counter);
  return one_at_a_time(model, b, base.act(b), cfg.order(m), q, counter);
}

}  // namespace mapomdp::rollout
