#pragma once

// Policy evaluation on any PomdpModel: the composite simulator (hidden state
// drawn from the belief, simulated forward while the belief is tracked) and
// exact finite-horizon expansion over observation sequences.

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mapomdp/core/error.hpp"
#include "mapomdp/core/model.hpp"
#include "mapomdp/core/rng.hpp"

namespace mapomdp {

template <PomdpModel M>
struct TrajectoryStage {
  typename M::State state;
  JointControl<M> control;
  typename M::Observation observation;
  double cost = 0.0;
};

template <PomdpModel M>
struct TrajectoryResult {
  double discounted_cost = 0.0;
  std::vector<TrajectoryStage<M>> stages;
};

template <PomdpModel M>
using TerminalCost = std::function<double(const typename M::Belief&)>;

template <PomdpModel M>
TrajectoryResult<M> simulate_trajectory(const M& model, const Policy<M>& policy,
                                        typename M::Belief belief, int horizon,
                                        std::uint64_t seed) {
  Rng rng = make_rng(seed);
  TrajectoryResult<M> out;
  typename M::State state = model.sample_state(belief, rng);
  double scale = 1.0;
  for (int tau = 0; tau < horizon; ++tau) {
    JointControl<M> u = policy.act(belief);
    StepOutcome<M> next = model.step(state, u, rng);
    out.discounted_cost += scale * next.cost;
    model.advance_belief(belief, u, next.observation);
    out.stages.push_back({state, std::move(u), next.observation, next.cost});
    state = std::move(next.next);
    scale *= model.discount();
  }
  return out;
}

inline constexpr std::uint64_t kDefaultBranchCap = 10'000'000;

namespace detail {

template <PomdpModel M>
double exact_cost(const M& model, const Policy<M>& policy, const typename M::Belief& b,
                  int remaining, const TerminalCost<M>& terminal, std::uint64_t cap,
                  std::uint64_t& branches) {
  if (remaining == 0) return terminal ? terminal(b) : 0.0;
  if (++branches > cap)
    throw CapExceeded("policy_cost_exact: observation tree exceeds branch cap of " +
                      std::to_string(cap));
  const JointControl<M> u = policy.act(b);
  double value = model.expected_stage_cost(b, u);
  const auto dist = model.observation_distribution(b, u, static_cast<std::size_t>(cap));
  if (!dist) throw CapExceeded("policy_cost_exact: observation set exceeds branch cap");
  double cont = 0.0;
  for (const auto& [z, pz] : *dist) {
    typename M::Belief next = b;
    model.advance_belief(next, u, z);
    cont += pz * exact_cost(model, policy, next, remaining - 1, terminal, cap, branches);
  }
  return value + model.discount() * cont;
}

}  // namespace detail

// Exact expected discounted cost of `policy` over `horizon` stages, plus the
// discounted terminal cost at the leaves when one is given. Refuses with
// CapExceeded instead of truncating.
template <PomdpModel M>
double policy_cost_exact(const M& model, const Policy<M>& policy,
                         const typename M::Belief& b0, int horizon,
                         const TerminalCost<M>& terminal = {},
                         std::uint64_t branch_cap = kDefaultBranchCap) {
  std::uint64_t branches = 0;
  return detail::exact_cost(model, policy, b0, horizon, terminal, branch_cap, branches);
}

// alpha^H * g_max / (1 - alpha): bound on the cost beyond a horizon of H.
inline double tail_bound(double discount, int horizon, double max_stage_cost) {
  return std::pow(discount, horizon) * max_stage_cost / (1.0 - discount);
}

}  // namespace mapomdp
