#pragma once

// Contracts shared by every POMDP backend (tabular, repair) and by the
// planners that run on top of them.

#include <concepts>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "mapomdp/core/rng.hpp"

namespace mapomdp {

template <class M>
using JointControl = std::vector<typename M::Control>;

template <class M>
struct StepOutcome {
  typename M::State next;
  typename M::Observation observation;
  double cost = 0.0;
};

template <class M>
using ObservationDistribution =
    std::vector<std::pair<typename M::Observation, double>>;

// A model is immutable after construction. All methods are const and safe to
// call concurrently.
template <class M>
concept PomdpModel = requires(const M& m, typename M::Belief& mutable_belief,
                              const typename M::Belief& b, const typename M::State& s,
                              const JointControl<M>& u,
                              const typename M::Observation& z, Rng& rng,
                              std::size_t cap) {
  typename M::Control;
  requires std::equality_comparable<typename M::Control>;
  requires std::equality_comparable<typename M::Observation>;
  { m.num_agents() } -> std::convertible_to<int>;
  { m.discount() } -> std::convertible_to<double>;
  { m.control_set(b, 0) } -> std::same_as<std::vector<typename M::Control>>;
  { m.expected_stage_cost(b, u) } -> std::convertible_to<double>;
  // F(b,u,z) in place. Throws ImpossibleObservation on a zero-likelihood z.
  { m.advance_belief(mutable_belief, u, z) };
  // Full p(z|b,u) when it has at most `cap` support points.
  { m.observation_distribution(b, u, cap) }
      -> std::same_as<std::optional<ObservationDistribution<M>>>;
  { m.sample_state(b, rng) } -> std::same_as<typename M::State>;
  { m.step(s, u, rng) } -> std::same_as<StepOutcome<M>>;
};

template <PomdpModel M>
typename M::Belief belief_update(const M& model, typename M::Belief b,
                                 const JointControl<M>& u,
                                 const typename M::Observation& z) {
  model.advance_belief(b, u, z);
  return b;
}

// Maps a belief to a joint control. Implementations are immutable and
// shareable across threads.
template <PomdpModel M>
class Policy {
 public:
  virtual ~Policy() = default;
  virtual JointControl<M> act(const typename M::Belief& b) const = 0;
};

template <PomdpModel M>
bool is_feasible(const M& model, const typename M::Belief& b, const JointControl<M>& u) {
  if (static_cast<int>(u.size()) != model.num_agents()) return false;
  for (int l = 0; l < model.num_agents(); ++l) {
    const auto set = model.control_set(b, l);
    bool found = false;
    for (const auto& c : set) found = found || c == u[l];
    if (!found) return false;
  }
  return true;
}

}  // namespace mapomdp
