#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mapomdp/core/model.hpp"
#include "mapomdp/core/rng.hpp"
#include "mapomdp/repair/chain.hpp"
#include "mapomdp/repair/graph.hpp"

namespace mapomdp::repair {

// One agent's control component. Class index 0 is Fix; 1 + v is Move(v).
// The same indexing is used for the classifier's |V|+1 outputs.
class RepairAction {
 public:
  constexpr RepairAction() = default;
  static constexpr RepairAction fix() { return RepairAction(0); }
  static constexpr RepairAction move(int target) { return RepairAction(target + 1); }
  static constexpr RepairAction from_class(int index) { return RepairAction(index); }

  constexpr bool is_fix() const { return code_ == 0; }
  constexpr int target() const { return code_ - 1; }
  constexpr int class_index() const { return code_; }

  constexpr auto operator<=>(const RepairAction&) const = default;

 private:
  constexpr explicit RepairAction(int code) : code_(code) {}
  int code_ = 0;
};

struct FactoredBelief {
  std::vector<int> agent_locations;
  // |V| x nu row-major; row v is d^v.
  std::vector<double> damage;
  int levels = 0;

  std::span<const double> d(int v) const {
    return std::span(damage).subspan(static_cast<std::size_t>(v) * levels, levels);
  }
  std::span<double> d(int v) {
    return std::span(damage).subspan(static_cast<std::size_t>(v) * levels, levels);
  }
  int num_vertices() const { return levels ? static_cast<int>(damage.size()) / levels : 0; }

  bool operator==(const FactoredBelief&) const = default;
};

struct HiddenRepairState {
  std::vector<int> agent_locations;
  std::vector<int> levels;

  bool operator==(const HiddenRepairState&) const = default;
};

struct InitialDamage {
  // Each location is damaged independently with this probability, at a
  // level drawn uniformly from 1..nu-1.
  double p_damaged = 0.3;
};

struct InitialCondition {
  HiddenRepairState state;
  FactoredBelief belief;
};

// The multi-robot repair POMDP. Observations are the true damage levels at
// each agent's post-move location, one entry per agent.
class RepairModel {
 public:
  using Belief = FactoredBelief;
  using State = HiddenRepairState;
  using Control = RepairAction;
  using Observation = std::vector<int>;

  static constexpr std::size_t kDefaultObsEnumCap = 4096;

  RepairModel(RepairGraph graph, DamageChain chain, int agents, double discount);

  const RepairGraph& graph() const { return graph_; }
  const DamageChain& chain() const { return chain_; }
  int num_agents() const { return agents_; }
  int num_vertices() const { return graph_.num_vertices(); }
  int levels() const { return chain_.levels(); }
  double discount() const { return discount_; }

  std::vector<RepairAction> control_set(const FactoredBelief& b, int agent) const;
  std::vector<RepairAction> control_set_at(int location) const;
  bool feasible(int location, RepairAction a) const;

  // C = sum_v d^v . c
  double stage_cost(const FactoredBelief& b) const;
  // stage_cost / (1 - alpha)
  double terminal_cost(const FactoredBelief& b) const;
  double terminal_cost(const FactoredBelief& b, double alpha) const;
  // Cost after the fixes in u are applied, before escalation.
  double expected_stage_cost(const FactoredBelief& b, const std::vector<RepairAction>& u) const;
  double max_stage_cost() const { return num_vertices() * chain_.max_cost(); }

  // env_step: fixes, realized cost, escalation, observation at new locations.
  StepOutcome<RepairModel> step(const HiddenRepairState& s, const std::vector<RepairAction>& u,
                                Rng& rng) const;
  // step in place: advances `s`, writes the observation into `z` and returns
  // the realized cost.
  double advance_state(HiddenRepairState& s, const std::vector<RepairAction>& u, Rng& rng,
                       Observation& z) const;

  // belief_step: fixes, moves, chain step everywhere, collapse at agent
  // locations. Throws ImpossibleObservation on zero prior mass.
  void advance_belief(FactoredBelief& b, const std::vector<RepairAction>& u,
                      const Observation& z) const;
  FactoredBelief belief_step(FactoredBelief b, const std::vector<RepairAction>& u,
                             const Observation& z) const;
  // Like advance_belief, but only the agents flagged in `observed` contribute
  // their observation. With `lenient`, a zero-prior observation collapses the
  // distribution instead of throwing.
  void advance_belief_partial(FactoredBelief& b, const std::vector<RepairAction>& u,
                              const Observation& z, std::span<const char> observed,
                              bool lenient) const;

  std::optional<ObservationDistribution<RepairModel>> observation_distribution(
      const FactoredBelief& b, const std::vector<RepairAction>& u, std::size_t cap) const;

  HiddenRepairState sample_state(const FactoredBelief& b, Rng& rng) const;
  InitialCondition random_initial_state(const InitialDamage& init, Rng& rng) const;

  // Belief that is the point mass on a known hidden state.
  FactoredBelief point_belief(const HiddenRepairState& s) const;

  // Throws std::invalid_argument when b violates a FactoredBelief invariant.
  // With `require_collapsed`, d^v at every agent location must be a point mass.
  void validate(const FactoredBelief& b, bool require_collapsed = true) const;

 private:
  void check_controls(const std::vector<int>& locations, const std::vector<RepairAction>& u) const;
  void apply_controls(FactoredBelief& b, const std::vector<RepairAction>& u) const;

  RepairGraph graph_;
  DamageChain chain_;
  int agents_;
  double discount_;
  std::vector<double> tiled_cost_;
};

static_assert(PomdpModel<RepairModel>);

}  // namespace mapomdp::repair
