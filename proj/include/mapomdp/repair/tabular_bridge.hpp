#pragma once

// Exact flattening of small repair instances into a TabularPOMDP, used as a
// brute-force oracle for the factored belief code.

#include <cstddef>
#include <memory>
#include <vector>

#include "mapomdp/core/tabular.hpp"
#include "mapomdp/repair/model.hpp"

namespace mapomdp::repair {

inline constexpr std::size_t kDefaultTabularCap = 100'000;

// |V|^m * nu^|V|, or 0 on overflow.
std::size_t flattened_state_count(int vertices, int levels, int agents);

// Hidden states enumerate (agent locations, damage levels); per-agent
// controls are the |V|+1 class indices. A move to a non-adjacent vertex is a
// no-op in the flattened model (neither fix nor move); such controls are never
// feasible in the factored model.
TabularPOMDP to_tabular(const RepairModel& model, std::size_t cap = kDefaultTabularCap);

std::size_t state_index(const RepairModel& model, const HiddenRepairState& s);
HiddenRepairState state_from_index(const RepairModel& model, std::size_t index);
int observation_index(const RepairModel& model, const std::vector<int>& z);
std::vector<int> control_indices(const std::vector<RepairAction>& u);

BeliefVector flatten_belief(const RepairModel& model, const FactoredBelief& b);
// Per-vertex marginals. Throws if agent locations are not known with certainty.
FactoredBelief unflatten_belief(const RepairModel& model, const BeliefVector& b);

// Runs a factored-belief policy on the flattened model.
class FlattenedPolicy : public Policy<TabularPOMDP> {
 public:
  FlattenedPolicy(const RepairModel& model, std::shared_ptr<const Policy<RepairModel>> inner)
      : model_(model), inner_(std::move(inner)) {}
  std::vector<int> act(const BeliefVector& b) const override;

 private:
  const RepairModel& model_;
  std::shared_ptr<const Policy<RepairModel>> inner_;
};

}  // namespace mapomdp::repair
