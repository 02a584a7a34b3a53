#pragma once

#include <memory>
#include <vector>

#include "mapomdp/core/model.hpp"
#include "mapomdp/policy/shortest_paths.hpp"
#include "mapomdp/repair/model.hpp"

namespace mapomdp::policy {

// Fix the current location if it is damaged, otherwise step toward the
// nearest damaged location. A location is damaged when its expected
// per-stage cost d^v . c exceeds `damage_threshold`. Nearest-target and
// next-hop ties go to the lowest vertex index. With nothing damaged the agent
// fixes in place. Agents ignore each other.
class GreedyPolicy : public Policy<repair::RepairModel> {
 public:
  GreedyPolicy(const repair::RepairModel& model, double damage_threshold = 0.0);

  std::vector<repair::RepairAction> act(const repair::FactoredBelief& b) const override;
  repair::RepairAction component(const repair::FactoredBelief& b, int agent) const;

  const ShortestPathTable& paths() const { return *paths_; }

 private:
  repair::RepairAction choose(const std::vector<char>& damaged, int location) const;
  std::vector<char> damaged_mask(const repair::FactoredBelief& b) const;

  const repair::RepairModel& model_;
  std::shared_ptr<const ShortestPathTable> paths_;
  double threshold_;
};

repair::RepairAction greedy_control(const repair::RepairModel& model,
                                    const repair::FactoredBelief& b, int agent,
                                    const ShortestPathTable& paths, double threshold = 0.0);

}  // namespace mapomdp::policy
