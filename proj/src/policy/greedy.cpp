#include "mapomdp/policy/greedy.hpp"

#include <limits>

namespace mapomdp::policy {

using repair::FactoredBelief;
using repair::RepairAction;

namespace {

void fill_mask(const repair::RepairModel& model, const FactoredBelief& b, double threshold,
               std::vector<char>& damaged) {
  const auto& c = model.chain().cost();
  const int nu = model.levels();
  damaged.resize(model.num_vertices());
  const double* d = b.damage.data();
  for (int v = 0; v < model.num_vertices(); ++v, d += nu) {
    double expected = 0.0;
    for (int k = 1; k < nu; ++k) expected += d[k] * c[k];
    damaged[v] = expected > threshold;
  }
}

std::vector<char> compute_mask(const repair::RepairModel& model, const FactoredBelief& b,
                               double threshold) {
  std::vector<char> damaged;
  fill_mask(model, b, threshold, damaged);
  return damaged;
}

RepairAction pick(const ShortestPathTable& paths, const std::vector<char>& damaged, int location) {
  if (damaged[location]) return RepairAction::fix();
  int best = -1;
  int best_dist = std::numeric_limits<int>::max();
  for (int v = 0; v < static_cast<int>(damaged.size()); ++v) {
    if (!damaged[v]) continue;
    const int d = paths.dist(location, v);
    if (d < best_dist) {
      best_dist = d;
      best = v;
    }
  }
  if (best < 0) return RepairAction::fix();
  return RepairAction::move(paths.next_hop(location, best));
}

}  // namespace

GreedyPolicy::GreedyPolicy(const repair::RepairModel& model, double damage_threshold)
    : model_(model),
      paths_(std::make_shared<ShortestPathTable>(model.graph())),
      threshold_(damage_threshold) {}

std::vector<char> GreedyPolicy::damaged_mask(const FactoredBelief& b) const {
  return compute_mask(model_, b, threshold_);
}

RepairAction GreedyPolicy::choose(const std::vector<char>& damaged, int location) const {
  return pick(*paths_, damaged, location);
}

std::vector<RepairAction> GreedyPolicy::act(const FactoredBelief& b) const {
  thread_local std::vector<char> damaged;
  fill_mask(model_, b, threshold_, damaged);
  std::vector<RepairAction> u(model_.num_agents());
  for (int l = 0; l < model_.num_agents(); ++l) u[l] = choose(damaged, b.agent_locations[l]);
  return u;
}

RepairAction GreedyPolicy::component(const FactoredBelief& b, int agent) const {
  return choose(damaged_mask(b), b.agent_locations.at(agent));
}

RepairAction greedy_control(const repair::RepairModel& model, const FactoredBelief& b, int agent,
                            const ShortestPathTable& paths, double threshold) {
  return pick(paths, compute_mask(model, b, threshold), b.agent_locations.at(agent));
}

}  // namespace mapomdp::policy
