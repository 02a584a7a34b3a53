#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mapomdp::rollout {

struct RolloutConfig {
  int lookahead = 1;     // l >= 1
  int truncation = 10;   // t >= 0 base-policy stages before the terminal cost
  int n_traj = 30;       // Monte Carlo trajectories per Q-factor (per branch)
  int obs_branch = 4;    // sampled observation branches per lookahead level, l > 1
  // Fixed agent order for one-agent-at-a-time; empty means 0..m-1.
  std::vector<int> agent_order;
  // Enumerate z exactly when at most this many outcomes exist.
  std::size_t obs_enum_cap = 4096;
  // Guard on prod_l |U_l| for standard rollout.
  std::size_t joint_cap = 1'000'000;
  // Guard on the number of Q-factor leaves of a multistep lookahead tree.
  std::size_t tree_cap = 1'000'000;

  void validate(int agents) const {
    if (lookahead < 1) throw std::invalid_argument("RolloutConfig: lookahead must be >= 1");
    if (truncation < 0) throw std::invalid_argument("RolloutConfig: truncation must be >= 0");
    if (n_traj < 1) throw std::invalid_argument("RolloutConfig: n_traj must be >= 1");
    if (obs_branch < 1) throw std::invalid_argument("RolloutConfig: obs_branch must be >= 1");
    if (!agent_order.empty()) {
      std::vector<char> seen(agents, 0);
      if (static_cast<int>(agent_order.size()) != agents)
        throw std::invalid_argument("RolloutConfig: agent_order must list every agent once");
      for (int a : agent_order) {
        if (a < 0 || a >= agents || seen[a])
          throw std::invalid_argument("RolloutConfig: agent_order is not a permutation");
        seen[a] = 1;
      }
    }
  }

  std::vector<int> order(int agents) const {
    if (!agent_order.empty()) return agent_order;
    std::vector<int> o(agents);
    for (int a = 0; a < agents; ++a) o[a] = a;
    return o;
  }
};

// Q-factor bookkeeping. Atomic so concurrent evaluators can share one.
struct EvalCounter {
  std::atomic<std::uint64_t> q_factor_evaluations{0};
  std::atomic<std::uint64_t> trajectories_simulated{0};
  std::atomic<std::uint64_t> minimizations{0};

  void reset() {
    q_factor_evaluations = 0;
    trajectories_simulated = 0;
    minimizations = 0;
  }
};

}  // namespace mapomdp::rollout
