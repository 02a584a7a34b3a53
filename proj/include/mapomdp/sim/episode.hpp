#pragma once

// Closed-loop simulation of repair episodes. The environment noise for stage
// tau is drawn from its own stream keyed by (episode seed, tau), so every
// controller faces the same escalation draws from the same initial state.

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "mapomdp/core/model.hpp"
#include "mapomdp/repair/model.hpp"
#include "mapomdp/rollout/config.hpp"
#include "mapomdp/rollout/rollout.hpp"

namespace mapomdp::sim {

using Joint = std::vector<repair::RepairAction>;

class Controller {
 public:
  virtual ~Controller() = default;
  virtual void reset(const repair::InitialCondition& initial, std::uint64_t episode_seed) {
    (void)initial;
    episode_seed_ = episode_seed;
  }
  // `global` is the exact shared belief; controllers with local beliefs only
  // read it when they synchronize.
  virtual Joint choose(const repair::FactoredBelief& global, int stage) = 0;
  virtual void observe(const Joint& u, const std::vector<int>& z,
                       const repair::FactoredBelief& global_next) {
    (void)u;
    (void)z;
    (void)global_next;
  }
  const rollout::EvalCounter& counter() const { return counter_; }

 protected:
  std::uint64_t decision_seed(int stage) const {
    return derive_seed(episode_seed_, {key(Stream::kRollout), static_cast<std::uint64_t>(stage)});
  }
  std::uint64_t cloud_seed(int stage) const {
    return derive_seed(episode_seed_, {key(Stream::kCloud), static_cast<std::uint64_t>(stage)});
  }

  rollout::EvalCounter counter_;
  std::uint64_t episode_seed_ = 0;
};

using ControllerFactory = std::function<std::unique_ptr<Controller>()>;

class PolicyController : public Controller {
 public:
  explicit PolicyController(std::shared_ptr<const Policy<repair::RepairModel>> policy)
      : policy_(std::move(policy)) {}
  Joint choose(const repair::FactoredBelief& global, int) override { return policy_->act(global); }

 private:
  std::shared_ptr<const Policy<repair::RepairModel>> policy_;
};

enum class RolloutKind { kOneAtATime, kStandard, kOrderOptimized, kMultistep };

class RolloutController : public Controller {
 public:
  RolloutController(const repair::RepairModel& model,
                    std::shared_ptr<const Policy<repair::RepairModel>> base,
                    rollout::RolloutConfig cfg, RolloutKind kind);
  Joint choose(const repair::FactoredBelief& global, int stage) override;

 private:
  const repair::RepairModel& model_;
  std::shared_ptr<const Policy<repair::RepairModel>> base_;
  rollout::RolloutConfig cfg_;
  RolloutKind kind_;
  TerminalCost<repair::RepairModel> terminal_;
};

struct EpisodeResult {
  double discounted_cost = 0.0;
  int stages = 0;
  std::uint64_t q_factor_evaluations = 0;
  double seconds = 0.0;
  // Share of agent-stages spent moving back to a vertex already visited
  // since that agent's last repair of a damaged vertex.
  double oscillation = 0.0;
  std::vector<Joint> controls;  // filled when requested
};

EpisodeResult run_episode(const repair::RepairModel& model, Controller& controller,
                          const repair::InitialCondition& initial, int horizon,
                          std::uint64_t episode_seed, bool record_controls = false);

// Initial condition i of a seeded suite.
repair::InitialCondition initial_condition(const repair::RepairModel& model,
                                           const repair::InitialDamage& init,
                                           std::uint64_t root_seed, std::size_t index);

std::uint64_t episode_seed(std::uint64_t root_seed, std::size_t index);

// Mean discounted cost of `factory`'s controllers over the first `count`
// initial conditions of the suite.
std::vector<double> evaluate_suite(const repair::RepairModel& model,
                                   const ControllerFactory& factory,
                                   const repair::InitialDamage& init, std::size_t count,
                                   int horizon, std::uint64_t root_seed, unsigned workers);

}  // namespace mapomdp::sim
