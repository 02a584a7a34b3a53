#include "mapomdp/sim/episode.hpp"

#include <chrono>
#include <set>

#include "mapomdp/core/parallel.hpp"

namespace mapomdp::sim {

RolloutController::RolloutController(const repair::RepairModel& model,
                                     std::shared_ptr<const Policy<repair::RepairModel>> base,
                                     rollout::RolloutConfig cfg, RolloutKind kind)
    : model_(model), base_(std::move(base)), cfg_(std::move(cfg)), kind_(kind) {
  cfg_.validate(model.num_agents());
  terminal_ = [&model](const repair::FactoredBelief& b) { return model.terminal_cost(b); };
}

Joint RolloutController::choose(const repair::FactoredBelief& b, int stage) {
  const std::uint64_t seed = decision_seed(stage);
  switch (kind_) {
    case RolloutKind::kStandard:
      return rollout::standard_rollout_control(model_, b, *base_, cfg_, terminal_, seed, &counter_).control;
    case RolloutKind::kOrderOptimized:
      return rollout::order_optimized_control(model_, b, *base_, cfg_, terminal_, seed, &counter_).control;
    case RolloutKind::kMultistep:
      return rollout::multistep_lookahead_control(model_, b, *base_, cfg_, terminal_, seed, &counter_)
          .control;
    case RolloutKind::kOneAtATime:
      break;
  }
  return rollout::one_at_a_time_control(model_, b, *base_, cfg_, terminal_, seed, &counter_).control;
}

std::uint64_t episode_seed(std::uint64_t root_seed, std::size_t index) {
  return derive_seed(root_seed, {key(Stream::kEvaluation), index});
}

repair::InitialCondition initial_condition(const repair::RepairModel& model,
                                           const repair::InitialDamage& init,
                                           std::uint64_t root_seed, std::size_t index) {
  Rng rng = make_rng(derive_seed(root_seed, {key(Stream::kInitialState), index}));
  return model.random_initial_state(init, rng);
}

EpisodeResult run_episode(const repair::RepairModel& model, Controller& controller,
                          const repair::InitialCondition& initial, int horizon,
                          std::uint64_t seed, bool record_controls) {
  using Clock = std::chrono::steady_clock;
  controller.reset(initial, seed);
  const std::uint64_t q_before = controller.counter().q_factor_evaluations;
  const auto start = Clock::now();

  EpisodeResult out;
  repair::HiddenRepairState state = initial.state;
  repair::FactoredBelief belief = initial.belief;
  std::vector<std::set<int>> visited(model.num_agents());
  for (int l = 0; l < model.num_agents(); ++l) visited[l].insert(state.agent_locations[l]);
  std::uint64_t revisits = 0;
  double scale = 1.0;
  for (int tau = 0; tau < horizon; ++tau) {
    Joint u = controller.choose(belief, tau);
    for (int l = 0; l < model.num_agents(); ++l) {
      const int at = state.agent_locations[l];
      if (u[l].is_fix()) {
        if (state.levels[at] > 0) visited[l] = {at};
      } else if (!visited[l].insert(u[l].target()).second) {
        ++revisits;
      }
    }
    Rng env = make_rng(derive_seed(seed, {key(Stream::kEnvironment), static_cast<std::uint64_t>(tau)}));
    auto step = model.step(state, u, env);
    out.discounted_cost += scale * step.cost;
    scale *= model.discount();
    model.advance_belief(belief, u, step.observation);
    controller.observe(u, step.observation, belief);
    state = std::move(step.next);
    if (record_controls) out.controls.push_back(std::move(u));
  }
  out.stages = horizon;
  out.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  out.q_factor_evaluations = controller.counter().q_factor_evaluations - q_before;
  if (horizon > 0)
    out.oscillation = static_cast<double>(revisits) / (static_cast<double>(horizon) * model.num_agents());
  return out;
}

std::vector<double> evaluate_suite(const repair::RepairModel& model,
                                   const ControllerFactory& factory,
                                   const repair::InitialDamage& init, std::size_t count,
                                   int horizon, std::uint64_t root_seed, unsigned workers) {
  std::vector<double> costs(count);
  parallel_for(count, workers, [&](std::size_t i) {
    auto controller = factory();
    costs[i] = run_episode(model, *controller, initial_condition(model, init, root_seed, i), horizon,
                           episode_seed(root_seed, i))
                   .discounted_cost;
  });
  return costs;
}

}  // namespace mapomdp::sim
