#include "mapomdp/pi/iteration.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "mapomdp/core/parallel.hpp"
#include "mapomdp/pi/features.hpp"
#include "mapomdp/rollout/rollout.hpp"
#include "mapomdp/sim/episode.hpp"

namespace mapomdp::pi {

MemoryBuffer MemoryBuffer::build(const repair::RepairModel& model, std::span<const RepairPolicyPtr> previous,
                                 const BufferConfig& cfg, std::uint64_t seed) {
  if (previous.empty()) throw std::invalid_argument("MemoryBuffer: needs at least one policy");
  std::vector<repair::FactoredBelief> beliefs;
  beliefs.reserve(cfg.size);
  for (std::size_t i = 0; i < cfg.size; ++i) {
    Rng rng = make_rng(derive_seed(seed, {key(Stream::kBuffer), i}));
    auto [state, belief] = model.random_initial_state(cfg.init, rng);
    if (uniform01(rng) < cfg.history_share) {
      const double inspected = uniform01(rng);
      for (int v = 0; v < model.num_vertices(); ++v) {
        if (uniform01(rng) >= inspected) continue;
        if (uniform01(rng) < 0.5) state.levels[v] = 0;
        auto dv = belief.d(v);
        std::fill(dv.begin(), dv.end(), 0.0);
        dv[state.levels[v]] = 1.0;
      }
    }
    const int steps = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(cfg.walk_length) + 1));
    const bool policy_walk = uniform01(rng) < cfg.policy_share;
    const RepairPolicy& walker = policy_walk ? *previous[uniform_index(rng, previous.size())] : *previous.back();
    for (int k = 0; k < steps; ++k) {
      auto u = walker.act(belief);
      if (!policy_walk)
        for (int l = 0; l < model.num_agents(); ++l)
          if (uniform01(rng) < cfg.epsilon) {
            const auto set = model.control_set(belief, l);
            u[l] = set[uniform_index(rng, set.size())];
          }
      auto out = model.step(state, u, rng);
      model.advance_belief(belief, u, out.observation);
      state = std::move(out.next);
    }
    beliefs.push_back(std::move(belief));
  }
  return MemoryBuffer(std::move(beliefs));
}

std::uint64_t sample_seed(std::uint64_t seed, std::size_t s) {
  return derive_seed(seed, {key(Stream::kSampleGen), s});
}

Dataset generate_samples(const repair::RepairModel& model, const RepairPolicy& base,
                         const rollout::RolloutConfig& cfg, std::size_t q, const MemoryBuffer& buffer,
                         std::uint64_t seed, unsigned workers, rollout::EvalCounter* counter) {
  if (buffer.empty()) throw std::invalid_argument("generate_samples: empty memory buffer");
  if (q == 0) throw std::invalid_argument("generate_samples: q must be >= 1");
  const int m = model.num_agents();
  const std::vector<int> order = cfg.order(m);
  const std::size_t dim = feature_dim(model);
  const TerminalCost<repair::RepairModel> terminal = [&model](const repair::FactoredBelief& b) {
    return model.terminal_cost(b);
  };

  std::vector<Dataset> parts(q, Dataset(dim));
  parallel_for(q, workers, [&](std::size_t s) {
    Rng rng = make_rng(derive_seed(seed, {key(Stream::kPolicy), s}));
    const repair::FactoredBelief& b = buffer[uniform_index(rng, buffer.size())];
    const auto decision = rollout::one_at_a_time_control(model, b, base, cfg, terminal, sample_seed(seed, s), counter);
    const auto base_u = base.act(b);
    std::vector<repair::RepairAction> u = base_u;
    std::vector<double> x(dim);
    for (int agent : order) {
      encode_features(model, b, agent, u, order, x);
      parts[s].add(x, decision.control[agent].class_index());
      u[agent] = decision.control[agent];
    }
  });
  Dataset out(dim);
  out.features.reserve(q * m * dim);
  for (const auto& p : parts) out.append(p);
  return out;
}

double suite_cost(const repair::RepairModel& model, RepairPolicyPtr policy, const repair::InitialDamage& init,
                  std::size_t states, int horizon, std::uint64_t seed, unsigned workers) {
  const auto costs = sim::evaluate_suite(
      model, [&] { return std::make_unique<sim::PolicyController>(policy); }, init, states, horizon, seed, workers);
  return std::accumulate(costs.begin(), costs.end(), 0.0) / static_cast<double>(costs.size());
}

PiResult pi_iterate(const repair::RepairModel& model, RepairPolicyPtr initial_base, const PiConfig& cfg,
                    std::uint64_t seed, const PiProgress& progress) {
  if (cfg.iterations < 1) throw std::invalid_argument("pi_iterate: iterations must be >= 1");
  if (!initial_base) throw std::invalid_argument("pi_iterate: missing base policy");
  const std::uint64_t eval_seed = derive_seed(seed, {key(Stream::kEvaluation)});
  PiResult result;
  result.policies.push_back(initial_base);
  result.cost_trace.push_back(
      suite_cost(model, initial_base, cfg.buffer.init, cfg.eval_states, cfg.eval_horizon, eval_seed, cfg.workers));
  if (progress) progress(0, result);

  for (int k = 1; k <= cfg.iterations; ++k) {
    const std::uint64_t iter_seed = derive_seed(seed, {static_cast<std::uint64_t>(k)});
    const RepairPolicyPtr base = result.policies.back();
    const MemoryBuffer buffer = MemoryBuffer::build(model, result.policies, cfg.buffer, iter_seed);
    const std::size_t q = static_cast<std::size_t>(k) <= cfg.beliefs_schedule.size()
                              ? cfg.beliefs_schedule[k - 1]
                              : cfg.beliefs_per_iteration;
    const Dataset data = generate_samples(model, *base, cfg.rollout, q, buffer, iter_seed, cfg.workers);

    auto classifier = std::make_shared<PolicyClassifier>(
        ClassifierShape{static_cast<int>(feature_dim(model)), cfg.hidden, model.num_vertices() + 1},
        derive_seed(iter_seed, {key(Stream::kTraining)}));
    PiIteration it;
    it.report = classifier->train(data, cfg.train, iter_seed);
    it.samples = data.size();
    it.classifier = classifier;
    it.policy = std::make_shared<ClassifierPolicy>(model, classifier, base, cfg.rollout.order(model.num_agents()));
    result.policies.push_back(it.policy);
    result.iterations.push_back(std::move(it));
    result.cost_trace.push_back(suite_cost(model, result.policies.back(), cfg.buffer.init, cfg.eval_states,
                                           cfg.eval_horizon, eval_seed, cfg.workers));
    if (progress) progress(k, result);
  }
  return result;
}

}  // namespace mapomdp::pi
