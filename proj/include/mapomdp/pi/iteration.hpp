#pragma once

// Approximate policy iteration: one-agent-at-a-time rollout labels beliefs
// from a memory buffer, a classifier is fit to the labels, and the fitted
// classifier becomes the next base policy.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "mapomdp/core/evaluate.hpp"
#include "mapomdp/pi/classifier.hpp"
#include "mapomdp/pi/policy.hpp"
#include "mapomdp/repair/model.hpp"
#include "mapomdp/rollout/config.hpp"

namespace mapomdp::pi {

using RepairPolicy = Policy<repair::RepairModel>;
using RepairPolicyPtr = std::shared_ptr<const RepairPolicy>;

struct BufferConfig {
  std::size_t size = 2000;
  int walk_length = 5;          // each walk takes 0..walk_length steps
  double policy_share = 0.5;    // remaining walks are epsilon-random
  double epsilon = 0.3;
  // Share of walks that start from a randomized history instead of a bare
  // initial state: each vertex is inspected with a per-walk probability drawn
  // uniformly from [0, 1), and an inspected damaged vertex is repaired with
  // probability 1/2.
  double history_share = 0.5;
  repair::InitialDamage init;
};

class MemoryBuffer {
 public:
  MemoryBuffer() = default;
  explicit MemoryBuffer(std::vector<repair::FactoredBelief> beliefs) : beliefs_(std::move(beliefs)) {}

  // Walks from seeded initial states, some with a randomized history. A policy walk follows one of
  // `previous`, chosen uniformly; an epsilon-random walk follows the last
  // entry of `previous` but replaces each component by a uniformly random
  // feasible one with probability epsilon.
  static MemoryBuffer build(const repair::RepairModel& model, std::span<const RepairPolicyPtr> previous,
                            const BufferConfig& cfg, std::uint64_t seed);

  std::size_t size() const { return beliefs_.size(); }
  bool empty() const { return beliefs_.empty(); }
  const repair::FactoredBelief& operator[](std::size_t i) const { return beliefs_[i]; }
  void add(repair::FactoredBelief b) { beliefs_.push_back(std::move(b)); }

 private:
  std::vector<repair::FactoredBelief> beliefs_;
};

// Seed of the rollout decision behind sample s.
std::uint64_t sample_seed(std::uint64_t seed, std::size_t s);

// Draws q beliefs from the buffer and labels every agent slot with the
// one-agent-at-a-time rollout component: exactly q*m rows.
Dataset generate_samples(const repair::RepairModel& model, const RepairPolicy& base,
                         const rollout::RolloutConfig& cfg, std::size_t q, const MemoryBuffer& buffer,
                         std::uint64_t seed, unsigned workers = 1, rollout::EvalCounter* counter = nullptr);

struct PiConfig {
  int iterations = 3;
  std::size_t beliefs_per_iteration = 1000;  // q
  // q of iteration k is beliefs_schedule[k-1] when given.
  std::vector<std::size_t> beliefs_schedule;
  rollout::RolloutConfig rollout;
  std::vector<int> hidden{256, 64};
  TrainConfig train;
  BufferConfig buffer;
  std::size_t eval_states = 100;
  int eval_horizon = 200;
  unsigned workers = 1;
};

struct PiIteration {
  std::shared_ptr<const PolicyClassifier> classifier;
  RepairPolicyPtr policy;
  TrainReport report;
  std::size_t samples = 0;
};

struct PiResult {
  std::vector<PiIteration> iterations;
  std::vector<RepairPolicyPtr> policies;  // policies[0] is the initial base
  std::vector<double> cost_trace;         // mean suite cost of each policy
};

using PiProgress = std::function<void(int iteration, const PiResult&)>;

PiResult pi_iterate(const repair::RepairModel& model, RepairPolicyPtr initial_base, const PiConfig& cfg,
                    std::uint64_t seed, const PiProgress& progress = {});

// Mean discounted cost of `policy` on the fixed evaluation suite of `seed`.
double suite_cost(const repair::RepairModel& model, RepairPolicyPtr policy, const repair::InitialDamage& init,
                  std::size_t states, int horizon, std::uint64_t seed, unsigned workers);

}  // namespace mapomdp::pi
