#pragma once

// Control selection under imperfect communication. Every variant evaluates
// its Q-factors with the decision seed it is given, so two variants that
// end up minimizing the same Q-factors return the same controls.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mapomdp/core/evaluate.hpp"
#include "mapomdp/pi/classifier.hpp"
#include "mapomdp/pi/policy.hpp"
#include "mapomdp/policy/shortest_paths.hpp"
#include "mapomdp/repair/model.hpp"
#include "mapomdp/rollout/config.hpp"
#include "mapomdp/sim/episode.hpp"

namespace mapomdp::comms {

using repair::FactoredBelief;
using repair::RepairModel;
using Joint = std::vector<repair::RepairAction>;
using RepairPolicy = Policy<RepairModel>;
using RepairPolicyPtr = std::shared_ptr<const RepairPolicy>;
using Terminal = TerminalCost<RepairModel>;

enum class Variant { kPerfectShared, kB, kN, kPI, kLC, kILC, kIB1, kIB0 };

struct Architecture {
  Variant variant = Variant::kPerfectShared;
  int radius = 0;    // LC, ILC
  double rho = 1.0;  // ILC, IB1, IB0

  void validate() const;
  std::string name() const;
  // "shared", "amr-b", "amr-n", "amr-pi", "amr-lc", "amr-ilc", "amr-ib1", "amr-ib0"
  static Architecture parse(const std::string& tag, int radius = 0, double rho = 1.0);
};

// One stage-global Bernoulli(rho) draw.
bool cloud_available(double rho, std::uint64_t cloud_seed);

// Every agent minimizes its own component with all others at base.
Joint amr_b_control(const RepairModel& model, const FactoredBelief& b, const RepairPolicy& base,
                    const rollout::RolloutConfig& cfg, const Terminal& terminal, std::uint64_t seed,
                    rollout::EvalCounter* counter = nullptr);

// Agent at position p in the order sees signals[k] for its predecessors and
// base components for everyone else.
Joint signaled_control(const RepairModel& model, const FactoredBelief& b, const RepairPolicy& base,
                       const Joint& signals, const rollout::RolloutConfig& cfg, const Terminal& terminal,
                       std::uint64_t seed, rollout::EvalCounter* counter = nullptr);

// Predecessor signals from classifier inference (successors at base).
Joint amr_n_control(const RepairModel& model, const FactoredBelief& b, const RepairPolicy& base,
                    const pi::PolicyClassifier* classifier, const rollout::RolloutConfig& cfg,
                    const Terminal& terminal, std::uint64_t seed, rollout::EvalCounter* counter = nullptr);

// `policies[0]` is the initial base and policies[k] the k-th classifier
// policy. Signals come from policies[k], the base is policies[k-1].
Joint amr_pi_control(const RepairModel& model, const FactoredBelief& b, std::span<const RepairPolicyPtr> policies,
                     int k, const rollout::RolloutConfig& cfg, const Terminal& terminal, std::uint64_t seed,
                     rollout::EvalCounter* counter = nullptr);

// Agents k and l communicate when r > 0 and their hop distance is at most r.
bool in_range(const policy::ShortestPathTable& paths, int from, int to, int radius);

// Sequential minimization in which a predecessor's computed component is
// visible only within the radius; otherwise the base component stands in.
Joint amr_lc_control(const RepairModel& model, const FactoredBelief& b, const RepairPolicy& base,
                     const policy::ShortestPathTable& paths, int radius, const rollout::RolloutConfig& cfg,
                     const Terminal& terminal, std::uint64_t seed, rollout::EvalCounter* counter = nullptr);

// One-agent-at-a-time when the cloud is reachable, AMR-LC otherwise.
Joint amr_ilc_control(const RepairModel& model, const FactoredBelief& b, const RepairPolicy& base,
                      const policy::ShortestPathTable& paths, double rho, int radius,
                      const rollout::RolloutConfig& cfg, const Terminal& terminal, std::uint64_t seed,
                      std::uint64_t cloud_seed, rollout::EvalCounter* counter = nullptr, bool* cloud_hit = nullptr);

// Per-agent local beliefs for the belief-sharing variants.
struct LocalBeliefBank {
  std::vector<FactoredBelief> local;
  // Controls each agent assumes were played at the last stage.
  std::vector<Joint> assumed;

  void sync(const FactoredBelief& global);
  // Each agent applies its own assumed joint control (with its own executed
  // component) and only its own observation.
  void advance(const RepairModel& model, const Joint& executed, const std::vector<int>& z);
  // Distributions valid everywhere, point mass at each agent's own location.
  void validate(const RepairModel& model) const;
};

struct IbStep {
  Joint executed;
  bool cloud = false;
};

// Chooses the executed joint control for one stage and records the assumed
// controls in the bank; call bank.advance once the observation is known.
IbStep amr_ib_choose(const RepairModel& model, LocalBeliefBank& bank, const FactoredBelief& global,
                     Variant variant, const RepairPolicy& base, const rollout::RolloutConfig& cfg, double rho,
                     const Terminal& terminal, std::uint64_t seed, std::uint64_t cloud_seed,
                     rollout::EvalCounter* counter = nullptr);

struct Resources {
  RepairPolicyPtr base;
  std::shared_ptr<const pi::PolicyClassifier> classifier;  // AMR-N
  std::vector<RepairPolicyPtr> pi_policies;                // AMR-PI, index 0 = initial base
  int pi_iteration = -1;                                   // -1: last
};

class CommsController : public sim::Controller {
 public:
  CommsController(const RepairModel& model, Architecture arch, Resources resources, rollout::RolloutConfig cfg);
  void reset(const repair::InitialCondition& initial, std::uint64_t episode_seed) override;
  Joint choose(const FactoredBelief& global, int stage) override;
  void observe(const Joint& u, const std::vector<int>& z, const FactoredBelief& global_next) override;

  std::uint64_t cloud_draws() const { return cloud_draws_; }
  std::uint64_t cloud_hits() const { return cloud_hits_; }
  const LocalBeliefBank& bank() const { return bank_; }

 private:
  const RepairModel& model_;
  Architecture arch_;
  Resources res_;
  rollout::RolloutConfig cfg_;
  Terminal terminal_;
  std::shared_ptr<const policy::ShortestPathTable> paths_;
  LocalBeliefBank bank_;
  std::uint64_t cloud_draws_ = 0;
  std::uint64_t cloud_hits_ = 0;
};

}  // namespace mapomdp::comms
