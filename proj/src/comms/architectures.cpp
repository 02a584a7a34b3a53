#include "mapomdp/comms/architectures.hpp"

#include <stdexcept>

#include "mapomdp/rollout/rollout.hpp"

namespace mapomdp::comms {

void Architecture::validate() const {
  if (radius < 0) throw std::invalid_argument("Architecture: radius must be >= 0");
  if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("Architecture: rho must be in (0, 1]");
}

std::string Architecture::name() const {
  switch (variant) {
    case Variant::kPerfectShared: return "shared";
    case Variant::kB: return "amr-b";
    case Variant::kN: return "amr-n";
    case Variant::kPI: return "amr-pi";
    case Variant::kLC: return "amr-lc";
    case Variant::kILC: return "amr-ilc";
    case Variant::kIB1: return "amr-ib1";
    case Variant::kIB0: return "amr-ib0";
  }
  return "?";
}

Architecture Architecture::parse(const std::string& tag, int radius, double rho) {
  static const std::pair<const char*, Variant> kTags[] = {
      {"shared", Variant::kPerfectShared}, {"amr-b", Variant::kB},     {"amr-n", Variant::kN},
      {"amr-pi", Variant::kPI},            {"amr-lc", Variant::kLC},   {"amr-ilc", Variant::kILC},
      {"amr-ib1", Variant::kIB1},          {"amr-ib0", Variant::kIB0}};
  for (const auto& [name, v] : kTags)
    if (tag == name) {
      Architecture a{v, radius, rho};
      a.validate();
      return a;
    }
  throw std::invalid_argument("unknown communication architecture: " + tag);
}

bool cloud_available(double rho, std::uint64_t cloud_seed) {
  Rng rng = make_rng(cloud_seed);
  return uniform01(rng) < rho;
}

Joint signaled_control(const RepairModel& model, const FactoredBelief& b, const RepairPolicy& base,
                       const Joint& signals, const rollout::RolloutConfig& cfg, const Terminal& terminal,
                       std::uint64_t seed, rollout::EvalCounter* counter) {
  const int m = model.num_agents();
  cfg.validate(m);
  const auto order = cfg.order(m);
  const auto q = rollout::make_q_evaluator(model, base, cfg, terminal, seed, counter);
  const Joint base_u = base.act(b);
  Joint u = base_u;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const int agent = order[pos];
    Joint partial = base_u;
    for (std::size_t p = 0; p < pos; ++p) partial[order[p]] = signals[order[p]];
    u[agent] = rollout::minimize_component(model, b, agent, partial, base_u[agent], q, counter).component;
  }
  return u;
}

Joint amr_b_control(const RepairModel& model, const FactoredBelief& b, const RepairPolicy& base,
                    const rollout::RolloutConfig& cfg, const Terminal& terminal, std::uint64_t seed,
                    rollout::EvalCounter* counter) {
  return signaled_control(model, b, base, base.act(b), cfg, terminal, seed, counter);
}

Joint amr_n_control(const RepairModel& model, const FactoredBelief& b, const RepairPolicy& base,
                    const pi::PolicyClassifier* classifier, const rollout::RolloutConfig& cfg,
                    const Terminal& terminal, std::uint64_t seed, rollout::EvalCounter* counter) {
  if (!classifier) throw std::invalid_argument("AMR-N: no classifier");
  const auto order = cfg.order(model.num_agents());
  const Joint signals = pi::infer_control(*classifier, model, b, base.act(b), order);
  return signaled_control(model, b, base, signals, cfg, terminal, seed, counter);
}

Joint amr_pi_control(const RepairModel& model, const FactoredBelief& b, std::span<const RepairPolicyPtr> policies,
                     int k, const rollout::RolloutConfig& cfg, const Terminal& terminal, std::uint64_t seed,
                     rollout::EvalCounter* counter) {
  if (policies.size() < 3) throw std::invalid_argument("AMR-PI: needs at least two trained iterations");
  if (k < 0) k = static_cast<int>(policies.size()) - 1;
  if (k < 1 || k >= static_cast<int>(policies.size()))
    throw std::invalid_argument("AMR-PI: iteration index out of range");
  const Joint signals = policies[k]->act(b);
  return signaled_control(model, b, *policies[k - 1], signals, cfg, terminal, seed, counter);
}

bool in_range(const policy::ShortestPathTable& paths, int from, int to, int radius) {
  return radius > 0 && paths.dist(from, to) <= radius;
}

Joint amr_lc_control(const RepairModel& model, const FactoredBelief& b, const RepairPolicy& base,
                     const policy::ShortestPathTable& paths, int radius, const rollout::RolloutConfig& cfg,
                     const Terminal& terminal, std::uint64_t seed, rollout::EvalCounter* counter) {
  const int m = model.num_agents();
  cfg.validate(m);
  if (radius < 0) throw std::invalid_argument("AMR-LC: radius must be >= 0");
  const auto order = cfg.order(m);
  const auto q = rollout::make_q_evaluator(model, base, cfg, terminal, seed, counter);
  const Joint base_u = base.act(b);
  Joint u = base_u;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const int agent = order[pos];
    Joint partial = base_u;
    for (std::size_t p = 0; p < pos; ++p) {
      const int k = order[p];
      if (in_range(paths, b.agent_locations[k], b.agent_locations[agent], radius)) partial[k] = u[k];
    }
    u[agent] = rollout::minimize_component(model, b, agent, partial, base_u[agent], q, counter).component;
  }
  return u;
}

Joint amr_ilc_control(const RepairModel& model, const FactoredBelief& b, const RepairPolicy& base,
                      const policy::ShortestPathTable& paths, double rho, int radius,
                      const rollout::RolloutConfig& cfg, const Terminal& terminal, std::uint64_t seed,
                      std::uint64_t cloud_seed, rollout::EvalCounter* counter, bool* cloud_hit) {
  const bool cloud = cloud_available(rho, cloud_seed);
  if (cloud_hit) *cloud_hit = cloud;
  if (cloud) return rollout::one_at_a_time_control(model, b, base, cfg, terminal, seed, counter).control;
  return amr_lc_control(model, b, base, paths, radius, cfg, terminal, seed, counter);
}

void LocalBeliefBank::sync(const FactoredBelief& global) {
  for (auto& b : local) b = global;
}

void LocalBeliefBank::advance(const RepairModel& model, const Joint& executed, const std::vector<int>& z) {
  const int m = model.num_agents();
  std::vector<char> own(m, 0);
  for (int l = 0; l < m; ++l) {
    Joint controls = assumed[l];
    controls[l] = executed[l];
    own.assign(m, 0);
    own[l] = 1;
    model.advance_belief_partial(local[l], controls, z, own, true);
  }
}

void LocalBeliefBank::validate(const RepairModel& model) const {
  if (static_cast<int>(local.size()) != model.num_agents())
    throw std::invalid_argument("LocalBeliefBank: one belief per agent expected");
  for (int l = 0; l < model.num_agents(); ++l) {
    model.validate(local[l], false);
    const auto d = local[l].d(local[l].agent_locations[l]);
    bool point = false;
    for (double x : d) point |= x == 1.0;
    if (!point) throw std::invalid_argument("LocalBeliefBank: own location is not a point mass");
  }
}

IbStep amr_ib_choose(const RepairModel& model, LocalBeliefBank& bank, const FactoredBelief& global,
                     Variant variant, const RepairPolicy& base, const rollout::RolloutConfig& cfg, double rho,
                     const Terminal& terminal, std::uint64_t seed, std::uint64_t cloud_seed,
                     rollout::EvalCounter* counter) {
  if (variant != Variant::kIB1 && variant != Variant::kIB0)
    throw std::invalid_argument("amr_ib_choose: variant must be IB1 or IB0");
  const int m = model.num_agents();
  IbStep step;
  step.cloud = cloud_available(rho, cloud_seed);
  if (step.cloud) {
    bank.sync(global);
    step.executed = rollout::one_at_a_time_control(model, global, base, cfg, terminal, seed, counter).control;
    bank.assumed.assign(m, step.executed);
    return step;
  }
  step.executed.resize(m);
  bank.assumed.resize(m);
  const auto q = rollout::make_q_evaluator(model, base, cfg, terminal, seed, counter);
  for (int l = 0; l < m; ++l) {
    const FactoredBelief& mine = bank.local[l];
    Joint assumed = base.act(mine);
    if (variant == Variant::kIB1)
      assumed[l] = rollout::minimize_component(model, mine, l, assumed, assumed[l], q, counter).component;
    step.executed[l] = assumed[l];
    bank.assumed[l] = std::move(assumed);
  }
  return step;
}

CommsController::CommsController(const RepairModel& model, Architecture arch, Resources resources,
                                 rollout::RolloutConfig cfg)
    : model_(model), arch_(arch), res_(std::move(resources)), cfg_(std::move(cfg)) {
  arch_.validate();
  cfg_.validate(model.num_agents());
  terminal_ = [&model](const FactoredBelief& b) { return model.terminal_cost(b); };
  if (arch_.variant == Variant::kPI) {
    if (res_.pi_policies.size() < 3) throw std::invalid_argument("AMR-PI: needs at least two trained iterations");
  } else if (!res_.base) {
    throw std::invalid_argument("CommsController: missing base policy");
  }
  if (arch_.variant == Variant::kN && !res_.classifier) throw std::invalid_argument("AMR-N: no classifier");
  if (arch_.variant == Variant::kLC || arch_.variant == Variant::kILC)
    paths_ = std::make_shared<policy::ShortestPathTable>(model.graph());
}

void CommsController::reset(const repair::InitialCondition& initial, std::uint64_t episode_seed) {
  Controller::reset(initial, episode_seed);
  bank_.local.assign(model_.num_agents(), initial.belief);
  bank_.assumed.clear();
}

Joint CommsController::choose(const FactoredBelief& b, int stage) {
  const std::uint64_t seed = decision_seed(stage);
  switch (arch_.variant) {
    case Variant::kPerfectShared:
      return rollout::one_at_a_time_control(model_, b, *res_.base, cfg_, terminal_, seed, &counter_).control;
    case Variant::kB:
      return amr_b_control(model_, b, *res_.base, cfg_, terminal_, seed, &counter_);
    case Variant::kN:
      return amr_n_control(model_, b, *res_.base, res_.classifier.get(), cfg_, terminal_, seed, &counter_);
    case Variant::kPI:
      return amr_pi_control(model_, b, res_.pi_policies, res_.pi_iteration, cfg_, terminal_, seed, &counter_);
    case Variant::kLC:
      return amr_lc_control(model_, b, *res_.base, *paths_, arch_.radius, cfg_, terminal_, seed, &counter_);
    case Variant::kILC: {
      bool hit = false;
      Joint u = amr_ilc_control(model_, b, *res_.base, *paths_, arch_.rho, arch_.radius, cfg_, terminal_, seed,
                                cloud_seed(stage), &counter_, &hit);
      ++cloud_draws_;
      cloud_hits_ += hit;
      return u;
    }
    case Variant::kIB1:
    case Variant::kIB0: {
      const IbStep step = amr_ib_choose(model_, bank_, b, arch_.variant, *res_.base, cfg_, arch_.rho, terminal_,
                                        seed, cloud_seed(stage), &counter_);
      ++cloud_draws_;
      cloud_hits_ += step.cloud;
      return step.executed;
    }
  }
  throw std::logic_error("unhandled architecture");
}

void CommsController::observe(const Joint& u, const std::vector<int>& z, const FactoredBelief&) {
  if (arch_.variant == Variant::kIB1 || arch_.variant == Variant::kIB0) bank_.advance(model_, u, z);
}

}  // namespace mapomdp::comms
