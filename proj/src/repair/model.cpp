#include "mapomdp/repair/model.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "mapomdp/core/belief.hpp"
#include "mapomdp/core/error.hpp"
#include "mapomdp/simd/kernels.hpp"

namespace mapomdp::repair {

RepairModel::RepairModel(RepairGraph graph, DamageChain chain, int agents, double discount)
    : graph_(std::move(graph)), chain_(std::move(chain)), agents_(agents), discount_(discount) {
  if (agents_ < 1) throw std::invalid_argument("RepairModel: need at least one agent");
  if (!(discount_ > 0.0 && discount_ < 1.0))
    throw std::invalid_argument("RepairModel: discount must lie in (0,1)");
  tiled_cost_.reserve(static_cast<std::size_t>(num_vertices()) * levels());
  for (int v = 0; v < num_vertices(); ++v)
    tiled_cost_.insert(tiled_cost_.end(), chain_.cost().begin(), chain_.cost().end());
}

std::vector<RepairAction> RepairModel::control_set_at(int location) const {
  std::vector<RepairAction> out;
  out.reserve(graph_.degree(location) + 1);
  out.push_back(RepairAction::fix());
  for (int w : graph_.neighbors(location)) out.push_back(RepairAction::move(w));
  return out;
}

std::vector<RepairAction> RepairModel::control_set(const FactoredBelief& b, int agent) const {
  return control_set_at(b.agent_locations.at(agent));
}

bool RepairModel::feasible(int location, RepairAction a) const {
  return a.is_fix() || graph_.adjacent(location, a.target());
}

double RepairModel::stage_cost(const FactoredBelief& b) const {
  return simd::dot(b.damage, tiled_cost_);
}

double RepairModel::terminal_cost(const FactoredBelief& b) const {
  return terminal_cost(b, discount_);
}

double RepairModel::terminal_cost(const FactoredBelief& b, double alpha) const {
  return stage_cost(b) / (1.0 - alpha);
}

void RepairModel::check_controls(const std::vector<int>& locations,
                                 const std::vector<RepairAction>& u) const {
  if (static_cast<int>(u.size()) != agents_)
    throw InfeasibleControl("RepairModel: joint control has wrong arity");
  for (int l = 0; l < agents_; ++l) {
    const RepairAction a = u[l];
    if (!a.is_fix() && (a.target() < 0 || a.target() >= num_vertices() ||
                        !graph_.adjacent(locations[l], a.target())))
      throw InfeasibleControl("RepairModel: agent " + std::to_string(l) + " cannot move from " +
                              std::to_string(locations[l]) + " to " + std::to_string(a.target()));
  }
}

double RepairModel::expected_stage_cost(const FactoredBelief& b,
                                        const std::vector<RepairAction>& u) const {
  check_controls(b.agent_locations, u);
  double total = stage_cost(b);
  const auto& c = chain_.cost();
  for (int l = 0; l < agents_; ++l) {
    if (!u[l].is_fix()) continue;
    const int v = b.agent_locations[l];
    bool seen = false;
    for (int k = 0; k < l; ++k) seen = seen || (u[k].is_fix() && b.agent_locations[k] == v);
    if (seen) continue;
    const auto dv = b.d(v);
    for (int k = 0; k < levels(); ++k) total -= dv[k] * c[k];
  }
  return std::max(total, 0.0);
}

StepOutcome<RepairModel> RepairModel::step(const HiddenRepairState& s,
                                           const std::vector<RepairAction>& u, Rng& rng) const {
  StepOutcome<RepairModel> out{s, {}, 0.0};
  out.cost = advance_state(out.next, u, rng, out.observation);
  return out;
}

double RepairModel::advance_state(HiddenRepairState& s, const std::vector<RepairAction>& u, Rng& rng,
                                  Observation& z) const {
  check_controls(s.agent_locations, u);
  for (int l = 0; l < agents_; ++l)
    if (u[l].is_fix()) s.levels[s.agent_locations[l]] = 0;
  for (int l = 0; l < agents_; ++l)
    if (!u[l].is_fix()) s.agent_locations[l] = u[l].target();
  const auto& c = chain_.cost();
  double cost = 0.0;
  for (int level : s.levels) cost += c[level];
  // One uniform per vertex in vertex order, whatever the controls were.
  for (int v = 0; v < num_vertices(); ++v) {
    const double draw = uniform01(rng);
    int& level = s.levels[v];
    if (level + 1 < levels() && draw < chain_.gamma(level)) ++level;
  }
  z.resize(agents_);
  for (int l = 0; l < agents_; ++l) z[l] = s.levels[s.agent_locations[l]];
  return cost;
}

void RepairModel::apply_controls(FactoredBelief& b, const std::vector<RepairAction>& u) const {
  check_controls(b.agent_locations, u);
  for (int l = 0; l < agents_; ++l) {
    if (u[l].is_fix()) {
      auto dv = b.d(b.agent_locations[l]);
      std::fill(dv.begin(), dv.end(), 0.0);
      dv[0] = 1.0;
    }
  }
  for (int l = 0; l < agents_; ++l)
    if (!u[l].is_fix()) b.agent_locations[l] = u[l].target();
  for (int v = 0; v < num_vertices(); ++v) chain_.step_in_place(b.d(v));
}

void RepairModel::advance_belief_partial(FactoredBelief& b, const std::vector<RepairAction>& u,
                                         const Observation& z, std::span<const char> observed,
                                         bool lenient) const {
  if (static_cast<int>(z.size()) != agents_)
    throw std::invalid_argument("RepairModel: observation has wrong arity");
  apply_controls(b, u);
  for (int l = 0; l < agents_; ++l) {
    if (!observed[l]) continue;
    const int level = z[l];
    if (level < 0 || level >= levels())
      throw std::invalid_argument("RepairModel: observed level out of range");
    auto dv = b.d(b.agent_locations[l]);
    if (!(dv[level] > 0.0) && !lenient)
      throw ImpossibleObservation("RepairModel: agent " + std::to_string(l) + " observed level " +
                                  std::to_string(level) + " at vertex " +
                                  std::to_string(b.agent_locations[l]) +
                                  " which has zero prior probability");
    std::fill(dv.begin(), dv.end(), 0.0);
    dv[level] = 1.0;
  }
}

void RepairModel::advance_belief(FactoredBelief& b, const std::vector<RepairAction>& u,
                                 const Observation& z) const {
  static constexpr char kAll[64] = {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1,
                                    1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1,
                                    1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1,
                                    1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  if (agents_ <= 64) {
    advance_belief_partial(b, u, z, std::span(kAll, agents_), false);
  } else {
    const std::vector<char> all(agents_, 1);
    advance_belief_partial(b, u, z, all, false);
  }
}

FactoredBelief RepairModel::belief_step(FactoredBelief b, const std::vector<RepairAction>& u,
                                        const Observation& z) const {
  advance_belief(b, u, z);
  return b;
}

std::optional<ObservationDistribution<RepairModel>> RepairModel::observation_distribution(
    const FactoredBelief& b, const std::vector<RepairAction>& u, std::size_t cap) const {
  FactoredBelief predicted = b;
  apply_controls(predicted, u);

  // Distinct post-move locations and the support of each one's prediction.
  std::vector<int> sites;
  std::vector<int> site_of_agent(agents_);
  for (int l = 0; l < agents_; ++l) {
    const int v = predicted.agent_locations[l];
    auto it = std::find(sites.begin(), sites.end(), v);
    site_of_agent[l] = static_cast<int>(it - sites.begin());
    if (it == sites.end()) sites.push_back(v);
  }
  std::vector<std::vector<int>> support(sites.size());
  std::size_t outcomes = 1;
  for (std::size_t s = 0; s < sites.size(); ++s) {
    const auto dv = predicted.d(sites[s]);
    for (int k = 0; k < levels(); ++k)
      if (dv[k] > 0.0) support[s].push_back(k);
    outcomes *= support[s].size();
    if (outcomes > cap) return std::nullopt;
  }

  ObservationDistribution<RepairModel> out;
  out.reserve(outcomes);
  std::vector<std::size_t> digit(sites.size(), 0);
  for (std::size_t n = 0; n < outcomes; ++n) {
    double p = 1.0;
    for (std::size_t s = 0; s < sites.size(); ++s) p *= predicted.d(sites[s])[support[s][digit[s]]];
    Observation z(agents_);
    for (int l = 0; l < agents_; ++l) z[l] = support[site_of_agent[l]][digit[site_of_agent[l]]];
    out.emplace_back(std::move(z), p);
    for (std::size_t s = sites.size(); s-- > 0;) {
      if (++digit[s] < support[s].size()) break;
      digit[s] = 0;
    }
  }
  return out;
}

HiddenRepairState RepairModel::sample_state(const FactoredBelief& b, Rng& rng) const {
  HiddenRepairState s;
  s.agent_locations = b.agent_locations;
  s.levels.resize(num_vertices());
  for (int v = 0; v < num_vertices(); ++v)
    s.levels[v] = static_cast<int>(sample_categorical(b.d(v), rng));
  return s;
}

InitialCondition RepairModel::random_initial_state(const InitialDamage& init, Rng& rng) const {
  if (!(init.p_damaged >= 0.0 && init.p_damaged <= 1.0))
    throw std::invalid_argument("InitialDamage: p_damaged outside [0,1]");
  const int n = num_vertices();
  const int nu = levels();
  InitialCondition ic;
  ic.state.agent_locations.resize(agents_);
  for (int l = 0; l < agents_; ++l)
    ic.state.agent_locations[l] = static_cast<int>(uniform_index(rng, n));
  ic.state.levels.assign(n, 0);
  for (int v = 0; v < n; ++v) {
    const double damaged = uniform01(rng);
    const double which = uniform01(rng);
    if (damaged < init.p_damaged)
      ic.state.levels[v] = 1 + static_cast<int>(which * static_cast<double>(nu - 1));
  }

  ic.belief.agent_locations = ic.state.agent_locations;
  ic.belief.levels = nu;
  ic.belief.damage.assign(static_cast<std::size_t>(n) * nu, 0.0);
  for (int v = 0; v < n; ++v) {
    auto dv = ic.belief.d(v);
    dv[0] = 1.0 - init.p_damaged;
    for (int k = 1; k < nu; ++k) dv[k] = init.p_damaged / (nu - 1);
  }
  for (int v : ic.state.agent_locations) {
    auto dv = ic.belief.d(v);
    std::fill(dv.begin(), dv.end(), 0.0);
    dv[ic.state.levels[v]] = 1.0;
  }
  return ic;
}

FactoredBelief RepairModel::point_belief(const HiddenRepairState& s) const {
  FactoredBelief b;
  b.agent_locations = s.agent_locations;
  b.levels = levels();
  b.damage.assign(static_cast<std::size_t>(num_vertices()) * levels(), 0.0);
  for (int v = 0; v < num_vertices(); ++v) b.d(v)[s.levels.at(v)] = 1.0;
  return b;
}

void RepairModel::validate(const FactoredBelief& b, bool require_collapsed) const {
  if (b.levels != levels() ||
      b.damage.size() != static_cast<std::size_t>(num_vertices()) * levels())
    throw std::invalid_argument("FactoredBelief: damage table has wrong shape");
  if (static_cast<int>(b.agent_locations.size()) != agents_)
    throw std::invalid_argument("FactoredBelief: wrong number of agent locations");
  for (int v : b.agent_locations)
    if (v < 0 || v >= num_vertices()) throw std::invalid_argument("FactoredBelief: bad location");
  for (int v = 0; v < num_vertices(); ++v)
    if (!is_distribution(b.d(v)))
      throw std::invalid_argument("FactoredBelief: d^" + std::to_string(v) +
                                  " is not a distribution");
  if (require_collapsed)
    for (int v : b.agent_locations) {
      const auto dv = b.d(v);
      if (*std::max_element(dv.begin(), dv.end()) != 1.0)
        throw std::invalid_argument("FactoredBelief: agent location " + std::to_string(v) +
                                    " is not a point mass");
    }
}

}  // namespace mapomdp::repair
