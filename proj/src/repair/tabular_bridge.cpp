#include "mapomdp/repair/tabular_bridge.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "mapomdp/core/error.hpp"

namespace mapomdp::repair {

std::size_t flattened_state_count(int vertices, int levels, int agents) {
  std::size_t count = 1;
  const std::size_t limit = std::numeric_limits<std::size_t>::max() / 64;
  for (int l = 0; l < agents; ++l) {
    count *= static_cast<std::size_t>(vertices);
    if (count > limit) return 0;
  }
  for (int v = 0; v < vertices; ++v) {
    count *= static_cast<std::size_t>(levels);
    if (count > limit) return 0;
  }
  return count;
}

namespace {

std::size_t damage_count(const RepairModel& model) {
  std::size_t c = 1;
  for (int v = 0; v < model.num_vertices(); ++v) c *= static_cast<std::size_t>(model.levels());
  return c;
}

}  // namespace

std::size_t state_index(const RepairModel& model, const HiddenRepairState& s) {
  std::size_t loc = 0;
  for (int v : s.agent_locations) loc = loc * model.num_vertices() + v;
  std::size_t dmg = 0;
  for (int level : s.levels) dmg = dmg * model.levels() + level;
  return loc * damage_count(model) + dmg;
}

HiddenRepairState state_from_index(const RepairModel& model, std::size_t index) {
  const std::size_t dc = damage_count(model);
  std::size_t loc = index / dc;
  std::size_t dmg = index % dc;
  HiddenRepairState s;
  s.agent_locations.resize(model.num_agents());
  for (int l = model.num_agents(); l-- > 0;) {
    s.agent_locations[l] = static_cast<int>(loc % model.num_vertices());
    loc /= model.num_vertices();
  }
  s.levels.resize(model.num_vertices());
  for (int v = model.num_vertices(); v-- > 0;) {
    s.levels[v] = static_cast<int>(dmg % model.levels());
    dmg /= model.levels();
  }
  return s;
}

int observation_index(const RepairModel& model, const std::vector<int>& z) {
  int index = 0;
  for (int level : z) index = index * model.levels() + level;
  return index;
}

std::vector<int> control_indices(const std::vector<RepairAction>& u) {
  std::vector<int> out(u.size());
  for (std::size_t l = 0; l < u.size(); ++l) out[l] = u[l].class_index();
  return out;
}

TabularPOMDP to_tabular(const RepairModel& model, std::size_t cap) {
  const int nv = model.num_vertices();
  const int nu = model.levels();
  const int m = model.num_agents();
  const std::size_t n = flattened_state_count(nv, nu, m);
  if (n == 0 || n > cap)
    throw CapExceeded("to_tabular: |V|^m nu^|V| exceeds the state cap of " + std::to_string(cap));
  int nz = 1;
  for (int l = 0; l < m; ++l) nz *= nu;

  std::vector<int> counts(m, nv + 1);
  int joint = 1;
  for (int c : counts) joint *= c;

  const auto& cost = model.chain().cost();
  std::vector<TabularPOMDP::Tables> tables(joint);
  for (int ui = 0; ui < joint; ++ui) {
    std::vector<int> classes(m);
    {
      int rem = ui;
      for (int l = m; l-- > 0;) {
        classes[l] = rem % (nv + 1);
        rem /= nv + 1;
      }
    }
    auto& t = tables[ui];
    t.transition.assign(n * n, 0.0);
    t.obs.assign(n * nz, 0.0);
    t.cost.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      HiddenRepairState s = state_from_index(model, i);
      for (int l = 0; l < m; ++l) {
        const RepairAction a = RepairAction::from_class(classes[l]);
        if (a.is_fix()) s.levels[s.agent_locations[l]] = 0;
      }
      for (int l = 0; l < m; ++l) {
        const RepairAction a = RepairAction::from_class(classes[l]);
        if (!a.is_fix() && model.graph().adjacent(s.agent_locations[l], a.target()))
          s.agent_locations[l] = a.target();
      }
      double g = 0.0;
      for (int level : s.levels) g += cost[level];
      for (std::size_t j = 0; j < n; ++j) t.cost[i * n + j] = g;

      // Enumerate escalation outcomes vertex by vertex.
      std::vector<std::pair<HiddenRepairState, double>> outcomes{{s, 1.0}};
      for (int v = 0; v < nv; ++v) {
        const double gamma = model.chain().gamma(s.levels[v]);
        if (gamma == 0.0) continue;
        std::vector<std::pair<HiddenRepairState, double>> next;
        next.reserve(outcomes.size() * 2);
        for (auto& [st, p] : outcomes) {
          if (gamma < 1.0) next.emplace_back(st, p * (1.0 - gamma));
          HiddenRepairState up = st;
          ++up.levels[v];
          next.emplace_back(std::move(up), p * gamma);
        }
        outcomes = std::move(next);
      }
      for (const auto& [st, p] : outcomes) t.transition[i * n + state_index(model, st)] += p;
    }
    for (std::size_t j = 0; j < n; ++j) {
      const HiddenRepairState s = state_from_index(model, j);
      std::vector<int> z(m);
      for (int l = 0; l < m; ++l) z[l] = s.levels[s.agent_locations[l]];
      t.obs[j * nz + observation_index(model, z)] = 1.0;
    }
  }
  return TabularPOMDP(static_cast<int>(n), std::move(counts), nz, std::move(tables),
                      model.discount());
}

BeliefVector flatten_belief(const RepairModel& model, const FactoredBelief& b) {
  const int nv = model.num_vertices();
  const int nu = model.levels();
  const std::size_t n = flattened_state_count(nv, nu, model.num_agents());
  const std::size_t dc = damage_count(model);
  std::size_t loc = 0;
  for (int v : b.agent_locations) loc = loc * nv + v;
  std::vector<double> p(n, 0.0);
  std::vector<int> levels(nv, 0);
  for (std::size_t d = 0; d < dc; ++d) {
    std::size_t rem = d;
    double prob = 1.0;
    for (int v = nv; v-- > 0;) {
      levels[v] = static_cast<int>(rem % nu);
      rem /= nu;
    }
    for (int v = 0; v < nv && prob > 0.0; ++v) prob *= b.d(v)[levels[v]];
    p[loc * dc + d] = prob;
  }
  return BeliefVector::normalized(std::move(p));
}

FactoredBelief unflatten_belief(const RepairModel& model, const BeliefVector& b) {
  const int nv = model.num_vertices();
  const int nu = model.levels();
  FactoredBelief out;
  out.levels = nu;
  out.damage.assign(static_cast<std::size_t>(nv) * nu, 0.0);
  bool have_location = false;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i] == 0.0) continue;
    const HiddenRepairState s = state_from_index(model, i);
    if (!have_location) {
      out.agent_locations = s.agent_locations;
      have_location = true;
    } else if (s.agent_locations != out.agent_locations) {
      throw std::invalid_argument("unflatten_belief: agent locations are uncertain");
    }
    for (int v = 0; v < nv; ++v) out.d(v)[s.levels[v]] += b[i];
  }
  for (int v = 0; v < nv; ++v) {
    auto dv = out.d(v);
    double sum = 0.0;
    for (double x : dv) sum += x;
    for (double& x : dv) x /= sum;
    for (double& x : dv)
      if (std::abs(x - 1.0) < 1e-14) x = 1.0;
  }
  return out;
}

std::vector<int> FlattenedPolicy::act(const BeliefVector& b) const {
  return control_indices(inner_->act(unflatten_belief(model_, b)));
}

}  // namespace mapomdp::repair
