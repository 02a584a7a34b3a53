#include "mapomdp/pi/features.hpp"

#include <algorithm>
#include <stdexcept>

namespace mapomdp::pi {

std::size_t feature_dim(int vertices, int levels, int agents) {
  const std::size_t v = vertices, nu = levels, m = agents;
  return v * nu + m * v + m + m * (v + 2);
}

std::size_t feature_dim(const repair::RepairModel& model) {
  return feature_dim(model.num_vertices(), model.levels(), model.num_agents());
}

void encode_features(const repair::RepairModel& model, const repair::FactoredBelief& b, int agent,
                     std::span<const repair::RepairAction> u, std::span<const int> order,
                     std::span<double> out) {
  const int n = model.num_vertices();
  const int m = model.num_agents();
  if (out.size() != feature_dim(model)) throw std::invalid_argument("encode_features: bad output size");
  if (static_cast<int>(u.size()) != m || static_cast<int>(order.size()) != m)
    throw std::invalid_argument("encode_features: control or order arity");
  std::fill(out.begin(), out.end(), 0.0);

  double* p = out.data();
  std::copy(b.damage.begin(), b.damage.end(), p);
  p += b.damage.size();
  for (int l = 0; l < m; ++l) p[l * n + b.agent_locations[l]] = 1.0;
  p += static_cast<std::size_t>(m) * n;
  p[agent] = 1.0;
  p += m;

  const auto pos = std::find(order.begin(), order.end(), agent) - order.begin();
  for (int slot = 0; slot < static_cast<int>(order.size()); ++slot) {
    const int l = order[slot];
    if (l == agent) continue;
    double* s = p + static_cast<std::size_t>(l) * (n + 2);
    s[u[l].class_index()] = 1.0;
    s[n + 1] = slot < pos ? 1.0 : 0.0;
  }
}

std::vector<double> encode_features(const repair::RepairModel& model,
                                    const repair::FactoredBelief& b, int agent,
                                    std::span<const repair::RepairAction> u,
                                    std::span<const int> order) {
  std::vector<double> out(feature_dim(model));
  encode_features(model, b, agent, u, order, out);
  return out;
}

}  // namespace mapomdp::pi
