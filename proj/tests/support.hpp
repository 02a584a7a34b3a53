#pragma once

// Test-only helpers: random instance generators and simple policies.

#include <cmath>
#include <vector>

#include "mapomdp/core/rng.hpp"
#include "mapomdp/core/tabular.hpp"

namespace mapomdp::testing {

inline std::vector<double> random_distribution(Rng& rng, int n, double zero_prob = 0.0) {
  std::vector<double> p(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    p[i] = uniform01(rng) < zero_prob ? 0.0 : 0.05 + uniform01(rng);
    total += p[i];
  }
  if (total == 0.0) {
    p[0] = 1.0;
    return p;
  }
  for (double& x : p) x /= total;
  return p;
}

inline TabularPOMDP random_tabular(Rng& rng, int n, std::vector<int> counts, int nz,
                                   double discount, double zero_prob = 0.0) {
  int joint = 1;
  for (int c : counts) joint *= c;
  std::vector<TabularPOMDP::Tables> tables(joint);
  for (auto& t : tables) {
    for (int i = 0; i < n; ++i) {
      auto row = random_distribution(rng, n, zero_prob);
      t.transition.insert(t.transition.end(), row.begin(), row.end());
      auto obs = random_distribution(rng, nz, zero_prob);
      t.obs.insert(t.obs.end(), obs.begin(), obs.end());
      for (int j = 0; j < n; ++j) t.cost.push_back(std::round(10.0 * uniform01(rng) * 100) / 100);
    }
  }
  return TabularPOMDP(n, std::move(counts), nz, std::move(tables), discount);
}

// u_l = (argmax_i b(i) + l) mod |U_l|
class ArgmaxPolicy : public Policy<TabularPOMDP> {
 public:
  explicit ArgmaxPolicy(const TabularPOMDP& model) : model_(model) {}
  std::vector<int> act(const BeliefVector& b) const override {
    std::size_t best = 0;
    for (std::size_t i = 1; i < b.size(); ++i)
      if (b[i] > b[best]) best = i;
    std::vector<int> u(model_.num_agents());
    for (int l = 0; l < model_.num_agents(); ++l)
      u[l] = static_cast<int>((best + l) % model_.control_counts()[l]);
    return u;
  }

 private:
  const TabularPOMDP& model_;
};

class ConstantPolicy : public Policy<TabularPOMDP> {
 public:
  explicit ConstantPolicy(std::vector<int> u) : u_(std::move(u)) {}
  std::vector<int> act(const BeliefVector&) const override { return u_; }

 private:
  std::vector<int> u_;
};

inline BeliefVector random_belief(Rng& rng, int n) {
  return BeliefVector(random_distribution(rng, n));
}

}  // namespace mapomdp::testing
