#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mapomdp/core/belief.hpp"
#include "mapomdp/core/model.hpp"

namespace mapomdp {

// Explicit finite POMDP: p_ij(u), p(z|j,u), g(i,u,j) for every joint control.
// Joint controls are mixed-radix indices over the per-agent component sets.
class TabularPOMDP {
 public:
  using Belief = BeliefVector;
  using State = int;
  using Control = int;
  using Observation = int;

  struct Tables {
    std::vector<double> transition;  // n x n, row-major
    std::vector<double> obs;         // n x |Z|
    std::vector<double> cost;        // n x n
  };

  TabularPOMDP(int n, std::vector<int> control_counts, int num_observations,
               std::vector<Tables> per_joint_control, double discount);

  static TabularPOMDP from_json(const nlohmann::json& doc);
  static TabularPOMDP load(const std::string& path);
  nlohmann::json to_json() const;

  int num_states() const { return n_; }
  int num_observations() const { return nz_; }
  int num_agents() const { return static_cast<int>(control_counts_.size()); }
  int num_joint_controls() const { return static_cast<int>(tables_.size()); }
  const std::vector<int>& control_counts() const { return control_counts_; }
  double discount() const { return discount_; }

  int joint_index(std::span<const int> u) const;
  std::vector<int> joint_control(int index) const;
  // "0_1" style key used in the JSON format.
  static std::string joint_key(std::span<const int> u);

  double transition(int i, int u, int j) const { return tables_[u].transition[i * n_ + j]; }
  double obs_prob(int j, int u, int z) const { return tables_[u].obs[j * nz_ + z]; }
  double cost(int i, int u, int j) const { return tables_[u].cost[i * n_ + j]; }

  // ModelInterface
  std::vector<int> control_set(const BeliefVector& b, int agent) const;
  double expected_stage_cost(const BeliefVector& b, const std::vector<int>& u) const;
  void advance_belief(BeliefVector& b, const std::vector<int>& u, int z) const;
  std::optional<ObservationDistribution<TabularPOMDP>> observation_distribution(
      const BeliefVector& b, const std::vector<int>& u, std::size_t cap) const;
  int sample_state(const BeliefVector& b, Rng& rng) const;
  StepOutcome<TabularPOMDP> step(int state, const std::vector<int>& u, Rng& rng) const;

  // sum_i b(i) p_ij(u)
  std::vector<double> predict(const BeliefVector& b, int u) const;
  // p̂(z|b,u) over all of Z.
  std::vector<double> observation_likelihood(const BeliefVector& b, int u) const;
  // max_{i,u,j} g(i,u,j)
  double max_stage_cost() const;

 private:
  void validate() const;

  int n_;
  std::vector<int> control_counts_;
  int nz_;
  std::vector<Tables> tables_;
  double discount_;
};

static_assert(PomdpModel<TabularPOMDP>);

}  // namespace mapomdp
