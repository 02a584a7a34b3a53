#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mapomdp::repair {

// Per-location damage Markov chain: level k escalates to k+1 with
// probability gamma[k]; the top level is absorbing until repaired.
class DamageChain {
 public:
  // `gamma` holds nu-1 escalation probabilities. A vector of length nu is
  // also accepted; its last entry belongs to the absorbing top level and is
  // ignored. `cost` must start at 0 and be non-decreasing.
  DamageChain(std::vector<double> gamma, std::vector<double> cost);

  static DamageChain from_json(const nlohmann::json& doc);
  static DamageChain load(const std::string& path);
  nlohmann::json to_json() const;

  int levels() const { return static_cast<int>(cost_.size()); }
  double gamma(int level) const { return level + 1 < levels() ? gamma_[level] : 0.0; }
  const std::vector<double>& gammas() const { return gamma_; }
  const std::vector<double>& cost() const { return cost_; }
  double max_cost() const { return cost_.back(); }
  bool terminating() const;

  // d^T P for the escalation matrix; if `repaired`, the input is first
  // replaced by the point mass at level 0.
  std::vector<double> step(std::span<const double> d, bool repaired) const;
  // In-place version of step(d, false) followed by renormalization.
  void step_in_place(std::span<double> d) const;

 private:
  std::vector<double> gamma_;
  std::vector<double> cost_;
};

// nu=5 chain with c = [0, 0.1, 1, 10, 100] and gamma = (0.01, 0.02, 0.03, 0.05).
DamageChain benchmark_chain();
// nu=3 chain used for the desk-scale experiments.
DamageChain desk_chain();

}  // namespace mapomdp::repair
