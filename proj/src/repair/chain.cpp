#include "mapomdp/repair/chain.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace mapomdp::repair {

DamageChain::DamageChain(std::vector<double> gamma, std::vector<double> cost)
    : gamma_(std::move(gamma)), cost_(std::move(cost)) {
  if (cost_.size() < 2) throw std::invalid_argument("DamageChain: need at least two levels");
  if (gamma_.size() == cost_.size()) gamma_.pop_back();
  if (gamma_.size() + 1 != cost_.size())
    throw std::invalid_argument("DamageChain: gamma must have nu-1 (or nu) entries");
  for (double g : gamma_)
    if (!(g >= 0.0 && g <= 1.0))
      throw std::invalid_argument("DamageChain: escalation probability outside [0,1]");
  if (cost_[0] != 0.0) throw std::invalid_argument("DamageChain: cost of level 0 must be 0");
  for (std::size_t k = 1; k < cost_.size(); ++k)
    if (cost_[k] < cost_[k - 1]) throw std::invalid_argument("DamageChain: cost must be non-decreasing");
}

bool DamageChain::terminating() const {
  for (double g : gamma_)
    if (g != 0.0) return false;
  return true;
}

std::vector<double> DamageChain::step(std::span<const double> d, bool repaired) const {
  const int nu = levels();
  std::vector<double> out(nu, 0.0);
  if (repaired) {
    out[0] = 1.0 - gamma_[0];
    out[1] = gamma_[0];
    return out;
  }
  for (int k = 0; k < nu; ++k) {
    if (k + 1 < nu) {
      out[k] += d[k] * (1.0 - gamma_[k]);
      out[k + 1] += d[k] * gamma_[k];
    } else {
      out[k] += d[k];
    }
  }
  return out;
}

void DamageChain::step_in_place(std::span<double> d) const {
  const int nu = levels();
  d[nu - 1] += gamma_[nu - 2] * d[nu - 2];
  for (int k = nu - 2; k >= 1; --k) d[k] = d[k] * (1.0 - gamma_[k]) + gamma_[k - 1] * d[k - 1];
  d[0] *= 1.0 - gamma_[0];
  double sum = 0.0;
  for (double x : d) sum += x;
  // The step preserves mass; only undo accumulated round-off.
  if (std::abs(sum - 1.0) > 1e-12) {
    const double inv = 1.0 / sum;
    for (double& x : d) x *= inv;
  }
}

DamageChain DamageChain::from_json(const nlohmann::json& doc) {
  auto chain = DamageChain(doc.at("gamma").get<std::vector<double>>(),
                           doc.at("cost").get<std::vector<double>>());
  if (doc.contains("nu") && doc["nu"].get<int>() != chain.levels())
    throw std::invalid_argument("DamageChain JSON: nu does not match cost vector length");
  return chain;
}

DamageChain DamageChain::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open chain file " + path);
  return from_json(nlohmann::json::parse(in));
}

nlohmann::json DamageChain::to_json() const {
  return {{"nu", levels()}, {"gamma", gamma_}, {"cost", cost_}};
}

DamageChain benchmark_chain() {
  return DamageChain({0.01, 0.02, 0.03, 0.05}, {0.0, 0.1, 1.0, 10.0, 100.0});
}

DamageChain desk_chain() { return DamageChain({0.02, 0.05}, {0.0, 1.0, 10.0}); }

}  // namespace mapomdp::repair
