#include "mapomdp/core/belief.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mapomdp {

bool is_distribution(std::span<const double> p, double tol) {
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= 0.0 && x <= 1.0)) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= tol;
}

BeliefVector::BeliefVector(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty() || !is_distribution(probs_))
    throw std::invalid_argument("BeliefVector: not a probability distribution");
}

BeliefVector BeliefVector::point_mass(std::size_t n, std::size_t state) {
  if (state >= n) throw std::out_of_range("BeliefVector::point_mass: state out of range");
  std::vector<double> p(n, 0.0);
  p[state] = 1.0;
  return BeliefVector(std::move(p));
}

BeliefVector BeliefVector::uniform(std::size_t n) {
  return BeliefVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

BeliefVector BeliefVector::normalized(std::vector<double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("BeliefVector::normalized: zero total weight");
  for (double& w : weights) w /= total;
  BeliefVector b;
  b.probs_ = std::move(weights);
  return b;
}

}  // namespace mapomdp
