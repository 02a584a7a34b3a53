#pragma once

#include <span>
#include <vector>

namespace mapomdp {

// Probability vector over the hidden states of a finite POMDP.
class BeliefVector {
 public:
  static constexpr double kSumTolerance = 1e-12;

  BeliefVector() = default;
  // Validates: entries in [0,1] and sum within kSumTolerance of 1.
  explicit BeliefVector(std::vector<double> probs);

  static BeliefVector point_mass(std::size_t n, std::size_t state);
  static BeliefVector uniform(std::size_t n);

  // Scales non-negative weights to sum to one. Throws if the total is zero.
  static BeliefVector normalized(std::vector<double> weights);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }

  bool operator==(const BeliefVector&) const = default;

 private:
  std::vector<double> probs_;
};

bool is_distribution(std::span<const double> p, double tol = BeliefVector::kSumTolerance);

}  // namespace mapomdp
