#pragma once

#include <memory>
#include <vector>

#include "mapomdp/core/model.hpp"
#include "mapomdp/pi/classifier.hpp"
#include "mapomdp/repair/model.hpp"

namespace mapomdp::pi {

// Feasible class with the highest output at `location`; ties go to the
// lowest class index.
repair::RepairAction masked_argmax(const repair::RepairModel& model, int location,
                                   std::span<const double> scores);

// m sequential classifier calls in `order`. Slot l sees the components
// already inferred for its predecessors and `successors` for the rest.
std::vector<repair::RepairAction> infer_control(const PolicyClassifier& classifier,
                                                const repair::RepairModel& model,
                                                const repair::FactoredBelief& b,
                                                std::vector<repair::RepairAction> successors,
                                                std::span<const int> order);

// The classifier as a base policy. Successor slots are filled by `successors`
// (the previous policy in a policy-iteration chain).
class ClassifierPolicy : public Policy<repair::RepairModel> {
 public:
  ClassifierPolicy(const repair::RepairModel& model, std::shared_ptr<const PolicyClassifier> classifier,
                   std::shared_ptr<const Policy<repair::RepairModel>> successors,
                   std::vector<int> order = {});
  std::vector<repair::RepairAction> act(const repair::FactoredBelief& b) const override;

  const PolicyClassifier& classifier() const { return *classifier_; }
  const Policy<repair::RepairModel>& successors() const { return *successors_; }
  const std::vector<int>& order() const { return order_; }

 private:
  const repair::RepairModel& model_;
  std::shared_ptr<const PolicyClassifier> classifier_;
  std::shared_ptr<const Policy<repair::RepairModel>> successors_;
  std::vector<int> order_;
};

}  // namespace mapomdp::pi
