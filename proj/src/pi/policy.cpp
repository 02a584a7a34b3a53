#include "mapomdp/pi/policy.hpp"

#include <numeric>
#include <stdexcept>

#include "mapomdp/pi/features.hpp"

namespace mapomdp::pi {

repair::RepairAction masked_argmax(const repair::RepairModel& model, int location,
                                   std::span<const double> scores) {
  if (static_cast<int>(scores.size()) != model.num_vertices() + 1)
    throw std::invalid_argument("masked_argmax: expected |V|+1 scores");
  int best = 0;  // Fix is always feasible
  for (int c = 1; c < static_cast<int>(scores.size()); ++c)
    if (scores[c] > scores[best] && model.feasible(location, repair::RepairAction::from_class(c))) best = c;
  return repair::RepairAction::from_class(best);
}

std::vector<repair::RepairAction> infer_control(const PolicyClassifier& classifier,
                                                const repair::RepairModel& model,
                                                const repair::FactoredBelief& b,
                                                std::vector<repair::RepairAction> u,
                                                std::span<const int> order) {
  std::vector<double> x(feature_dim(model));
  for (int agent : order) {
    encode_features(model, b, agent, u, order, x);
    u[agent] = masked_argmax(model, b.agent_locations[agent], classifier.logits(x));
  }
  return u;
}

ClassifierPolicy::ClassifierPolicy(const repair::RepairModel& model,
                                   std::shared_ptr<const PolicyClassifier> classifier,
                                   std::shared_ptr<const Policy<repair::RepairModel>> successors,
                                   std::vector<int> order)
    : model_(model), classifier_(std::move(classifier)), successors_(std::move(successors)),
      order_(std::move(order)) {
  if (!classifier_) throw std::invalid_argument("ClassifierPolicy: missing classifier");
  if (!successors_) throw std::invalid_argument("ClassifierPolicy: missing successor policy");
  if (classifier_->input_dim() != static_cast<int>(feature_dim(model)) ||
      classifier_->output_dim() != model.num_vertices() + 1)
    throw std::invalid_argument("ClassifierPolicy: classifier does not match the instance");
  if (order_.empty()) {
    order_.resize(model.num_agents());
    std::iota(order_.begin(), order_.end(), 0);
  }
}

std::vector<repair::RepairAction> ClassifierPolicy::act(const repair::FactoredBelief& b) const {
  return infer_control(*classifier_, model_, b, successors_->act(b), order_);
}

}  // namespace mapomdp::pi
