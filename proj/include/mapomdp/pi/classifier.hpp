#pragma once

// Feedforward softmax policy classifier: dense+ReLU hidden layers, one batch
// normalization after the last hidden layer, dense output, softmax. Trained by
// mini-batch RMSProp on mean cross-entropy.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mapomdp::pi {

struct ClassifierShape {
  int input = 0;
  std::vector<int> hidden{256, 64};
  int output = 0;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  double decay = 0.9;
  double epsilon = 1e-8;
  int batch_size = 128;
  int epochs = 20;
  // Stop after this many epochs without the epoch loss dropping by
  // min_improvement.
  int patience = 3;
  double min_improvement = 1e-4;
  // running = momentum * running + (1 - momentum) * batch
  double bn_momentum = 0.9;
};

// Row-major feature matrix with one class label per row.
struct Dataset {
  std::size_t dim = 0;
  std::vector<double> features;
  std::vector<int> labels;

  explicit Dataset(std::size_t d = 0) : dim(d) {}
  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const { return {features.data() + i * dim, dim}; }
  void add(std::span<const double> x, int label);
  void append(const Dataset& other);
};

struct BatchStats {
  std::vector<double> mean;
  std::vector<double> var;  // biased
};

struct TrainReport {
  int epochs_run = 0;
  std::vector<double> epoch_loss;
  double train_accuracy = 0.0;
};

class PolicyClassifier {
 public:
  static constexpr double kBatchNormEps = 1e-5;

  // He-normal weights, zero biases, identity normalization.
  PolicyClassifier(ClassifierShape shape, std::uint64_t seed);

  const ClassifierShape& shape() const { return shape_; }
  int input_dim() const { return shape_.input; }
  int output_dim() const { return shape_.output; }

  // Inference mode: normalization uses the running statistics.
  std::vector<double> logits(std::span<const double> x) const;
  std::vector<double> predict_proba(std::span<const double> x) const;

  // Mean cross-entropy over `rows` of `data`. In training mode the batch is
  // normalized with its own statistics, returned through `stats`. When `grad`
  // is given it receives dLoss/dparameters in parameters() layout.
  double loss(const Dataset& data, std::span<const std::size_t> rows, bool training,
              std::vector<double>* grad = nullptr, BatchStats* stats = nullptr) const;

  // Dense layers in order (weights rows x cols row-major, then bias), then
  // the normalization scale and shift.
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  std::span<double> running_mean() { return running_mean_; }
  std::span<double> running_var() { return running_var_; }

  // Top-1 agreement in inference mode; ties go to the lowest class.
  double accuracy(const Dataset& data) const;
  TrainReport train(const Dataset& data, const TrainConfig& cfg, std::uint64_t seed);
  double train_accuracy() const { return train_accuracy_; }

  void write(std::ostream& out) const;
  static PolicyClassifier read(std::istream& in);
  void save(const std::string& path) const;
  static PolicyClassifier load(const std::string& path);
  nlohmann::json to_json() const;

 private:
  struct Dense {
    std::size_t in, out, weights, bias;  // offsets into params_
  };

  PolicyClassifier() = default;
  void layout();

  ClassifierShape shape_;
  std::vector<Dense> dense_;
  std::size_t gamma_ = 0, beta_ = 0;
  std::vector<double> params_;
  std::vector<double> running_mean_;
  std::vector<double> running_var_;
  double train_accuracy_ = 0.0;
};

std::size_t argmax(std::span<const double> v);

}  // namespace mapomdp::pi
