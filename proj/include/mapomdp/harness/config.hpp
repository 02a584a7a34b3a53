#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mapomdp/comms/architectures.hpp"
#include "mapomdp/repair/model.hpp"
#include "mapomdp/rollout/config.hpp"

namespace mapomdp::harness {

struct InstanceConfig {
  // A JSON file, or one of builtin:desk, builtin:benchmark.
  std::string graph = "builtin:desk";
  std::string chain = "builtin:desk";
  int agents = 2;
  double discount = 0.95;
  double p_damaged = 0.3;
  // Zero every escalation probability after loading the chain.
  bool terminating = false;
};

enum class PolicyKind { kBase, kOneAtATime, kStandard, kOrderOptimized, kMultistep, kClassifier, kComms };

struct PolicySpec {
  std::string id;
  PolicyKind kind = PolicyKind::kBase;
  comms::Architecture arch;
  // kClassifier: classifier files in iteration order, each using the previous
  // one (greedy first) for its successor slots. amr-n: one file. amr-pi: the
  // iteration chain.
  std::vector<std::string> classifiers;
  int pi_iteration = -1;

  // base | one-at-a-time | standard | order-optimized | multistep |
  // classifier:F1,F2,... | shared | amr-b | amr-lc | amr-ilc | amr-ib1 |
  // amr-ib0 | amr-n:F | amr-pi:F1,F2,...
  // Radius and rho apply to the comms variants that take them.
  static PolicySpec parse(const std::string& text, int radius = 1, double rho = 1.0);
  static std::string default_id(const PolicySpec& spec);
};

struct EvaluationConfig {
  std::size_t states = 200;
  int horizon = 200;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

struct OutputConfig {
  std::string csv = "results.csv";
  std::string manifest = "manifest.json";
  std::string timing;      // optional per-state wall-clock CSV
  std::string comparison;  // optional paired comparison CSV
};

struct ExperimentConfig {
  InstanceConfig instance;
  std::vector<PolicySpec> policies;
  rollout::RolloutConfig rollout;
  EvaluationConfig evaluation;
  OutputConfig output;

  static ExperimentConfig from_json(const nlohmann::json& doc);
  static ExperimentConfig load(const std::string& path);
  nlohmann::json to_json() const;
  // Ranges, duplicate ids and referenced files.
  void validate() const;
};

repair::RepairGraph load_graph(const std::string& source);
repair::DamageChain load_chain(const std::string& source, bool terminating);
repair::RepairModel load_model(const InstanceConfig& instance);

}  // namespace mapomdp::harness
