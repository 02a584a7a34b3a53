#pragma once

// Paired evaluation of a policy grid. Every policy sees the same seeded
// initial conditions and the same per-stage environment streams, and every
// (policy, state) result is keyed by index, so the output does not depend on
// the worker count.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mapomdp/harness/config.hpp"
#include "mapomdp/sim/episode.hpp"

namespace mapomdp::harness {

inline constexpr int kCsvSchemaVersion = 1;

using RepairPolicyPtr = std::shared_ptr<const Policy<repair::RepairModel>>;

// Greedy base followed by one classifier policy per file, each using the
// previous entry for its successor slots. Index 0 is the base.
std::vector<RepairPolicyPtr> classifier_chain(const repair::RepairModel& model, RepairPolicyPtr base,
                                              const std::vector<std::string>& files,
                                              const std::vector<int>& order = {});

sim::ControllerFactory make_factory(const repair::RepairModel& model, RepairPolicyPtr base, const PolicySpec& spec,
                                    const rollout::RolloutConfig& cfg);

struct StateResult {
  double cost = 0.0;
  int stages = 0;
  std::uint64_t q_factor_evaluations = 0;
  double oscillation = 0.0;
  double seconds = 0.0;
};

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double stderr_mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double q_per_stage = 0.0;
  double oscillation = 0.0;
  double seconds_per_stage = 0.0;
};

Summary summarize(const std::vector<StateResult>& states);

struct PolicyResult {
  std::string id;
  std::vector<StateResult> states;
  Summary summary;
  std::vector<double> costs() const;
};

struct ExperimentResult {
  std::vector<PolicyResult> policies;
  double seconds = 0.0;
  const PolicyResult& at(const std::string& id) const;
};

using Progress = std::function<void(std::size_t done, std::size_t total)>;

ExperimentResult run_experiment(const ExperimentConfig& config, const repair::RepairModel& model,
                                const Progress& progress = {});
ExperimentResult run_experiment(const ExperimentConfig& config, const Progress& progress = {});

// Per-state rows at full precision followed by one aggregate row per policy.
// Costs in aggregate rows are rounded to 2 decimals.
void write_results_csv(std::ostream& out, const ExperimentResult& result);
void write_timing_csv(std::ostream& out, const ExperimentResult& result);

struct PairedComparison {
  std::string a;
  std::string b;
  std::size_t n = 0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  // Differences are cost(b) - cost(a) per initial state.
  double mean_diff = 0.0;
  double stderr_diff = 0.0;
  double t = 0.0;
  double p_lower = 0.5;  // H1: b < a
  double p_upper = 0.5;  // H1: b > a
  double p_two_sided = 1.0;
  // "lower", "higher" or "tie" at the given significance level.
  std::string verdict(double level = 0.05) const;
};

PairedComparison paired_compare(const std::string& a, const std::vector<double>& cost_a, const std::string& b,
                                const std::vector<double>& cost_b);

// Every pair (i, j) with i < j in grid order.
std::vector<PairedComparison> compare_grid(const ExperimentResult& result);
void write_comparison_csv(std::ostream& out, const std::vector<PairedComparison>& rows, double level = 0.05);

nlohmann::json make_manifest(const ExperimentConfig& config, const repair::RepairModel& model,
                             const ExperimentResult& result);

// Writes the CSV, manifest and the optional timing/comparison files named in
// config.output. Empty paths are skipped.
void persist(const ExperimentConfig& config, const repair::RepairModel& model, const ExperimentResult& result);

std::string version_string();

}  // namespace mapomdp::harness
