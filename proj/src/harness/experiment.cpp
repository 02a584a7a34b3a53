#include "mapomdp/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "mapomdp/comms/architectures.hpp"
#include "mapomdp/core/evaluate.hpp"
#include "mapomdp/core/parallel.hpp"
#include "mapomdp/pi/policy.hpp"
#include "mapomdp/policy/greedy.hpp"
#include "mapomdp/simd/kernels.hpp"

namespace mapomdp::harness {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string full(double v) { return fmt("%.17g", v); }
std::string two(double v) { return fmt("%.2f", v); }

// Policy ids may contain commas and brackets.
std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

sim::RolloutKind rollout_kind(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kStandard: return sim::RolloutKind::kStandard;
    case PolicyKind::kOrderOptimized: return sim::RolloutKind::kOrderOptimized;
    case PolicyKind::kMultistep: return sim::RolloutKind::kMultistep;
    default: return sim::RolloutKind::kOneAtATime;
  }
}

}  // namespace

std::vector<RepairPolicyPtr> classifier_chain(const repair::RepairModel& model, RepairPolicyPtr base,
                                              const std::vector<std::string>& files, const std::vector<int>& order) {
  std::vector<RepairPolicyPtr> chain{std::move(base)};
  for (const auto& file : files) {
    auto clf = std::make_shared<const pi::PolicyClassifier>(pi::PolicyClassifier::load(file));
    chain.push_back(std::make_shared<const pi::ClassifierPolicy>(model, clf, chain.back(), order));
  }
  return chain;
}

sim::ControllerFactory make_factory(const repair::RepairModel& model, RepairPolicyPtr base, const PolicySpec& spec,
                                    const rollout::RolloutConfig& cfg) {
  switch (spec.kind) {
    case PolicyKind::kBase:
      return [base] { return std::make_unique<sim::PolicyController>(base); };
    case PolicyKind::kClassifier: {
      RepairPolicyPtr last = classifier_chain(model, base, spec.classifiers, cfg.order(model.num_agents())).back();
      return [last] { return std::make_unique<sim::PolicyController>(last); };
    }
    case PolicyKind::kComms: {
      comms::Resources res;
      res.base = base;
      if (spec.arch.variant == comms::Variant::kN)
        res.classifier =
            std::make_shared<const pi::PolicyClassifier>(pi::PolicyClassifier::load(spec.classifiers.front()));
      if (spec.arch.variant == comms::Variant::kPI) {
        res.pi_policies = classifier_chain(model, base, spec.classifiers, cfg.order(model.num_agents()));
        res.pi_iteration = spec.pi_iteration;
      }
      const comms::Architecture arch = spec.arch;
      return [&model, arch, res, cfg] { return std::make_unique<comms::CommsController>(model, arch, res, cfg); };
    }
    default: {
      const sim::RolloutKind kind = rollout_kind(spec.kind);
      return [&model, base, cfg, kind] { return std::make_unique<sim::RolloutController>(model, base, cfg, kind); };
    }
  }
}

Summary summarize(const std::vector<StateResult>& states) {
  Summary s;
  s.n = states.size();
  if (states.empty()) return s;
  double sum = 0.0, osc = 0.0, secs = 0.0;
  std::uint64_t q = 0, stages = 0;
  s.min = s.max = states.front().cost;
  for (const auto& r : states) {
    sum += r.cost;
    osc += r.oscillation;
    secs += r.seconds;
    q += r.q_factor_evaluations;
    stages += static_cast<std::uint64_t>(r.stages);
    s.min = std::min(s.min, r.cost);
    s.max = std::max(s.max, r.cost);
  }
  const double n = static_cast<double>(s.n);
  s.mean = sum / n;
  if (s.n > 1) {
    double ss = 0.0;
    for (const auto& r : states) ss += (r.cost - s.mean) * (r.cost - s.mean);
    s.stderr_mean = std::sqrt(ss / (n - 1.0) / n);
  }
  s.oscillation = osc / n;
  if (stages > 0) {
    s.q_per_stage = static_cast<double>(q) / static_cast<double>(stages);
    s.seconds_per_stage = secs / static_cast<double>(stages);
  }
  return s;
}

std::vector<double> PolicyResult::costs() const {
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s.cost);
  return out;
}

const PolicyResult& ExperimentResult::at(const std::string& id) const {
  for (const auto& p : policies)
    if (p.id == id) return p;
  throw std::out_of_range("no policy with id " + id);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const repair::RepairModel& model,
                                const Progress& progress) {
  const auto start = std::chrono::steady_clock::now();
  const auto base = std::make_shared<const policy::GreedyPolicy>(model);
  const repair::InitialDamage init{config.instance.p_damaged};
  const std::size_t n = config.evaluation.states;
  const std::uint64_t root = config.evaluation.seed;

  ExperimentResult out;
  std::vector<sim::ControllerFactory> factories;
  for (const auto& spec : config.policies) {
    factories.push_back(make_factory(model, base, spec, config.rollout));
    out.policies.push_back({spec.id, std::vector<StateResult>(n), {}});
  }
  std::vector<repair::InitialCondition> initial;
  initial.reserve(n);
  for (std::size_t i = 0; i < n; ++i) initial.push_back(sim::initial_condition(model, init, root, i));

  const std::size_t total = n * factories.size();
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  parallel_for(total, config.evaluation.workers, [&](std::size_t job) {
    const std::size_t p = job / n, i = job % n;
    auto controller = factories[p]();
    const sim::EpisodeResult e =
        sim::run_episode(model, *controller, initial[i], config.evaluation.horizon, sim::episode_seed(root, i));
    out.policies[p].states[i] = {e.discounted_cost, e.stages, e.q_factor_evaluations, e.oscillation, e.seconds};
    const std::size_t finished = ++done;
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(finished, total);
    }
  });
  for (auto& p : out.policies) p.summary = summarize(p.states);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const Progress& progress) {
  config.validate();
  const repair::RepairModel model = load_model(config.instance);
  return run_experiment(config, model, progress);
}

void write_results_csv(std::ostream& out, const ExperimentResult& result) {
  out << "schema_version,policy,row,state,n,cost,mean,stderr,min,max,q_per_stage,oscillation\n";
  for (const auto& p : result.policies) {
    const std::string id = quoted(p.id);
    for (std::size_t i = 0; i < p.states.size(); ++i) {
      const StateResult& s = p.states[i];
      const double q = s.stages > 0 ? static_cast<double>(s.q_factor_evaluations) / s.stages : 0.0;
      out << kCsvSchemaVersion << ',' << id << ",state," << i << ",1," << full(s.cost) << ",,,,," << full(q) << ','
          << full(s.oscillation) << '\n';
    }
    const Summary& s = p.summary;
    out << kCsvSchemaVersion << ',' << id << ",aggregate,," << s.n << ",," << two(s.mean) << ',' << two(s.stderr_mean)
        << ',' << two(s.min) << ',' << two(s.max) << ',' << full(s.q_per_stage) << ',' << full(s.oscillation)
        << '\n';
  }
}

void write_timing_csv(std::ostream& out, const ExperimentResult& result) {
  out << "schema_version,policy,state,stages,seconds,seconds_per_stage\n";
  for (const auto& p : result.policies)
    for (std::size_t i = 0; i < p.states.size(); ++i) {
      const StateResult& s = p.states[i];
      out << kCsvSchemaVersion << ',' << quoted(p.id) << ',' << i << ',' << s.stages << ',' << fmt("%.6g", s.seconds)
          << ',' << fmt("%.6g", s.stages > 0 ? s.seconds / s.stages : 0.0) << '\n';
    }
}

std::string PairedComparison::verdict(double level) const {
  if (p_lower < level) return "lower";
  if (p_upper < level) return "higher";
  return "tie";
}

PairedComparison paired_compare(const std::string& a, const std::vector<double>& cost_a, const std::string& b,
                                const std::vector<double>& cost_b) {
  if (cost_a.size() != cost_b.size() || cost_a.empty())
    throw std::invalid_argument("paired_compare: cost vectors must be non-empty and of equal length");
  PairedComparison c;
  c.a = a;
  c.b = b;
  c.n = cost_a.size();
  const double n = static_cast<double>(c.n);
  double sa = 0.0, sb = 0.0, sd = 0.0;
  for (std::size_t i = 0; i < c.n; ++i) {
    sa += cost_a[i];
    sb += cost_b[i];
    sd += cost_b[i] - cost_a[i];
  }
  c.mean_a = sa / n;
  c.mean_b = sb / n;
  c.mean_diff = sd / n;
  if (c.n > 1) {
    double ss = 0.0;
    for (std::size_t i = 0; i < c.n; ++i) {
      const double e = (cost_b[i] - cost_a[i]) - c.mean_diff;
      ss += e * e;
    }
    c.stderr_diff = std::sqrt(ss / (n - 1.0) / n);
  }
  if (c.stderr_diff > 0.0) {
    c.t = c.mean_diff / c.stderr_diff;
    const boost::math::students_t dist(n - 1.0);
    c.p_lower = boost::math::cdf(dist, c.t);
    c.p_upper = boost::math::cdf(boost::math::complement(dist, c.t));
  } else if (c.mean_diff != 0.0) {
    c.t = c.mean_diff > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    c.p_lower = c.mean_diff < 0.0 ? 0.0 : 1.0;
    c.p_upper = 1.0 - c.p_lower;
  }
  c.p_two_sided = std::min(1.0, 2.0 * std::min(c.p_lower, c.p_upper));
  return c;
}

std::vector<PairedComparison> compare_grid(const ExperimentResult& result) {
  if (result.policies.size() < 2) throw std::invalid_argument("compare_grid: need at least two policies");
  std::vector<PairedComparison> rows;
  for (std::size_t i = 0; i < result.policies.size(); ++i)
    for (std::size_t j = i + 1; j < result.policies.size(); ++j)
      rows.push_back(paired_compare(result.policies[i].id, result.policies[i].costs(), result.policies[j].id,
                                    result.policies[j].costs()));
  return rows;
}

void write_comparison_csv(std::ostream& out, const std::vector<PairedComparison>& rows, double level) {
  out << "schema_version,policy_a,policy_b,n,mean_a,mean_b,mean_diff,stderr_diff,t,p_lower,p_upper,p_two_sided,"
         "verdict\n";
  for (const auto& c : rows)
    out << kCsvSchemaVersion << ',' << quoted(c.a) << ',' << quoted(c.b) << ',' << c.n << ',' << two(c.mean_a) << ','
        << two(c.mean_b) << ',' << full(c.mean_diff) << ',' << full(c.stderr_diff) << ',' << full(c.t) << ','
        << full(c.p_lower) << ',' << full(c.p_upper) << ',' << full(c.p_two_sided) << ',' << c.verdict(level)
        << '\n';
}

std::string version_string() { return "0.1.0"; }

nlohmann::json make_manifest(const ExperimentConfig& config, const repair::RepairModel& model,
                             const ExperimentResult& result) {
  nlohmann::json summaries = nlohmann::json::array();
  for (const auto& p : result.policies)
    summaries.push_back({{"id", p.id},
                         {"n", p.summary.n},
                         {"mean", p.summary.mean},
                         {"stderr", p.summary.stderr_mean},
                         {"q_per_stage", p.summary.q_per_stage},
                         {"seconds_per_stage", p.summary.seconds_per_stage}});
  return {{"schema_version", kCsvSchemaVersion},
          {"config", config.to_json()},
          {"versions",
           {{"mapomdp", version_string()},
            {"compiler", __VERSION__},
            {"cxx_standard", __cplusplus},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"simd_kernels", std::string(simd::active().name)}}},
          {"instance",
           {{"vertices", model.num_vertices()},
            {"levels", model.levels()},
            {"agents", model.num_agents()},
            {"discount", model.discount()},
            {"max_stage_cost", model.max_stage_cost()},
            {"tail_bound", tail_bound(model.discount(), config.evaluation.horizon, model.max_stage_cost())}}},
          {"policies", std::move(summaries)},
          {"wall_seconds", result.seconds}};
}

void persist(const ExperimentConfig& config, const repair::RepairModel& model, const ExperimentResult& result) {
  auto open = [](const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    return f;
  };
  if (!config.output.csv.empty()) {
    auto f = open(config.output.csv);
    write_results_csv(f, result);
  }
  if (!config.output.timing.empty()) {
    auto f = open(config.output.timing);
    write_timing_csv(f, result);
  }
  if (!config.output.comparison.empty() && result.policies.size() >= 2) {
    auto f = open(config.output.comparison);
    write_comparison_csv(f, compare_grid(result));
  }
  if (!config.output.manifest.empty()) {
    auto f = open(config.output.manifest);
    f << make_manifest(config, model, result).dump(2) << '\n';
  }
}

}  // namespace mapomdp::harness
