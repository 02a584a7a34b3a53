#include "mapomdp/harness/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mapomdp::harness {

namespace {

using nlohmann::json;

const std::pair<const char*, PolicyKind> kKinds[] = {
    {"base", PolicyKind::kBase},
    {"one-at-a-time", PolicyKind::kOneAtATime},
    {"standard", PolicyKind::kStandard},
    {"order-optimized", PolicyKind::kOrderOptimized},
    {"multistep", PolicyKind::kMultistep},
    {"classifier", PolicyKind::kClassifier},
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string part; std::getline(in, part, sep);)
    if (!part.empty()) out.push_back(part);
  return out;
}

std::string kind_tag(const PolicySpec& p) {
  if (p.kind == PolicyKind::kComms) return p.arch.name();
  for (const auto& [tag, kind] : kKinds)
    if (kind == p.kind) return tag;
  return "?";
}

json rollout_json(const rollout::RolloutConfig& r) {
  return {{"lookahead", r.lookahead},         {"truncation", r.truncation},
          {"trajectories", r.n_traj},          {"obs_branch", r.obs_branch},
          {"agent_order", r.agent_order},      {"obs_enum_cap", r.obs_enum_cap},
          {"joint_cap", r.joint_cap},          {"tree_cap", r.tree_cap}};
}

template <class T>
void read(const json& doc, const char* name, T& into) {
  if (doc.contains(name)) into = doc.at(name).get<T>();
}

void check_known(const json& doc, std::initializer_list<const char*> keys, const std::string& where) {
  if (!doc.is_object()) throw std::invalid_argument(where + " must be an object");
  for (const auto& [k, v] : doc.items()) {
    bool ok = false;
    for (const char* key : keys) ok |= k == key;
    if (!ok) throw std::invalid_argument("unknown key '" + k + "' in " + where);
  }
}

}  // namespace

PolicySpec PolicySpec::parse(const std::string& text, int radius, double rho) {
  PolicySpec spec;
  const auto colon = text.find(':');
  const std::string tag = text.substr(0, colon);
  const std::vector<std::string> files = colon == std::string::npos ? std::vector<std::string>{}
                                                                      : split(text.substr(colon + 1), ',');
  bool found = false;
  for (const auto& [name, kind] : kKinds)
    if (tag == name) {
      spec.kind = kind;
      found = true;
    }
  if (!found) {
    spec.kind = PolicyKind::kComms;
    spec.arch = comms::Architecture::parse(tag, radius, rho);
  }
  spec.classifiers = files;
  const bool wants_files = spec.kind == PolicyKind::kClassifier ||
                           (spec.kind == PolicyKind::kComms &&
                            (spec.arch.variant == comms::Variant::kN || spec.arch.variant == comms::Variant::kPI));
  if (wants_files && files.empty()) throw std::invalid_argument("policy '" + tag + "' needs classifier files");
  if (!wants_files && !files.empty()) throw std::invalid_argument("policy '" + tag + "' takes no files");
  if (spec.kind == PolicyKind::kComms && spec.arch.variant == comms::Variant::kN && files.size() != 1)
    throw std::invalid_argument("amr-n takes exactly one classifier file");
  if (spec.kind == PolicyKind::kComms && spec.arch.variant == comms::Variant::kPI && files.size() < 2)
    throw std::invalid_argument("amr-pi needs at least two classifier iterations");
  spec.id = default_id(spec);
  return spec;
}

std::string PolicySpec::default_id(const PolicySpec& p) {
  std::string id = kind_tag(p);
  if (p.kind != PolicyKind::kComms) return id;
  std::ostringstream extra;
  switch (p.arch.variant) {
    case comms::Variant::kLC: extra << "[r=" << p.arch.radius << "]"; break;
    case comms::Variant::kILC: extra << "[rho=" << p.arch.rho << ",r=" << p.arch.radius << "]"; break;
    case comms::Variant::kIB1:
    case comms::Variant::kIB0: extra << "[rho=" << p.arch.rho << "]"; break;
    default: break;
  }
  return id + extra.str();
}

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  check_known(doc, {"instance", "policies", "rollout", "evaluation", "output"}, "config");
  ExperimentConfig c;
  if (doc.contains("instance")) {
    const json& in = doc.at("instance");
    check_known(in, {"graph", "chain", "agents", "discount", "p_damaged", "terminating"}, "instance");
    read(in, "graph", c.instance.graph);
    read(in, "chain", c.instance.chain);
    read(in, "agents", c.instance.agents);
    read(in, "discount", c.instance.discount);
    read(in, "p_damaged", c.instance.p_damaged);
    read(in, "terminating", c.instance.terminating);
  }
  if (doc.contains("rollout")) {
    const json& r = doc.at("rollout");
    check_known(r, {"lookahead", "truncation", "trajectories", "obs_branch", "agent_order", "obs_enum_cap",
                    "joint_cap", "tree_cap"},
                "rollout");
    read(r, "lookahead", c.rollout.lookahead);
    read(r, "truncation", c.rollout.truncation);
    read(r, "trajectories", c.rollout.n_traj);
    read(r, "obs_branch", c.rollout.obs_branch);
    read(r, "agent_order", c.rollout.agent_order);
    read(r, "obs_enum_cap", c.rollout.obs_enum_cap);
    read(r, "joint_cap", c.rollout.joint_cap);
    read(r, "tree_cap", c.rollout.tree_cap);
  }
  if (doc.contains("evaluation")) {
    const json& e = doc.at("evaluation");
    check_known(e, {"states", "horizon", "seed", "workers"}, "evaluation");
    read(e, "states", c.evaluation.states);
    read(e, "horizon", c.evaluation.horizon);
    read(e, "seed", c.evaluation.seed);
    read(e, "workers", c.evaluation.workers);
  }
  if (doc.contains("output")) {
    const json& o = doc.at("output");
    check_known(o, {"csv", "manifest", "timing", "comparison"}, "output");
    read(o, "csv", c.output.csv);
    read(o, "manifest", c.output.manifest);
    read(o, "timing", c.output.timing);
    read(o, "comparison", c.output.comparison);
  }
  if (doc.contains("policies")) {
    for (const json& p : doc.at("policies")) {
      if (p.is_string()) {
        c.policies.push_back(PolicySpec::parse(p.get<std::string>()));
        continue;
      }
      check_known(p, {"policy", "id", "radius", "rho", "iteration"}, "policy");
      PolicySpec spec = PolicySpec::parse(p.at("policy").get<std::string>(), p.value("radius", 1), p.value("rho", 1.0));
      read(p, "iteration", spec.pi_iteration);
      if (p.contains("id")) spec.id = p.at("id").get<std::string>();
      c.policies.push_back(std::move(spec));
    }
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  return from_json(json::parse(in));
}

json ExperimentConfig::to_json() const {
  json policies_json = json::array();
  for (const auto& p : policies) {
    std::string text = kind_tag(p);
    for (std::size_t i = 0; i < p.classifiers.size(); ++i) text += (i ? "," : ":") + p.classifiers[i];
    json entry{{"id", p.id}, {"policy", text}};
    if (p.kind == PolicyKind::kComms) {
      entry["radius"] = p.arch.radius;
      entry["rho"] = p.arch.rho;
    }
    if (p.pi_iteration >= 0) entry["iteration"] = p.pi_iteration;
    policies_json.push_back(std::move(entry));
  }
  return {{"instance",
           {{"graph", instance.graph},
            {"chain", instance.chain},
            {"agents", instance.agents},
            {"discount", instance.discount},
            {"p_damaged", instance.p_damaged},
            {"terminating", instance.terminating}}},
          {"policies", std::move(policies_json)},
          {"rollout", rollout_json(rollout)},
          {"evaluation",
           {{"states", evaluation.states},
            {"horizon", evaluation.horizon},
            {"seed", evaluation.seed},
            {"workers", evaluation.workers}}},
          {"output",
           {{"csv", output.csv}, {"manifest", output.manifest}, {"timing", output.timing},
            {"comparison", output.comparison}}}};
}

void ExperimentConfig::validate() const {
  if (instance.agents < 1) throw std::invalid_argument("instance.agents must be >= 1");
  if (!(instance.discount > 0.0 && instance.discount < 1.0)) throw std::invalid_argument("instance.discount must be in (0,1)");
  if (!(instance.p_damaged >= 0.0 && instance.p_damaged <= 1.0)) throw std::invalid_argument("instance.p_damaged must be in [0,1]");
  for (const std::string* src : {&instance.graph, &instance.chain})
    if (src->rfind("builtin:", 0) != 0 && !std::filesystem::exists(*src))
      throw std::invalid_argument("instance file not found: " + *src);
  rollout.validate(instance.agents);
  if (evaluation.states < 1) throw std::invalid_argument("evaluation.states must be >= 1");
  if (evaluation.horizon < 0) throw std::invalid_argument("evaluation.horizon must be >= 0");
  if (evaluation.workers < 1) throw std::invalid_argument("evaluation.workers must be >= 1");
  if (policies.empty()) throw std::invalid_argument("no policies given");
  std::set<std::string> ids;
  for (const auto& p : policies) {
    if (!ids.insert(p.id).second) throw std::invalid_argument("duplicate policy id: " + p.id);
    p.arch.validate();
    for (const auto& f : p.classifiers)
      if (!std::filesystem::exists(f)) throw std::invalid_argument("classifier file not found: " + f);
  }
}

repair::RepairGraph load_graph(const std::string& source) {
  if (source == "builtin:desk") return repair::desk_graph();
  if (source == "builtin:benchmark") return repair::benchmark_graph();
  return repair::RepairGraph::load(source);
}

repair::DamageChain load_chain(const std::string& source, bool terminating) {
  repair::DamageChain chain = source == "builtin:desk"        ? repair::desk_chain()
                              : source == "builtin:benchmark" ? repair::benchmark_chain()
                                                              : repair::DamageChain::load(source);
  if (!terminating) return chain;
  return repair::DamageChain(std::vector<double>(chain.gammas().size(), 0.0), chain.cost());
}

repair::RepairModel load_model(const InstanceConfig& instance) {
  return repair::RepairModel(load_graph(instance.graph), load_chain(instance.chain, instance.terminating),
                             instance.agents, instance.discount);
}

}  // namespace mapomdp::harness
