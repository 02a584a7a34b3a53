#include "mapomdp/core/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mapomdp/core/error.hpp"
#include "mapomdp/simd/kernels.hpp"

namespace mapomdp {

TabularPOMDP::TabularPOMDP(int n, std::vector<int> control_counts, int num_observations,
                           std::vector<Tables> per_joint_control, double discount)
    : n_(n),
      control_counts_(std::move(control_counts)),
      nz_(num_observations),
      tables_(std::move(per_joint_control)),
      discount_(discount) {
  validate();
}

void TabularPOMDP::validate() const {
  if (n_ <= 0) throw std::invalid_argument("TabularPOMDP: n must be positive");
  if (nz_ <= 0) throw std::invalid_argument("TabularPOMDP: |Z| must be positive");
  if (control_counts_.empty()) throw std::invalid_argument("TabularPOMDP: no agents");
  std::size_t joint = 1;
  for (int c : control_counts_) {
    if (c <= 0) throw std::invalid_argument("TabularPOMDP: empty control set");
    joint *= static_cast<std::size_t>(c);
  }
  if (tables_.size() != joint)
    throw std::invalid_argument("TabularPOMDP: expected one table set per joint control");
  if (!(discount_ > 0.0 && discount_ < 1.0))
    throw std::invalid_argument("TabularPOMDP: discount must lie in (0,1)");
  const auto nn = static_cast<std::size_t>(n_);
  for (std::size_t u = 0; u < tables_.size(); ++u) {
    const Tables& t = tables_[u];
    if (t.transition.size() != nn * nn || t.cost.size() != nn * nn ||
        t.obs.size() != nn * static_cast<std::size_t>(nz_))
      throw std::invalid_argument("TabularPOMDP: table dimensions do not match n and |Z|");
    for (int i = 0; i < n_; ++i) {
      if (!is_distribution(std::span(t.transition).subspan(i * nn, nn)))
        throw std::invalid_argument("TabularPOMDP: transition row is not a distribution (u=" +
                                    std::to_string(u) + ", i=" + std::to_string(i) + ")");
      if (!is_distribution(std::span(t.obs).subspan(i * nz_, nz_)))
        throw std::invalid_argument("TabularPOMDP: observation row is not a distribution (u=" +
                                    std::to_string(u) + ", j=" + std::to_string(i) + ")");
    }
  }
}

int TabularPOMDP::joint_index(std::span<const int> u) const {
  if (u.size() != control_counts_.size())
    throw InfeasibleControl("TabularPOMDP: joint control has wrong arity");
  int index = 0;
  for (std::size_t l = 0; l < u.size(); ++l) {
    if (u[l] < 0 || u[l] >= control_counts_[l])
      throw InfeasibleControl("TabularPOMDP: control component out of range");
    index = index * control_counts_[l] + u[l];
  }
  return index;
}

std::vector<int> TabularPOMDP::joint_control(int index) const {
  std::vector<int> u(control_counts_.size());
  for (std::size_t l = u.size(); l-- > 0;) {
    u[l] = index % control_counts_[l];
    index /= control_counts_[l];
  }
  return u;
}

std::string TabularPOMDP::joint_key(std::span<const int> u) {
  std::string key;
  for (std::size_t l = 0; l < u.size(); ++l) {
    if (l) key += '_';
    key += std::to_string(u[l]);
  }
  return key;
}

std::vector<int> TabularPOMDP::control_set(const BeliefVector&, int agent) const {
  std::vector<int> out(control_counts_.at(agent));
  for (int c = 0; c < static_cast<int>(out.size()); ++c) out[c] = c;
  return out;
}

std::vector<double> TabularPOMDP::predict(const BeliefVector& b, int u) const {
  std::vector<double> next(n_, 0.0);
  simd::active().gemv_t_acc(tables_[u].transition.data(), b.probs().data(), next.data(),
                            n_, n_);
  return next;
}

std::vector<double> TabularPOMDP::observation_likelihood(const BeliefVector& b, int u) const {
  const std::vector<double> next = predict(b, u);
  std::vector<double> pz(nz_, 0.0);
  simd::active().gemv_t_acc(tables_[u].obs.data(), next.data(), pz.data(), n_, nz_);
  return pz;
}

double TabularPOMDP::expected_stage_cost(const BeliefVector& b, const std::vector<int>& u) const {
  const int ui = joint_index(u);
  const Tables& t = tables_[ui];
  const auto& k = simd::active();
  double total = 0.0;
  for (int i = 0; i < n_; ++i) {
    if (b[i] == 0.0) continue;
    total += b[i] * k.dot(t.transition.data() + i * n_, t.cost.data() + i * n_, n_);
  }
  return total;
}

void TabularPOMDP::advance_belief(BeliefVector& b, const std::vector<int>& u, int z) const {
  const int ui = joint_index(u);
  if (z < 0 || z >= nz_) throw std::out_of_range("TabularPOMDP: observation out of range");
  std::vector<double> next = predict(b, ui);
  double total = 0.0;
  for (int j = 0; j < n_; ++j) {
    next[j] *= obs_prob(j, ui, z);
    total += next[j];
  }
  if (!(total > 0.0))
    throw ImpossibleObservation("TabularPOMDP: observation " + std::to_string(z) +
                                " has zero likelihood under (b,u)");
  b = BeliefVector::normalized(std::move(next));
}

std::optional<ObservationDistribution<TabularPOMDP>> TabularPOMDP::observation_distribution(
    const BeliefVector& b, const std::vector<int>& u, std::size_t cap) const {
  const std::vector<double> pz = observation_likelihood(b, joint_index(u));
  ObservationDistribution<TabularPOMDP> out;
  for (int z = 0; z < nz_; ++z)
    if (pz[z] > 0.0) out.emplace_back(z, pz[z]);
  if (out.size() > cap) return std::nullopt;
  return out;
}

int TabularPOMDP::sample_state(const BeliefVector& b, Rng& rng) const {
  return static_cast<int>(sample_categorical(b.probs(), rng));
}

StepOutcome<TabularPOMDP> TabularPOMDP::step(int state, const std::vector<int>& u,
                                             Rng& rng) const {
  const int ui = joint_index(u);
  const Tables& t = tables_[ui];
  const int next = static_cast<int>(
      sample_categorical(std::span(t.transition).subspan(state * n_, n_), rng));
  const int z = static_cast<int>(sample_categorical(std::span(t.obs).subspan(next * nz_, nz_), rng));
  return {next, z, cost(state, ui, next)};
}

double TabularPOMDP::max_stage_cost() const {
  double g = 0.0;
  for (const Tables& t : tables_)
    for (double c : t.cost) g = std::max(g, std::abs(c));
  return g;
}

namespace {

std::vector<double> read_matrix(const nlohmann::json& m, std::size_t rows, std::size_t cols,
                                const char* what) {
  if (!m.is_array() || m.size() != rows)
    throw std::invalid_argument(std::string("TabularPOMDP JSON: bad row count in ") + what);
  std::vector<double> out;
  out.reserve(rows * cols);
  for (const auto& row : m) {
    if (!row.is_array() || row.size() != cols)
      throw std::invalid_argument(std::string("TabularPOMDP JSON: bad column count in ") + what);
    for (const auto& x : row) out.push_back(x.get<double>());
  }
  return out;
}

nlohmann::json write_matrix(const std::vector<double>& m, std::size_t rows, std::size_t cols) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t r = 0; r < rows; ++r)
    out.push_back(std::vector<double>(m.begin() + r * cols, m.begin() + (r + 1) * cols));
  return out;
}

}  // namespace

TabularPOMDP TabularPOMDP::from_json(const nlohmann::json& doc) {
  const int n = doc.at("n").get<int>();
  std::vector<int> counts;
  for (const auto& set : doc.at("controls")) counts.push_back(static_cast<int>(set.size()));
  if (counts.empty()) throw std::invalid_argument("TabularPOMDP JSON: no control sets");
  int joint = 1;
  for (int c : counts) joint *= c;

  const auto& obs = doc.at("obs");
  if (obs.empty()) throw std::invalid_argument("TabularPOMDP JSON: empty obs");
  const auto& first = obs.begin().value();
  if (!first.is_array() || first.empty())
    throw std::invalid_argument("TabularPOMDP JSON: obs matrix malformed");
  const auto nz = first.at(0).size();

  std::vector<Tables> tables(joint);
  std::vector<int> u(counts.size(), 0);
  for (int index = 0; index < joint; ++index) {
    int rem = index;
    for (std::size_t l = counts.size(); l-- > 0;) {
      u[l] = rem % counts[l];
      rem /= counts[l];
    }
    const std::string k = joint_key(u);
    tables[index].transition = read_matrix(doc.at("transition").at(k), n, n, "transition");
    tables[index].obs = read_matrix(obs.at(k), n, nz, "obs");
    tables[index].cost = read_matrix(doc.at("cost").at(k), n, n, "cost");
  }
  return TabularPOMDP(n, std::move(counts), static_cast<int>(nz), std::move(tables),
                      doc.at("discount").get<double>());
}

TabularPOMDP TabularPOMDP::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return from_json(nlohmann::json::parse(in));
}

nlohmann::json TabularPOMDP::to_json() const {
  nlohmann::json doc;
  doc["n"] = n_;
  nlohmann::json controls = nlohmann::json::array();
  for (int c : control_counts_) {
    std::vector<int> labels(c);
    for (int i = 0; i < c; ++i) labels[i] = i;
    controls.push_back(labels);
  }
  doc["controls"] = controls;
  for (int ui = 0; ui < num_joint_controls(); ++ui) {
    const std::string k = joint_key(joint_control(ui));
    doc["transition"][k] = write_matrix(tables_[ui].transition, n_, n_);
    doc["obs"][k] = write_matrix(tables_[ui].obs, n_, nz_);
    doc["cost"][k] = write_matrix(tables_[ui].cost, n_, n_);
  }
  doc["discount"] = discount_;
  return doc;
}

}  // namespace mapomdp
