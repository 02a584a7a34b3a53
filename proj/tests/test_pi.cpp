#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "mapomdp/pi/classifier.hpp"
#include "mapomdp/pi/features.hpp"
#include "mapomdp/pi/iteration.hpp"
#include "mapomdp/pi/policy.hpp"
#include "mapomdp/policy/greedy.hpp"
#include "mapomdp/rollout/rollout.hpp"
#include "repair_support.hpp"

using namespace mapomdp;
using namespace mapomdp::pi;
using repair::RepairAction;

namespace {

Dataset random_dataset(Rng& rng, int dim, int classes, int n) {
  Dataset d(dim);
  std::vector<double> x(dim);
  for (int i = 0; i < n; ++i) {
    for (double& v : x) v = 2.0 * uniform01(rng) - 1.0;
    d.add(x, static_cast<int>(uniform_index(rng, classes)));
  }
  return d;
}

// Central differences on every parameter.
void gradient_check(PolicyClassifier& c, const Dataset& data, bool training) {
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<double> grad;
  c.loss(data, rows, training, &grad);
  auto params = c.parameters();
  const double h = 1e-6;
  double worst = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    const double keep = params[p];
    params[p] = keep + h;
    const double up = c.loss(data, rows, training);
    params[p] = keep - h;
    const double down = c.loss(data, rows, training);
    params[p] = keep;
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max({std::abs(numeric), std::abs(grad[p]), 1e-4});
    worst = std::max(worst, std::abs(numeric - grad[p]) / scale);
  }
  CHECK(worst <= 1e-4);
}

const repair::RepairModel& desk() {
  static const repair::RepairModel m(repair::desk_graph(), repair::desk_chain(), 2, 0.95);
  return m;
}

}  // namespace

TEST_SUITE("features") {
  TEST_CASE("dimension formula") {
    CHECK(feature_dim(12, 3, 2) == 12 * 3 + 2 * 12 + 2 + 2 * 14);
    CHECK(feature_dim(32, 5, 4) == 32 * 5 + 4 * 32 + 4 + 4 * 34);
    CHECK(feature_dim(desk()) == 90);
  }

  TEST_CASE("layout, determinism and locality") {
    Rng rng(81);
    const auto& m = desk();
    auto b = testing::random_factored_belief(m, rng);
    b.agent_locations = {0, 5};
    const std::vector<RepairAction> u{RepairAction::move(1), RepairAction::fix()};
    const std::vector<int> order{0, 1};
    const auto x = encode_features(m, b, 1, u, order);
    CHECK(x == encode_features(m, b, 1, u, order));
    const std::size_t loc = 36, idx = loc + 24, slots = idx + 2;
    CHECK(std::equal(b.damage.begin(), b.damage.end(), x.begin()));
    CHECK(x[loc + 0] == 1.0);
    CHECK(x[loc + 12 + 5] == 1.0);
    CHECK(x[idx + 1] == 1.0);
    CHECK(x[idx + 0] == 0.0);
    CHECK(x[slots + 2] == 1.0);   // agent 0's Move(1) is class 2
    CHECK(x[slots + 13] == 1.0);  // agent 0 is a predecessor
    for (std::size_t i = slots + 14; i < x.size(); ++i) CHECK(x[i] == 0.0);  // own slot

    const auto x0 = encode_features(m, b, 0, u, order);
    CHECK(x0[slots + 14 + 0] == 1.0);  // agent 1's Fix
    CHECK(x0[slots + 14 + 13] == 0.0);  // agent 1 is a successor

    auto b2 = b;
    b2.d(7)[0] = 0.25;
    b2.d(7)[1] = 0.5;
    b2.d(7)[2] = 0.25;
    const auto y = encode_features(m, b2, 1, u, order);
    for (std::size_t i = 0; i < x.size(); ++i)
      if (i < 21 || i >= 24) CHECK(x[i] == y[i]);
  }
}

TEST_SUITE("classifier") {
  TEST_CASE("softmax outputs are distributions") {
    Rng rng(82);
    const PolicyClassifier c({20, {16, 8}, 13}, 1);
    for (int k = 0; k < 100; ++k) {
      std::vector<double> x(20);
      for (double& v : x) v = 10 * (uniform01(rng) - 0.5);
      const auto p = c.predict_proba(x);
      CHECK(p.size() == 13);
      CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) <= 1e-6);
    }
  }

  TEST_CASE("gradient check in training mode") {
    Rng rng(83);
    for (int trial = 0; trial < 3; ++trial) {
      PolicyClassifier c({7, {6, 5}, 4}, 10 + trial);
      for (double& p : c.parameters()) p += 0.1 * (uniform01(rng) - 0.5);
      gradient_check(c, random_dataset(rng, 7, 4, 10), true);
    }
  }

  TEST_CASE("gradient check in inference mode") {
    Rng rng(84);
    for (int trial = 0; trial < 3; ++trial) {
      PolicyClassifier c({7, {6, 5}, 4}, 20 + trial);
      for (double& v : c.running_mean()) v = uniform01(rng);
      for (double& v : c.running_var()) v = 0.5 + uniform01(rng);
      gradient_check(c, random_dataset(rng, 7, 4, 10), false);
    }
  }

  TEST_CASE("gradient check on the paper-shaped network") {
    Rng rng(85);
    PolicyClassifier c({90, {256, 64}, 13}, 3);
    Dataset data = random_dataset(rng, 90, 13, 10);
    std::vector<std::size_t> rows(10);
    std::iota(rows.begin(), rows.end(), 0);
    std::vector<double> grad;
    c.loss(data, rows, true, &grad);
    auto params = c.parameters();
    double worst = 0.0;
    for (int k = 0; k < 300; ++k) {
      const std::size_t p = uniform_index(rng, params.size());
      const double keep = params[p];
      params[p] = keep + 1e-6;
      const double up = c.loss(data, rows, true);
      params[p] = keep - 1e-6;
      const double down = c.loss(data, rows, true);
      params[p] = keep;
      const double numeric = (up - down) / 2e-6;
      worst = std::max(worst, std::abs(numeric - grad[p]) / std::max({std::abs(numeric), std::abs(grad[p]), 1e-4}));
    }
    CHECK(worst <= 1e-4);
  }

  TEST_CASE("memorizes a single repeated sample") {
    Rng rng(86);
    Dataset one(12);
    std::vector<double> x(12);
    for (double& v : x) v = uniform01(rng);
    for (int k = 0; k < 64; ++k) one.add(x, 3);
    PolicyClassifier c({12, {16, 8}, 5}, 4);
    TrainConfig cfg;
    cfg.epochs = 50;
    const auto report = c.train(one, cfg, 1);
    CHECK(report.train_accuracy == 1.0);
    CHECK(report.epochs_run <= 50);
  }

  TEST_CASE("separates two disjoint boxes") {
    Rng rng(87);
    Dataset data(6);
    std::vector<double> x(6);
    for (int i = 0; i < 2000; ++i) {
      const int label = i % 2;
      for (double& v : x) v = uniform01(rng);
      x[0] = label ? 1.2 + uniform01(rng) : -0.2 - uniform01(rng);
      data.add(x, label);
    }
    PolicyClassifier c({6, {16, 8}, 2}, 5);
    TrainConfig cfg;
    cfg.epochs = 30;
    c.train(data, cfg, 2);
    CHECK(c.accuracy(data) >= 0.99);
  }

  TEST_CASE("single-class data trains without error") {
    Rng rng(88);
    Dataset d(5);
    std::vector<double> x(5);
    for (int i = 0; i < 300; ++i) {
      for (double& v : x) v = uniform01(rng);
      d.add(x, 0);
    }
    PolicyClassifier c({5, {8}, 3}, 6);
    TrainReport report;
    CHECK_NOTHROW(report = c.train(d, {}, 3));
    CHECK(report.epoch_loss.back() < report.epoch_loss.front());
  }

  TEST_CASE("training is deterministic per seed") {
    Rng rng(89);
    const Dataset d = random_dataset(rng, 8, 3, 500);
    PolicyClassifier a({8, {10, 6}, 3}, 7), b({8, {10, 6}, 3}, 7);
    TrainConfig cfg;
    cfg.epochs = 3;
    a.train(d, cfg, 9);
    b.train(d, cfg, 9);
    CHECK(std::equal(a.parameters().begin(), a.parameters().end(), b.parameters().begin()));
  }

  TEST_CASE("binary round trip and JSON export") {
    Rng rng(90);
    PolicyClassifier c({9, {7, 5}, 4}, 8);
    c.train(random_dataset(rng, 9, 4, 200), {}, 1);
    std::stringstream buffer;
    c.write(buffer);
    const auto bytes = buffer.str();
    CHECK(bytes.substr(0, 4) == "MAPC");
    const PolicyClassifier back = PolicyClassifier::read(buffer);
    std::vector<double> x(9, 0.3);
    CHECK(back.logits(x) == c.logits(x));
    CHECK(back.train_accuracy() == c.train_accuracy());
    const auto doc = c.to_json();
    CHECK(doc["dims"] == nlohmann::json({9, 7, 5, 4}));
    CHECK(doc["layers"].size() == 3);
    CHECK(doc["batch_norm"]["gamma"].size() == 5);

    std::stringstream bad("XXXX");
    CHECK_THROWS(PolicyClassifier::read(bad));
    std::stringstream truncated(bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS(PolicyClassifier::read(truncated));
  }
}

TEST_SUITE("inference") {
  TEST_CASE("adversarial output on an infeasible move still yields a feasible component") {
    const auto& m = desk();
    const int out = m.num_vertices() + 1;
    PolicyClassifier c({static_cast<int>(feature_dim(m)), {8, 4}, out}, 1);
    auto p = c.parameters();
    std::fill(p.begin(), p.end(), 0.0);
    Rng rng(91);
    for (int trial = 0; trial < 50; ++trial) {
      const auto b = testing::random_factored_belief(m, rng);
      int bad = 0;
      while (m.feasible(b.agent_locations[0], RepairAction::from_class(bad))) ++bad;
      std::fill(p.end() - out, p.end(), 0.0);
      p[p.size() - out + bad] = 100.0;
      const auto u = infer_control(c, m, b, {RepairAction::fix(), RepairAction::fix()}, std::vector{0, 1});
      for (int l = 0; l < 2; ++l) CHECK(m.feasible(b.agent_locations[l], u[l]));
    }
  }

  TEST_CASE("uniform output picks the lowest feasible class") {
    const auto& m = desk();
    std::vector<double> scores(m.num_vertices() + 1, 0.5);
    CHECK(masked_argmax(m, 3, scores) == RepairAction::fix());
    scores[0] = -1.0;
    const auto a = masked_argmax(m, 3, scores);
    CHECK(a.target() == m.graph().neighbors(3).front());
  }
}

TEST_SUITE("samples") {
  TEST_CASE("q*m samples whose labels are the rollout components") {
    const repair::RepairModel m(repair::desk_graph(), repair::desk_chain(), 4, 0.95);
    const auto base = std::make_shared<policy::GreedyPolicy>(m);
    BufferConfig bc;
    bc.size = 20;
    const std::vector<RepairPolicyPtr> prev{base};
    const auto buffer = MemoryBuffer::build(m, prev, bc, 5);
    for (std::size_t i = 0; i < buffer.size(); ++i) CHECK_NOTHROW(m.validate(buffer[i]));
    rollout::RolloutConfig cfg;
    cfg.truncation = 3;
    cfg.n_traj = 3;
    const auto one = generate_samples(m, *base, cfg, 1, buffer, 11);
    CHECK(one.size() == 4);
    const auto data = generate_samples(m, *base, cfg, 6, buffer, 11);
    CHECK(data.size() == 24);
    CHECK(data.features.size() == 24 * feature_dim(m));

    // Recompute each label from the same belief and seed.
    const TerminalCost<repair::RepairModel> terminal = [&m](const auto& b) { return m.terminal_cost(b); };
    for (std::size_t s = 0; s < 6; ++s) {
      Rng rng = make_rng(derive_seed(11, {key(Stream::kPolicy), s}));
      const auto& b = buffer[uniform_index(rng, buffer.size())];
      const auto d = rollout::one_at_a_time_control(m, b, *base, cfg, terminal, sample_seed(11, s));
      for (int l = 0; l < 4; ++l) CHECK(data.labels[s * 4 + l] == d.control[l].class_index());
    }
    CHECK(generate_samples(m, *base, cfg, 6, buffer, 11, 3).features == data.features);
    CHECK_THROWS(generate_samples(m, *base, cfg, 1, MemoryBuffer{}, 1));
  }

  TEST_CASE("randomized histories collapse vertices away from the agents") {
    const auto& m = desk();
    const std::vector<RepairPolicyPtr> prev{std::make_shared<policy::GreedyPolicy>(m)};
    BufferConfig bc;
    bc.size = 200;
    bc.walk_length = 0;
    auto collapsed_elsewhere = [&](const MemoryBuffer& buf) {
      int count = 0;
      for (std::size_t i = 0; i < buf.size(); ++i) {
        m.validate(buf[i]);
        const auto& b = buf[i];
        for (int v = 0; v < m.num_vertices(); ++v) {
          const bool at_agent = std::find(b.agent_locations.begin(), b.agent_locations.end(), v) != b.agent_locations.end();
          const auto d = b.d(v);
          count += !at_agent && std::find(d.begin(), d.end(), 1.0) != d.end();
        }
      }
      return count;
    };
    CHECK(collapsed_elsewhere(MemoryBuffer::build(m, prev, bc, 3)) > 0);
    bc.history_share = 0.0;
    CHECK(collapsed_elsewhere(MemoryBuffer::build(m, prev, bc, 3)) == 0);
  }

  TEST_CASE("pi_iterate bookkeeping and reproducibility") {
    const auto& m = desk();
    const auto base = std::make_shared<policy::GreedyPolicy>(m);
    PiConfig cfg;
    cfg.iterations = 2;
    cfg.beliefs_per_iteration = 20;
    cfg.rollout.truncation = 2;
    cfg.rollout.n_traj = 2;
    cfg.hidden = {16, 8};
    cfg.train.epochs = 2;
    cfg.buffer.size = 20;
    cfg.eval_states = 4;
    cfg.eval_horizon = 20;
    const auto a = pi_iterate(m, base, cfg, 42);
    CHECK(a.cost_trace.size() == 3);
    CHECK(a.iterations.size() == 2);
    CHECK(a.iterations[0].samples == 40);
    const auto b = pi_iterate(m, base, cfg, 42);
    CHECK(a.cost_trace == b.cost_trace);

    cfg.beliefs_schedule = {7};
    const auto c = pi_iterate(m, base, cfg, 42);
    CHECK(c.iterations[0].samples == 14);
    CHECK(c.iterations[1].samples == 40);

    Rng rng(92);
    for (int k = 0; k < 50; ++k) {
      const auto belief = testing::random_factored_belief(m, rng);
      const auto u = a.policies.back()->act(belief);
      for (int l = 0; l < 2; ++l) CHECK(m.feasible(belief.agent_locations[l], u[l]));
    }
  }
}
