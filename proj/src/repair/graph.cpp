#include "mapomdp/repair/graph.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <stdexcept>

#include "mapomdp/core/rng.hpp"

namespace mapomdp::repair {

RepairGraph::RepairGraph(int vertices, const std::vector<Edge>& edges,
                         std::optional<std::vector<std::pair<double, double>>> layout)
    : adjacency_(vertices > 0 ? vertices : 0), layout_(std::move(layout)) {
  if (vertices <= 0) throw std::invalid_argument("RepairGraph: need at least one vertex");
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= vertices || b >= vertices)
      throw std::invalid_argument("RepairGraph: edge endpoint out of range");
    if (a == b) throw std::invalid_argument("RepairGraph: self-loop at vertex " + std::to_string(a));
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }
  for (auto& adj : adjacency_) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  if (layout_ && static_cast<int>(layout_->size()) != vertices)
    throw std::invalid_argument("RepairGraph: layout size does not match vertex count");

  std::vector<char> seen(vertices, 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop();
    for (int w : adjacency_[v])
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        frontier.push(w);
      }
  }
  if (reached != vertices) throw std::invalid_argument("RepairGraph: graph is not connected");
}

bool RepairGraph::adjacent(int a, int b) const {
  const auto& adj = adjacency_.at(a);
  return std::binary_search(adj.begin(), adj.end(), b);
}

std::vector<RepairGraph::Edge> RepairGraph::edges() const {
  std::vector<Edge> out;
  for (int a = 0; a < num_vertices(); ++a)
    for (int b : adjacency_[a])
      if (a < b) out.emplace_back(a, b);
  return out;
}

RepairGraph RepairGraph::from_json(const nlohmann::json& doc) {
  const int n = doc.at("vertices").get<int>();
  std::vector<Edge> edges;
  for (const auto& e : doc.at("edges")) {
    if (!e.is_array() || e.size() != 2)
      throw std::invalid_argument("RepairGraph JSON: each edge must be [a, b]");
    edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  std::optional<std::vector<std::pair<double, double>>> layout;
  if (doc.contains("layout") && !doc["layout"].is_null()) {
    layout.emplace();
    for (const auto& p : doc["layout"]) layout->emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  }
  return RepairGraph(n, edges, std::move(layout));
}

RepairGraph RepairGraph::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file " + path);
  return from_json(nlohmann::json::parse(in));
}

nlohmann::json RepairGraph::to_json() const {
  nlohmann::json doc;
  doc["vertices"] = num_vertices();
  nlohmann::json edges = nlohmann::json::array();
  for (auto [a, b] : this->edges()) edges.push_back({a, b});
  doc["edges"] = edges;
  if (layout_) {
    nlohmann::json layout = nlohmann::json::array();
    for (auto [x, y] : *layout_) layout.push_back({x, y});
    doc["layout"] = layout;
  }
  return doc;
}

RepairGraph RepairGraph::path(int n) {
  std::vector<Edge> edges;
  for (int v = 0; v + 1 < n; ++v) edges.emplace_back(v, v + 1);
  return RepairGraph(n, edges);
}

RepairGraph RepairGraph::cycle(int n) {
  std::vector<Edge> edges;
  for (int v = 0; v < n; ++v) edges.emplace_back(v, (v + 1) % n);
  return RepairGraph(n, edges);
}

namespace {

std::vector<RepairGraph::Edge> grid_edges(int rows, int cols) {
  std::vector<RepairGraph::Edge> edges;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const int v = r * cols + c;
      if (c + 1 < cols) edges.emplace_back(v, v + 1);
      if (r + 1 < rows) edges.emplace_back(v, v + cols);
    }
  return edges;
}

std::vector<std::pair<double, double>> grid_layout(int rows, int cols) {
  std::vector<std::pair<double, double>> layout;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) layout.emplace_back(c, r);
  return layout;
}

}  // namespace

RepairGraph RepairGraph::grid(int rows, int cols) {
  return RepairGraph(rows * cols, grid_edges(rows, cols), grid_layout(rows, cols));
}

RepairGraph RepairGraph::grid_with_chords(int rows, int cols, int chords, std::uint64_t seed) {
  const int n = rows * cols;
  RepairGraph base = grid(rows, cols);
  std::vector<Edge> edges = base.edges();
  Rng rng = make_rng(seed);
  int added = 0;
  int attempts = 0;
  while (added < chords) {
    if (++attempts > 100000) throw std::runtime_error("grid_with_chords: cannot place chords");
    const int a = static_cast<int>(uniform_index(rng, n));
    const int b = static_cast<int>(uniform_index(rng, n));
    if (a == b) continue;
    const Edge e{std::min(a, b), std::max(a, b)};
    if (std::find(edges.begin(), edges.end(), e) != edges.end()) continue;
    edges.push_back(e);
    ++added;
  }
  return RepairGraph(n, edges, grid_layout(rows, cols));
}

RepairGraph benchmark_graph() { return RepairGraph::grid_with_chords(4, 8, 8, 32); }

RepairGraph desk_graph() { return RepairGraph::grid_with_chords(3, 4, 2, 12); }

}  // namespace mapomdp::repair
