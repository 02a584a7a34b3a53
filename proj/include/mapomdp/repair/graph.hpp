#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace mapomdp::repair {

// Undirected, connected location graph. Adjacency lists are sorted.
class RepairGraph {
 public:
  using Edge = std::pair<int, int>;

  // Validates: indices in range, no self-loops, connected. Duplicate edges
  // are merged.
  RepairGraph(int vertices, const std::vector<Edge>& edges,
              std::optional<std::vector<std::pair<double, double>>> layout = std::nullopt);

  static RepairGraph from_json(const nlohmann::json& doc);
  static RepairGraph load(const std::string& path);
  nlohmann::json to_json() const;

  int num_vertices() const { return static_cast<int>(adjacency_.size()); }
  const std::vector<int>& neighbors(int v) const { return adjacency_.at(v); }
  int degree(int v) const { return static_cast<int>(adjacency_.at(v).size()); }
  bool adjacent(int a, int b) const;
  std::vector<Edge> edges() const;
  const std::optional<std::vector<std::pair<double, double>>>& layout() const { return layout_; }

  // Generators
  static RepairGraph path(int n);
  static RepairGraph cycle(int n);
  static RepairGraph grid(int rows, int cols);
  // rows x cols grid plus `chords` extra edges between random non-adjacent
  // vertex pairs drawn from `seed`.
  static RepairGraph grid_with_chords(int rows, int cols, int chords, std::uint64_t seed);

 private:
  std::vector<std::vector<int>> adjacency_;
  std::optional<std::vector<std::pair<double, double>>> layout_;
};

// 32-vertex benchmark: 4x8 grid plus 8 seed-fixed chords.
RepairGraph benchmark_graph();
// 12-vertex desk-scale graph: 3x4 grid plus 2 seed-fixed chords.
RepairGraph desk_graph();

}  // namespace mapomdp::repair
