#include "mapomdp/policy/shortest_paths.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace mapomdp::policy {

// Unit edge weights, so Dijkstra reduces to one breadth-first sweep per
// target. Sweeping from the target gives dist(., t); the next hop from s is
// then the lowest-index neighbor w of s with dist(w, t) = dist(s, t) - 1.
ShortestPathTable::ShortestPathTable(const repair::RepairGraph& graph)
    : n_(graph.num_vertices()), dist_(n_ * n_, -1), next_(n_ * n_, -1) {
  std::deque<int> queue;
  for (int t = 0; t < n_; ++t) {
    queue.clear();
    dist_[t * n_ + t] = 0;
    queue.push_back(t);
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (int w : graph.neighbors(v)) {
        if (dist_[w * n_ + t] >= 0) continue;
        dist_[w * n_ + t] = dist_[v * n_ + t] + 1;
        queue.push_back(w);
      }
    }
  }
  for (int s = 0; s < n_; ++s)
    for (int t = 0; t < n_; ++t) {
      const int d = dist_[s * n_ + t];
      if (d < 0) throw std::invalid_argument("ShortestPathTable: graph is disconnected");
      diameter_ = std::max(diameter_, d);
      if (s == t) {
        next_[s * n_ + t] = s;
        continue;
      }
      for (int w : graph.neighbors(s))  // sorted ascending
        if (dist_[w * n_ + t] == d - 1) {
          next_[s * n_ + t] = w;
          break;
        }
    }
}

}  // namespace mapomdp::policy
