#pragma once

#include <vector>

#include "mapomdp/repair/graph.hpp"

namespace mapomdp::policy {

// All-pairs hop distances and first hops on a shortest path. Among
// equal-length paths the first hop is the lowest-index neighbor.
class ShortestPathTable {
 public:
  explicit ShortestPathTable(const repair::RepairGraph& graph);

  int size() const { return n_; }
  int dist(int from, int to) const { return dist_[from * n_ + to]; }
  // next_hop(v, v) == v
  int next_hop(int from, int to) const { return next_[from * n_ + to]; }
  int diameter() const { return diameter_; }

 private:
  int n_;
  int diameter_ = 0;
  std::vector<int> dist_;
  std::vector<int> next_;
};

}  // namespace mapomdp::policy
