#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mapomdp/repair/model.hpp"

namespace mapomdp::pi {

// Layout, in order:
//   d^v for every v                      |V| * nu
//   one-hot location per agent           m * |V|
//   one-hot index of the deciding agent  m
//   per agent slot: one-hot class over |V|+1, then a predecessor flag
//                                        m * (|V| + 2)
// The deciding agent's own slot is left at zero.
std::size_t feature_dim(int vertices, int levels, int agents);
std::size_t feature_dim(const repair::RepairModel& model);

// `u` holds the predecessors' chosen components and the successors' base
// components; predecessors are the agents before `agent` in `order`.
void encode_features(const repair::RepairModel& model, const repair::FactoredBelief& b, int agent,
                     std::span<const repair::RepairAction> u, std::span<const int> order,
                     std::span<double> out);

std::vector<double> encode_features(const repair::RepairModel& model,
                                    const repair::FactoredBelief& b, int agent,
                                    std::span<const repair::RepairAction> u,
                                    std::span<const int> order);

}  // namespace mapomdp::pi
