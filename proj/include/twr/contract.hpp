#pragma once

#include <span>
#include <vector>

#include "twr/measure.hpp"
#include "twr/tree.hpp"

namespace twr {

struct Contraction {
  Tree tree;
  std::vector<Measure> measures;
  // old node id -> new node id
  std::vector<NodeId> remap;
};

// Collapses every edge of weight exactly 0, merging the child into its
// parent and moving its mass along. Surviving nodes are renumbered densely
// in ascending order of their old ids, so a root of id 0 stays 0.
Contraction contract_zero_edges(const Tree& t, std::span<const Measure> measures);

}  // namespace twr
