#include "twr/random.hpp"

#include <algorithm>
#include <numeric>

namespace twr::gen {

Tree random_tree(Rng& rng, std::size_t nodes, double w_lo, double w_hi) {
  if (nodes <= 1) return Tree::single_node();
  std::uniform_real_distribution<double> weight(w_lo, w_hi);
  std::vector<EdgeSpec> edges;
  edges.reserve(nodes - 1);
  for (NodeId v = 1; v < nodes; ++v) {
    // One parent draw and one weight draw per node, so a prefix of nodes
    // comes out identical for any total size.
    const auto parent = static_cast<NodeId>(std::uniform_int_distribution<std::size_t>(0, v - 1)(rng));
    edges.push_back({v, parent, weight(rng)});
  }
  return Tree::build(edges, 0);
}

Measure random_measure(Rng& rng, std::size_t node_limit, std::size_t max_support) {
  const std::size_t k = std::uniform_int_distribution<std::size_t>(1, std::min(max_support, node_limit))(rng);
  std::vector<NodeId> nodes;
  if (node_limit <= 4 * k) {
    std::vector<NodeId> all(node_limit);
    std::iota(all.begin(), all.end(), NodeId{0});
    std::sample(all.begin(), all.end(), std::back_inserter(nodes), k, rng);
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, node_limit - 1);
    while (nodes.size() < k) {
      const auto v = static_cast<NodeId>(pick(rng));
      if (std::find(nodes.begin(), nodes.end(), v) == nodes.end()) nodes.push_back(v);
    }
  }
  std::uniform_real_distribution<double> mass(0.05, 1.0);
  std::vector<Atom> atoms;
  atoms.reserve(k);
  for (NodeId v : nodes) atoms.push_back({v, mass(rng)});
  return Measure::from_atoms(std::move(atoms), Normalization::Relaxed);
}

Tree zero_some_edges(Rng& rng, const Tree& t, double fraction) {
  EdgeVector w = t.weights();
  std::bernoulli_distribution coin(fraction);
  for (auto& x : w.values())
    if (coin(rng)) x = 0.0;
  return t.with_weights(w);
}

}  // namespace twr::gen
