#include "twr/measure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace twr {

Measure Measure::from_atoms(std::vector<Atom> atoms, Normalization mode) {
  if (atoms.empty()) throw Error(ErrorCode::InvalidMass, "measure has empty support");
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.node < b.node; });
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const Atom& a = atoms[i];
    if (i > 0 && atoms[i - 1].node == a.node) {
      throw Error(ErrorCode::DuplicateSupport, "node " + std::to_string(a.node) + " listed twice");
    }
    if (!std::isfinite(a.mass) || a.mass < kMinMass) {
      throw Error(ErrorCode::InvalidMass,
                  "mass " + std::to_string(a.mass) + " at node " + std::to_string(a.node));
    }
    total += a.mass;
  }
  if (mode == Normalization::Strict) {
    if (std::abs(total - 1.0) > kNormTolerance) {
      throw Error(ErrorCode::NotNormalized, "total mass " + std::to_string(total));
    }
  } else {
    for (auto& a : atoms) {
      a.mass /= total;
      if (a.mass < kMinMass) {
        throw Error(ErrorCode::InvalidMass, "normalized mass at node " + std::to_string(a.node) +
                                                " falls below " + std::to_string(kMinMass));
      }
    }
  }
  Measure m;
  m.support_ = std::move(atoms);
  return m;
}

double Measure::total_mass() const {
  double s = 0.0;
  for (const auto& a : support_) s += a.mass;
  return s;
}

void Measure::validate_for(const Tree& t) const {
  for (const auto& a : support_) {
    if (!t.valid_node(a.node)) {
      throw Error(ErrorCode::InvalidNode, "support node " + std::to_string(a.node) + " outside tree of " +
                                              std::to_string(t.node_count()) + " nodes");
    }
  }
}

Measure dirac(const Tree& t, NodeId node) {
  if (!t.valid_node(node)) {
    throw Error(ErrorCode::InvalidNode, "dirac at node " + std::to_string(node) + " outside tree of " +
                                            std::to_string(t.node_count()) + " nodes");
  }
  return Measure::from_atoms({{node, 1.0}});
}

EdgeVector subtree_masses(const Tree& t, const Measure& m) {
  m.validate_for(t);
  EdgeVector out(t.edge_count());
  // Ancestor closure of the support, then one bottom-up pass in topo order.
  std::vector<char> seen(t.node_count(), 0);
  std::vector<NodeId> nodes;
  std::vector<double> acc(t.node_count(), 0.0);
  for (const auto& a : m.support()) {
    acc[a.node] += a.mass;
    for (NodeId v = a.node; v != t.root() && !seen[v]; v = t.parent(v)) {
      seen[v] = 1;
      nodes.push_back(v);
    }
  }
  std::sort(nodes.begin(), nodes.end(),
            [&](NodeId a, NodeId b) { return t.topo_rank(a) < t.topo_rank(b); });
  for (NodeId v : nodes) {
    out[t.edge_index(v)] = acc[v];
    acc[t.parent(v)] += acc[v];
  }
  return out;
}

}  // namespace twr
