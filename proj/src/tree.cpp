#include "twr/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "twr/contract.hpp"

namespace twr {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::DisconnectedNode: return "DisconnectedNode";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::DuplicateChild: return "DuplicateChild";
    case ErrorCode::InvalidNode: return "InvalidNode";
    case ErrorCode::InvalidMass: return "InvalidMass";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::DuplicateSupport: return "DuplicateSupport";
    case ErrorCode::TreeMismatch: return "TreeMismatch";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::NegativeBeta: return "NegativeBeta";
    case ErrorCode::InvalidAlpha: return "InvalidAlpha";
    case ErrorCode::InvalidP: return "InvalidP";
    case ErrorCode::InvalidLambda: return "InvalidLambda";
    case ErrorCode::InvalidBandwidth: return "InvalidBandwidth";
    case ErrorCode::PLessThanTwoForKernel: return "PLessThanTwoForKernel";
    case ErrorCode::DegenerateDistances: return "DegenerateDistances";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FingerprintMismatch: return "FingerprintMismatch";
  }
  return "Unknown";
}

Tree Tree::single_node() {
  Tree t;
  t.root_ = 0;
  t.parent_ = {kNoParent};
  t.weight_ = {0.0};
  t.finalize();
  return t;
}

Tree Tree::build(std::span<const EdgeSpec> edges, NodeId root) {
  // n covers every id mentioned; an id in [0, n) that never appears as a
  // child (other than the root) is disconnected.
  std::size_t n = std::size_t{root} + 1;
  for (const auto& e : edges) n = std::max({n, std::size_t{e.child} + 1, std::size_t{e.parent} + 1});
  if (n > edges.size() + 1) {
    throw Error(ErrorCode::DisconnectedNode, std::to_string(n) + " node ids but only " + std::to_string(edges.size()) +
                                                 " edges; some node has no parent");
  }
  Tree t;
  t.root_ = root;
  t.parent_.assign(n, kNoParent);
  t.weight_.assign(n, 0.0);

  for (const auto& e : edges) {
    if (!std::isfinite(e.weight) || e.weight < 0.0) {
      throw Error(ErrorCode::NegativeWeight,
                  "edge into node " + std::to_string(e.child) + " has weight " + std::to_string(e.weight));
    }
    if (e.child == root) {
      throw Error(ErrorCode::DuplicateChild, "root " + std::to_string(root) + " listed as a child");
    }
    if (e.child == e.parent) {
      throw Error(ErrorCode::CycleDetected, "self loop at node " + std::to_string(e.child));
    }
    if (t.parent_[e.child] != kNoParent) {
      throw Error(ErrorCode::DuplicateChild, "node " + std::to_string(e.child) + " has two parents");
    }
    t.parent_[e.child] = e.parent;
    t.weight_[e.child] = e.weight;
  }
  for (NodeId v = 0; v < n; ++v) {
    if (v != root && t.parent_[v] == kNoParent) {
      throw Error(ErrorCode::DisconnectedNode, "node " + std::to_string(v) + " has no parent");
    }
  }

  // Every non-root node has one parent, so an unreachable node sits on a cycle.
  enum : std::uint8_t { kUnseen, kOnPath, kDone };
  std::vector<std::uint8_t> state(n, kUnseen);
  state[root] = kDone;
  std::vector<NodeId> path;
  for (NodeId v = 0; v < n; ++v) {
    path.clear();
    NodeId u = v;
    while (state[u] == kUnseen) {
      state[u] = kOnPath;
      path.push_back(u);
      u = t.parent_[u];
    }
    if (state[u] == kOnPath) {
      throw Error(ErrorCode::CycleDetected, "parent links cycle through node " + std::to_string(u));
    }
    for (NodeId p : path) state[p] = kDone;
  }

  t.finalize();
  return t;
}

void Tree::finalize() {
  const std::size_t n = parent_.size();
  std::vector<std::vector<NodeId>> children(n);
  for (NodeId v = 0; v < n; ++v) {
    if (v != root_) children[parent_[v]].push_back(v);
  }
  // BFS from the root; reversing gives a depth-nonincreasing order.
  std::vector<NodeId> bfs;
  bfs.reserve(n);
  bfs.push_back(root_);
  depth_.assign(n, 0);
  for (std::size_t i = 0; i < bfs.size(); ++i) {
    for (NodeId c : children[bfs[i]]) {
      depth_[c] = depth_[bfs[i]] + 1;
      bfs.push_back(c);
    }
  }
  topo_order_.assign(bfs.rbegin(), bfs.rend() - 1);
  topo_rank_.assign(n, topo_order_.size());
  for (std::size_t i = 0; i < topo_order_.size(); ++i) topo_rank_[topo_order_[i]] = i;
}

EdgeVector Tree::weights() const {
  EdgeVector w(edge_count());
  for (std::size_t e = 0; e < edge_count(); ++e) w[e] = weight_[edge_child(e)];
  return w;
}

Tree Tree::with_weights(const EdgeVector& w) const {
  if (w.size() != edge_count()) {
    throw Error(ErrorCode::SizeMismatch, "weight vector has " + std::to_string(w.size()) +
                                             " entries, tree has " + std::to_string(edge_count()) + " edges");
  }
  Tree t = *this;
  for (std::size_t e = 0; e < edge_count(); ++e) {
    if (!std::isfinite(w[e]) || w[e] < 0.0) {
      throw Error(ErrorCode::NegativeWeight, "edge " + std::to_string(e) + " weight " + std::to_string(w[e]));
    }
    t.weight_[edge_child(e)] = w[e];
  }
  return t;
}

std::vector<EdgeSpec> Tree::edges() const {
  std::vector<EdgeSpec> out;
  out.reserve(edge_count());
  for (std::size_t e = 0; e < edge_count(); ++e) {
    const NodeId c = edge_child(e);
    out.push_back({c, parent_[c], weight_[c]});
  }
  return out;
}

double Tree::min_weight() const {
  double m = std::numeric_limits<double>::infinity();
  for (NodeId v = 0; v < node_count(); ++v)
    if (v != root_) m = std::min(m, weight_[v]);
  return m;
}

double Tree::max_weight() const {
  double m = 0.0;
  for (NodeId v = 0; v < node_count(); ++v)
    if (v != root_) m = std::max(m, weight_[v]);
  return m;
}

double tree_distance(const Tree& t, NodeId x, NodeId z) {
  if (!t.valid_node(x) || !t.valid_node(z)) {
    throw Error(ErrorCode::InvalidNode, "node pair (" + std::to_string(x) + ", " + std::to_string(z) +
                                            ") outside tree of " + std::to_string(t.node_count()) + " nodes");
  }
  // Climb the deeper endpoint until the two meet at the LCA. Each side's
  // weights are summed in path order; adding the two sides last keeps
  // d(x, z) == d(z, x) bit for bit.
  double dx = 0.0, dz = 0.0;
  while (x != z) {
    if (t.depth(x) >= t.depth(z) && x != t.root()) {
      dx += t.weight(x);
      x = t.parent(x);
    } else {
      dz += t.weight(z);
      z = t.parent(z);
    }
  }
  return dx < dz ? dx + dz : dz + dx;
}

Contraction contract_zero_edges(const Tree& t, std::span<const Measure> measures) {
  const std::size_t n = t.node_count();
  // Representative of each node: walk top-down so parents resolve first.
  std::vector<NodeId> rep(n);
  rep[t.root()] = t.root();
  const auto order = t.topo_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const NodeId v = *it;
    rep[v] = t.weight(v) == 0.0 ? rep[t.parent(v)] : v;
  }

  std::vector<NodeId> new_id(n, Tree::kNoParent);
  NodeId next = 0;
  for (NodeId v = 0; v < n; ++v)
    if (rep[v] == v) new_id[v] = next++;

  std::vector<EdgeSpec> edges;
  edges.reserve(next > 0 ? next - 1 : 0);
  for (NodeId v = 0; v < n; ++v) {
    if (v == t.root() || rep[v] != v) continue;
    edges.push_back({new_id[v], new_id[rep[t.parent(v)]], t.weight(v)});
  }

  Contraction out{Tree::build(edges, new_id[t.root()]), {}, std::vector<NodeId>(n)};
  for (NodeId v = 0; v < n; ++v) out.remap[v] = new_id[rep[v]];

  out.measures.reserve(measures.size());
  for (const auto& m : measures) m.validate_for(t);
  for (const auto& m : measures) {
    std::map<NodeId, double> merged;
    for (const auto& a : m.support()) merged[out.remap[a.node]] += a.mass;
    std::vector<Atom> atoms;
    atoms.reserve(merged.size());
    for (const auto& [node, mass] : merged) atoms.push_back({node, mass});
    out.measures.push_back(Measure::from_atoms(std::move(atoms), Normalization::Strict));
  }
  return out;
}

}  // namespace twr
