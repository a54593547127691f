#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "twr/error.hpp"

namespace twr {

using NodeId = std::uint32_t;

struct EdgeSpec {
  NodeId child = 0;
  NodeId parent = 0;
  double weight = 0.0;
};

// Per-edge real vector. Edges are identified by their child node; the dense
// index of an edge is its child id with the root slot removed, so ascending
// index order equals ascending child id order.
class EdgeVector {
 public:
  EdgeVector() = default;
  explicit EdgeVector(std::size_t edge_count, double fill = 0.0) : values_(edge_count, fill) {}
  explicit EdgeVector(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t e) const { return values_[e]; }
  double& operator[](std::size_t e) { return values_[e]; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  friend bool operator==(const EdgeVector&, const EdgeVector&) = default;

 private:
  std::vector<double> values_;
};

// Rooted tree with nonnegative edge weights. Immutable once built; all
// accessors are safe to call concurrently.
class Tree {
 public:
  static constexpr NodeId kNoParent = static_cast<NodeId>(-1);

  // Validates and builds. Node ids must be dense in [0, n) where n is one
  // more than the number of edges.
  static Tree build(std::span<const EdgeSpec> edges, NodeId root);
  static Tree single_node();

  std::size_t node_count() const noexcept { return parent_.size(); }
  std::size_t edge_count() const noexcept { return parent_.size() - 1; }
  NodeId root() const noexcept { return root_; }

  bool valid_node(NodeId v) const noexcept { return v < parent_.size(); }
  NodeId parent(NodeId v) const { return parent_[v]; }
  std::size_t depth(NodeId v) const { return depth_[v]; }

  // Weight of the edge (parent(v), v); 0 for the root.
  double weight(NodeId v) const { return weight_[v]; }

  std::size_t edge_index(NodeId child) const noexcept {
    return child < root_ ? child : child - 1;
  }
  NodeId edge_child(std::size_t e) const noexcept {
    return e < root_ ? static_cast<NodeId>(e) : static_cast<NodeId>(e + 1);
  }

  // Non-root nodes with every node placed before its parent.
  std::span<const NodeId> topo_order() const noexcept { return topo_order_; }
  // Position of each node inside topo_order (root maps to edge_count()).
  std::size_t topo_rank(NodeId v) const { return topo_rank_[v]; }

  EdgeVector weights() const;
  // Same shape, new weights. Throws NegativeWeight / SizeMismatch.
  Tree with_weights(const EdgeVector& w) const;
  std::vector<EdgeSpec> edges() const;

  double min_weight() const;
  double max_weight() const;

  friend bool operator==(const Tree& a, const Tree& b) {
    return a.root_ == b.root_ && a.parent_ == b.parent_ && a.weight_ == b.weight_;
  }

 private:
  Tree() = default;
  void finalize();

  NodeId root_ = 0;
  std::vector<NodeId> parent_;
  std::vector<double> weight_;
  std::vector<std::uint32_t> depth_;
  std::vector<NodeId> topo_order_;
  std::vector<std::size_t> topo_rank_;
};

// Length of the unique path between x and z.
double tree_distance(const Tree& t, NodeId x, NodeId z);

}  // namespace twr
