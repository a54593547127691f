#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "twr/tree.hpp"

namespace twr {

// n x d points, row-major.
class PointCloud {
 public:
  PointCloud(std::size_t n, std::size_t d, std::vector<double> coords);

  std::size_t size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return d_; }
  std::span<const double> point(std::size_t i) const { return {coords_.data() + i * d_, d_}; }

 private:
  std::size_t n_;
  std::size_t d_;
  std::vector<double> coords_;
};

double euclidean(std::span<const double> a, std::span<const double> b);

struct SampledTree {
  Tree tree;
  std::vector<NodeId> point_node;  // point index -> deepest node containing it
};

struct SamplingParams {
  std::size_t branching = 5;
  std::size_t depth = 6;
  std::uint64_t seed = 0;
};

// Hierarchical farthest-point clustering. Every tree node is a cluster whose
// center is one of its points; a cluster's own center is always the first
// child center, so that child hangs off its parent by a 0-weight edge.
SampledTree sample_tree(const PointCloud& pc, const SamplingParams& params);

enum class NoiseDistribution { UniformSigned, UniformPositive };

NoiseDistribution parse_noise_distribution(std::string_view text);
std::string_view to_string(NoiseDistribution d);

struct NoiseSpec {
  double delta = 0.0;
  std::uint64_t seed = 0;
  NoiseDistribution distribution = NoiseDistribution::UniformSigned;
};

// w_e <- max(0, w_e + U_e), U_e uniform on [-delta, delta] (signed) or
// [0, delta] (positive). |w_e - w*_e| <= delta is guaranteed in floating
// point. delta = 0 returns the input unchanged.
Tree perturb_weights(const Tree& t, const NoiseSpec& spec);

}  // namespace twr
