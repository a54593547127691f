#include "twr/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace twr {

PointCloud::PointCloud(std::size_t n, std::size_t d, std::vector<double> coords)
    : n_(n), d_(d), coords_(std::move(coords)) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "point cloud is empty");
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "points have no coordinates");
  if (coords_.size() != n * d) {
    throw Error(ErrorCode::SizeMismatch, "expected " + std::to_string(n * d) + " coordinates, got " +
                                             std::to_string(coords_.size()));
  }
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (!std::isfinite(coords_[i])) {
      throw Error(ErrorCode::InvalidArgument, "non-finite coordinate in point " + std::to_string(i / d));
    }
  }
}

double euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

namespace {

struct Cluster {
  NodeId node;
  std::size_t center;               // point index
  std::vector<std::size_t> points;  // in permuted order
  std::size_t level;
};

}  // namespace

SampledTree sample_tree(const PointCloud& pc, const SamplingParams& params) {
  if (params.branching < 2) {
    throw Error(ErrorCode::InvalidArgument, "branching must be >= 2, got " + std::to_string(params.branching));
  }
  if (params.depth < 1) throw Error(ErrorCode::InvalidArgument, "depth must be >= 1");

  const std::size_t n = pc.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(params.seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<EdgeSpec> edges;
  std::vector<NodeId> point_node(n, 0);
  NodeId next_node = 1;

  std::vector<Cluster> queue;
  queue.push_back({0, order[0], order, 0});
  std::vector<double> nearest;
  std::vector<std::size_t> owner;
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    Cluster cl = std::move(queue[qi]);
    for (std::size_t p : cl.points) point_node[p] = cl.node;
    if (cl.level >= params.depth || cl.points.size() <= 1) continue;

    // Farthest-point centers, seeded with the cluster's own center. Ties go
    // to the earlier point in the permuted order.
    const std::size_t m = cl.points.size();
    std::vector<std::size_t> centers{cl.center};
    nearest.assign(m, 0.0);
    owner.assign(m, 0);
    for (std::size_t i = 0; i < m; ++i) nearest[i] = euclidean(pc.point(cl.points[i]), pc.point(cl.center));
    while (centers.size() < params.branching) {
      std::size_t far = 0;
      for (std::size_t i = 1; i < m; ++i)
        if (nearest[i] > nearest[far]) far = i;
      if (nearest[far] == 0.0) break;  // remaining points coincide with centers
      centers.push_back(cl.points[far]);
      const std::size_t c = centers.size() - 1;
      for (std::size_t i = 0; i < m; ++i) {
        const double d = euclidean(pc.point(cl.points[i]), pc.point(cl.points[far]));
        if (d < nearest[i]) {
          nearest[i] = d;
          owner[i] = c;
        }
      }
    }
    if (centers.size() == 1) continue;  // all points identical

    std::vector<std::vector<std::size_t>> groups(centers.size());
    for (std::size_t i = 0; i < m; ++i) groups[owner[i]].push_back(cl.points[i]);
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const NodeId child = next_node++;
      edges.push_back({child, cl.node, euclidean(pc.point(centers[c]), pc.point(cl.center))});
      queue.push_back({child, centers[c], std::move(groups[c]), cl.level + 1});
    }
  }
  return {Tree::build(edges, 0), std::move(point_node)};
}

NoiseDistribution parse_noise_distribution(std::string_view text) {
  if (text == "uniform-signed") return NoiseDistribution::UniformSigned;
  if (text == "uniform-positive") return NoiseDistribution::UniformPositive;
  throw Error(ErrorCode::InvalidArgument, "unknown noise distribution '" + std::string(text) + "'");
}

std::string_view to_string(NoiseDistribution d) {
  return d == NoiseDistribution::UniformSigned ? "uniform-signed" : "uniform-positive";
}

Tree perturb_weights(const Tree& t, const NoiseSpec& spec) {
  if (!(spec.delta >= 0.0) || !std::isfinite(spec.delta)) {
    throw Error(ErrorCode::InvalidArgument, "delta must be finite and >= 0, got " + std::to_string(spec.delta));
  }
  if (spec.delta == 0.0) return t;
  std::mt19937_64 rng(spec.seed);
  const double lo = spec.distribution == NoiseDistribution::UniformSigned ? -spec.delta : 0.0;
  std::uniform_real_distribution<double> noise(lo, spec.delta);
  EdgeVector w = t.weights();
  for (auto& x : w.values()) {
    const double orig = x;
    double v = std::max(0.0, orig + noise(rng));
    // The rounded sum may sit an ulp past the band.
    while (std::abs(v - orig) > spec.delta) v = std::nextafter(v, orig);
    x = v;
  }
  return t.with_weights(w);
}

}  // namespace twr
