#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "twr/measure.hpp"
#include "twr/tree.hpp"

// Random instance generators shared by the verifier, the benchmark and the
// test suites.
namespace twr::gen {

using Rng = std::mt19937_64;

// Random recursive tree rooted at 0: node i > 0 picks its parent uniformly
// from [0, i). Weights uniform on [w_lo, w_hi]. Trees from the same rng
// state share their node prefix, which the scaling benchmark relies on.
Tree random_tree(Rng& rng, std::size_t nodes, double w_lo = 0.0, double w_hi = 5.0);

// Measure with up to max_support distinct atoms drawn from nodes [0, node_limit).
Measure random_measure(Rng& rng, std::size_t node_limit, std::size_t max_support);

// Same shape as t with a fraction of edge weights set to exactly 0.
Tree zero_some_edges(Rng& rng, const Tree& t, double fraction);

}  // namespace twr::gen
