#pragma once

#include <cstdint>
#include <vector>

#include "twr/measure.hpp"
#include "twr/robust.hpp"
#include "twr/tree.hpp"

// Brute-force verifiers for the closed forms. Nothing here goes through the
// subtree-mass accumulation in transport; ground costs come from path walks.
namespace twr::oracle {

struct Coupling {
  std::vector<NodeId> rows;  // support of mu
  std::vector<NodeId> cols;  // support of nu
  std::vector<double> plan;  // rows.size() x cols.size(), row-major

  double at(std::size_t i, std::size_t j) const { return plan[i * cols.size() + j]; }
  // Largest absolute marginal violation against (mu, nu).
  double marginal_error(const Measure& mu, const Measure& nu) const;
};

struct LpResult {
  double value = 0.0;
  Coupling plan;
};

inline constexpr std::size_t kMaxLpProduct = 10000;

// Exact transportation problem with cost d_T, solved by successive shortest
// paths on the bipartite support graph. Throws InstanceTooLarge.
LpResult ot_lp(const Tree& t, const Measure& mu, const Measure& nu);

// h_e by the definition of gamma_e: for every support node, walk its root
// path and credit each edge passed.
EdgeVector gamma_difference(const Tree& t, const Measure& mu, const Measure& nu);

enum class SearchMode { Grid, Random };

struct AdversaryResult {
  double value = 0.0;
  EdgeVector w_hat;
  std::size_t evaluations = 0;
  // Candidates re-solved through ot_lp on T(w^) (trees with <= 12 nodes)
  std::size_t lp_checks = 0;
  // max |ot_lp(T(w^)) - sum w^_e h_e| over those checks
  double max_lp_gap = 0.0;
};

inline constexpr std::size_t kMaxGridEdges = 16;
inline constexpr std::size_t kMaxLpCheckNodes = 12;

struct AdversaryOptions {
  SearchMode mode = SearchMode::Random;
  std::size_t budget = 10000;
  std::uint64_t seed = 0;
  // Upper bound on ot_lp re-solves; 0 disables them.
  std::size_t lp_checks = 8;
};

// Maximizes sum w^_e h_e over the uncertainty set intersected with w^ >= 0.
// Box: enumerates interval corners (grid mode, |E| <= 16) or samples them.
// Ball: grid over the cube [-lambda, lambda]^|E| filtered to the ball, or
// adaptive random search followed by coordinate ascent toward the axes.
AdversaryResult adversary_search(const Tree& t, const Measure& mu, const Measure& nu,
                                 const UncertaintySpec& spec, const AdversaryOptions& opts = {});

}  // namespace twr::oracle
