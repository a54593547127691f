#pragma once

#include <cstdint>
#include <vector>

#include "twr/measure.hpp"
#include "twr/tree.hpp"

namespace twr {

// Nonzero part of h_e = |mu(gamma_e) - nu(gamma_e)| over the edges lying on
// root paths of the two supports. Listed in ascending edge index; edges not
// listed have h_e == 0 exactly.
struct HProfile {
  std::vector<std::size_t> edges;
  std::vector<double> h;
  std::vector<double> w;

  std::size_t size() const noexcept { return edges.size(); }
  bool empty() const noexcept { return edges.empty(); }
  // Dense |E| vector with zeros off the profile.
  EdgeVector to_dense(std::size_t edge_count) const;
};

enum class Summation { Naive, Compensated };

// Reusable scratch for the restricted accumulation. Sized to the tree once;
// each h_profile call then touches only the ancestor set of the supports.
// Not shareable between threads; give each worker its own.
class Workspace {
 public:
  Workspace() = default;
  explicit Workspace(const Tree& t) { reserve(t); }
  void reserve(const Tree& t);

 private:
  friend HProfile h_profile(const Tree&, const Measure&, const Measure&, Workspace&);
  std::vector<std::uint32_t> stamp_;
  std::vector<double> mass_mu_;
  std::vector<double> mass_nu_;
  std::vector<NodeId> touched_;
  std::uint32_t generation_ = 0;
};

// Cost O(|E_{mu,nu}| log |E_{mu,nu}|) given a warm workspace. Children are
// accumulated in topo order, so the h values match h_profile_full bit for bit.
HProfile h_profile(const Tree& t, const Measure& mu, const Measure& nu, Workspace& ws);
HProfile h_profile(const Tree& t, const Measure& mu, const Measure& nu);

// Reference path: full bottom-up sweep over every edge, O(|E|).
HProfile h_profile_full(const Tree& t, const Measure& mu, const Measure& nu);

// sum_e coef[e] * h_e in listed (ascending edge) order; coef is a full |E| vector.
double weighted_sum(const HProfile& hp, const EdgeVector& coef,
                    Summation mode = Summation::Naive);

// Closed-form 1-Wasserstein distance with tree ground metric.
double tw_distance(const HProfile& hp, Summation mode = Summation::Naive);
double tw_distance(const Tree& t, const Measure& mu, const Measure& nu,
                   Summation mode = Summation::Naive);

}  // namespace twr
