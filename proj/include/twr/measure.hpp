#pragma once

#include <span>
#include <utility>
#include <vector>

#include "twr/tree.hpp"

namespace twr {

enum class Normalization {
  Strict,   // total must be 1 within 1e-9
  Relaxed,  // any positive total, divided out
};

struct Atom {
  NodeId node = 0;
  double mass = 0.0;
  friend bool operator==(const Atom&, const Atom&) = default;
};

// Sparse probability measure on tree nodes, support sorted by node id.
// Strict mode keeps masses as given; relaxed mode divides by the total.
class Measure {
 public:
  static constexpr double kMinMass = 1e-15;
  static constexpr double kNormTolerance = 1e-9;

  Measure() = default;
  static Measure from_atoms(std::vector<Atom> atoms, Normalization mode = Normalization::Strict);

  std::span<const Atom> support() const noexcept { return support_; }
  std::size_t size() const noexcept { return support_.size(); }
  double total_mass() const;

  // Throws InvalidNode if any support node is outside t.
  void validate_for(const Tree& t) const;

  friend bool operator==(const Measure&, const Measure&) = default;

 private:
  std::vector<Atom> support_;
};

Measure dirac(const Tree& t, NodeId node);

// Mass of the subtree below each edge, over all of E.
EdgeVector subtree_masses(const Tree& t, const Measure& m);

}  // namespace twr
