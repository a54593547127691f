#pragma once

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "twr/measure.hpp"
#include "twr/transport.hpp"
#include "twr/tree.hpp"

namespace twr {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Exponent p of an l_p ball, p in [1, inf].
class Exponent {
 public:
  explicit Exponent(double p);
  // Accepts a decimal or the literal "inf".
  static Exponent parse(const std::string& text);

  double value() const noexcept { return p_; }
  bool is_one() const noexcept { return p_ == 1.0; }
  bool is_infinite() const noexcept { return p_ == kInf; }
  // p' with 1/p + 1/p' = 1; exact at both endpoints.
  double conjugate() const noexcept;
  std::string to_string() const;

 private:
  double p_;
};

// Per-edge interval [w - alpha, w + beta].
struct BoxSpec {
  EdgeVector alpha;
  EdgeVector beta;
};

// Closed l_p ball of radius lambda around w.
struct BallSpec {
  Exponent p{2.0};
  double lambda = 0.0;
};

using UncertaintySpec = std::variant<BoxSpec, BallSpec>;

// Throws NegativeBeta / InvalidAlpha / SizeMismatch when the box is not a
// well-formed set of nonnegative weight vectors for t.
void validate_box(const Tree& t, const BoxSpec& box);
void validate_ball(const BallSpec& ball);

// l_q norm; q may be kInf.
double lp_norm(std::span<const double> v, double q);

// sum (w_e + beta_e) h_e; beta is a full |E| vector.
double rt_box(const HProfile& hp, const EdgeVector& beta);
double rt_box(const Tree& t, const Measure& mu, const Measure& nu, const EdgeVector& beta);
double rt_box(const Tree& t, const Measure& mu, const Measure& nu, const BoxSpec& box);

// sum w_e h_e + lambda * ||h||_{p'}. lambda = 0 is accepted and reduces to TW.
double rt_ball(const HProfile& hp, Exponent p, double lambda);
double rt_ball(const Tree& t, const Measure& mu, const Measure& nu, Exponent p, double lambda);

// Maximizer of sum w^_e h_e over the ball. For p = 1 the bump goes to the
// smallest edge index attaining max h. Returns w when h == 0.
EdgeVector adversarial_weights(const Tree& t, const HProfile& hp, Exponent p, double lambda);
EdgeVector adversarial_weights(const Tree& t, const Measure& mu, const Measure& nu, Exponent p,
                               double lambda);

// The ball leaves the nonnegative orthant iff lambda exceeds the smallest
// edge weight (the ball reaches lambda along every coordinate axis).
bool ball_leaves_orthant(const Tree& t, double lambda);

// (rt_box with beta = lambda * 1, rt_ball with p = inf); equal to rounding.
std::pair<double, double> check_box_ball_connection(const Tree& t, const Measure& mu,
                                                    const Measure& nu, double lambda);

}  // namespace twr
