#include "twr/robust.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace twr {

Exponent::Exponent(double p) : p_(p) {
  if (std::isnan(p) || p < 1.0) {
    throw Error(ErrorCode::InvalidP, "p must lie in [1, inf], got " + std::to_string(p));
  }
}

Exponent Exponent::parse(const std::string& text) {
  if (text == "inf" || text == "Inf" || text == "INF" || text == "infinity") return Exponent(kInf);
  std::size_t pos = 0;
  double p = 0.0;
  try {
    p = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidP, "cannot parse p from '" + text + "'");
  }
  if (pos != text.size()) throw Error(ErrorCode::InvalidP, "cannot parse p from '" + text + "'");
  return Exponent(p);
}

double Exponent::conjugate() const noexcept {
  if (p_ == 1.0) return kInf;
  if (p_ == kInf) return 1.0;
  return p_ / (p_ - 1.0);
}

std::string Exponent::to_string() const {
  if (is_infinite()) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << p_;
  return os.str();
}

void validate_box(const Tree& t, const BoxSpec& box) {
  const std::size_t m = t.edge_count();
  if (box.beta.size() != m) {
    throw Error(ErrorCode::SizeMismatch,
                "beta has " + std::to_string(box.beta.size()) + " entries, tree has " + std::to_string(m) + " edges");
  }
  if (box.alpha.size() != 0 && box.alpha.size() != m) {
    throw Error(ErrorCode::SizeMismatch,
                "alpha has " + std::to_string(box.alpha.size()) + " entries, tree has " + std::to_string(m) + " edges");
  }
  for (std::size_t e = 0; e < m; ++e) {
    if (!(box.beta[e] >= 0.0) || !std::isfinite(box.beta[e])) {
      throw Error(ErrorCode::NegativeBeta, "beta[" + std::to_string(e) + "] = " + std::to_string(box.beta[e]));
    }
  }
  for (std::size_t e = 0; e < box.alpha.size(); ++e) {
    const double a = box.alpha[e];
    if (!(a >= 0.0) || a > t.weight(t.edge_child(e))) {
      throw Error(ErrorCode::InvalidAlpha, "alpha[" + std::to_string(e) + "] = " + std::to_string(a) +
                                               " must lie in [0, w_e]");
    }
  }
}

void validate_ball(const BallSpec& ball) {
  if (!(ball.lambda >= 0.0) || !std::isfinite(ball.lambda)) {
    throw Error(ErrorCode::InvalidLambda, "lambda must be finite and >= 0, got " + std::to_string(ball.lambda));
  }
}

double lp_norm(std::span<const double> v, double q) {
  double peak = 0.0;
  for (double x : v) peak = std::max(peak, std::abs(x));
  if (q == kInf || peak == 0.0) return peak;
  if (q == 1.0) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
  }
  // Scale by the peak so large q neither overflows nor underflows.
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x) / peak, q);
  return peak * std::pow(s, 1.0 / q);
}

double rt_box(const HProfile& hp, const EdgeVector& beta) {
  double s = 0.0;
  for (std::size_t i = 0; i < hp.size(); ++i) s += (hp.w[i] + beta[hp.edges[i]]) * hp.h[i];
  return s;
}

double rt_box(const Tree& t, const Measure& mu, const Measure& nu, const EdgeVector& beta) {
  return rt_box(t, mu, nu, BoxSpec{EdgeVector{}, beta});
}

double rt_box(const Tree& t, const Measure& mu, const Measure& nu, const BoxSpec& box) {
  validate_box(t, box);
  return rt_box(h_profile(t, mu, nu), box.beta);
}

double rt_ball(const HProfile& hp, Exponent p, double lambda) {
  validate_ball({p, lambda});
  return tw_distance(hp) + lambda * lp_norm(hp.h, p.conjugate());
}

double rt_ball(const Tree& t, const Measure& mu, const Measure& nu, Exponent p, double lambda) {
  return rt_ball(h_profile(t, mu, nu), p, lambda);
}

EdgeVector adversarial_weights(const Tree& t, const HProfile& hp, Exponent p, double lambda) {
  validate_ball({p, lambda});
  EdgeVector w_hat = t.weights();
  if (hp.empty() || lambda == 0.0) return w_hat;

  if (p.is_infinite()) {
    for (std::size_t e = 0; e < w_hat.size(); ++e) w_hat[e] += lambda;
    return w_hat;
  }
  if (p.is_one()) {
    // First maximum in ascending edge order.
    std::size_t best = 0;
    for (std::size_t i = 1; i < hp.size(); ++i)
      if (hp.h[i] > hp.h[best]) best = i;
    w_hat[hp.edges[best]] += lambda;
    return w_hat;
  }
  // w_e + lambda ||h||^{-p'/p} h_e^{p'-1}, written as lambda (h_e/||h||)^{p'-1}
  // since p'/p = p' - 1.
  const double q = p.conjugate();
  const double norm = lp_norm(hp.h, q);
  for (std::size_t i = 0; i < hp.size(); ++i) {
    w_hat[hp.edges[i]] += lambda * std::pow(hp.h[i] / norm, q - 1.0);
  }
  return w_hat;
}

EdgeVector adversarial_weights(const Tree& t, const Measure& mu, const Measure& nu, Exponent p,
                               double lambda) {
  return adversarial_weights(t, h_profile(t, mu, nu), p, lambda);
}

bool ball_leaves_orthant(const Tree& t, double lambda) {
  return t.edge_count() > 0 && lambda > t.min_weight();
}

std::pair<double, double> check_box_ball_connection(const Tree& t, const Measure& mu, const Measure& nu,
                                                    double lambda) {
  const HProfile hp = h_profile(t, mu, nu);
  const EdgeVector beta(t.edge_count(), lambda);
  return {rt_box(hp, beta), rt_ball(hp, Exponent(kInf), lambda)};
}

}  // namespace twr
