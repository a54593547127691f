#include "twr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace twr::oracle {
namespace {

constexpr double kMassEps = 1e-14;

double objective(std::span<const double> w_hat, std::span<const double> h) {
  double s = 0.0;
  for (std::size_t e = 0; e < h.size(); ++e) s += w_hat[e] * h[e];
  return s;
}

}  // namespace

double Coupling::marginal_error(const Measure& mu, const Measure& nu) const {
  double err = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols.size(); ++j) s += at(i, j);
    err = std::max(err, std::abs(s - mu.support()[i].mass));
  }
  for (std::size_t j = 0; j < cols.size(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) s += at(i, j);
    err = std::max(err, std::abs(s - nu.support()[j].mass));
  }
  return err;
}

LpResult ot_lp(const Tree& t, const Measure& mu, const Measure& nu) {
  mu.validate_for(t);
  nu.validate_for(t);
  const std::size_t m = mu.size(), k = nu.size();
  if (m * k > kMaxLpProduct) {
    throw Error(ErrorCode::InstanceTooLarge, std::to_string(m) + " x " + std::to_string(k) +
                                                 " supports exceed the oracle limit of " +
                                                 std::to_string(kMaxLpProduct) + " cells");
  }
  LpResult res;
  Coupling& pl = res.plan;
  for (const auto& a : mu.support()) pl.rows.push_back(a.node);
  for (const auto& b : nu.support()) pl.cols.push_back(b.node);
  pl.plan.assign(m * k, 0.0);

  std::vector<double> cost(m * k);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) cost[i * k + j] = tree_distance(t, pl.rows[i], pl.cols[j]);

  std::vector<double> supply(m), demand(k);
  for (std::size_t i = 0; i < m; ++i) supply[i] = mu.support()[i].mass;
  for (std::size_t j = 0; j < k; ++j) demand[j] = nu.support()[j].mass;

  // Successive shortest paths. Residual graph: source side i -> sink side j
  // at cost c_ij (uncapacitated) and j -> i at cost -c_ij while flow_ij > 0.
  // Bellman-Ford from every source with supply left.
  constexpr double kInfDist = std::numeric_limits<double>::infinity();
  const std::size_t nodes = m + k;
  std::vector<double> dist(nodes);
  std::vector<std::size_t> pred(nodes);
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  // Rounding in the costs can otherwise fake tiny negative cycles.
  double tol = 0.0;
  for (double c : cost) tol = std::max(tol, c);
  tol = 1e-12 * (1.0 + tol);

  for (;;) {
    double left = 0.0;
    for (double s : supply) left += s;
    if (left <= kMassEps) break;

    std::fill(dist.begin(), dist.end(), kInfDist);
    std::fill(pred.begin(), pred.end(), kNone);
    for (std::size_t i = 0; i < m; ++i)
      if (supply[i] > kMassEps) dist[i] = 0.0;

    for (std::size_t round = 0; round < nodes; ++round) {
      bool changed = false;
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
          const double c = cost[i * k + j];
          if (dist[i] < kInfDist && dist[i] + c < dist[m + j] - tol) {
            dist[m + j] = dist[i] + c;
            pred[m + j] = i;
            changed = true;
          }
          if (pl.plan[i * k + j] > 0.0 && dist[m + j] < kInfDist && dist[m + j] - c < dist[i] - tol) {
            dist[i] = dist[m + j] - c;
            pred[i] = m + j;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }

    std::size_t sink = kNone;
    for (std::size_t j = 0; j < k; ++j) {
      if (demand[j] > kMassEps && dist[m + j] < kInfDist && (sink == kNone || dist[m + j] < dist[sink])) {
        sink = m + j;
      }
    }
    if (sink == kNone) break;  // leftover is rounding dust

    double delta = demand[sink - m];
    std::size_t v = sink;
    for (std::size_t steps = 0; pred[v] != kNone; ++steps) {
      if (steps > nodes) throw std::logic_error("ot_lp: cycle in shortest-path tree");
      const std::size_t u = pred[v];
      if (u >= m) delta = std::min(delta, pl.plan[v * k + (u - m)]);  // backward arc j -> i
      v = u;
    }
    delta = std::min(delta, supply[v]);
    const std::size_t start = v;

    v = sink;
    while (pred[v] != kNone) {
      const std::size_t u = pred[v];
      if (u < m) {
        pl.plan[u * k + (v - m)] += delta;
      } else {
        double& f = pl.plan[v * k + (u - m)];
        f = f - delta <= kMassEps * 1e-2 ? 0.0 : f - delta;
      }
      v = u;
    }
    supply[start] -= delta;
    demand[sink - m] -= delta;
    if (supply[start] <= kMassEps * 1e-2) supply[start] = 0.0;
    if (demand[sink - m] <= kMassEps * 1e-2) demand[sink - m] = 0.0;
  }

  res.value = 0.0;
  for (std::size_t c = 0; c < m * k; ++c) res.value += pl.plan[c] * cost[c];
  return res;
}

EdgeVector gamma_difference(const Tree& t, const Measure& mu, const Measure& nu) {
  mu.validate_for(t);
  nu.validate_for(t);
  EdgeVector a(t.edge_count()), b(t.edge_count());
  for (const auto& x : mu.support())
    for (NodeId v = x.node; v != t.root(); v = t.parent(v)) a[t.edge_index(v)] += x.mass;
  for (const auto& x : nu.support())
    for (NodeId v = x.node; v != t.root(); v = t.parent(v)) b[t.edge_index(v)] += x.mass;
  EdgeVector h(t.edge_count());
  for (std::size_t e = 0; e < h.size(); ++e) h[e] = std::abs(a[e] - b[e]);
  return h;
}

namespace {

class Search {
 public:
  Search(const Tree& t, const Measure& mu, const Measure& nu, const AdversaryOptions& opts)
      : t_(t), mu_(mu), nu_(nu), opts_(opts), w_(t.weights()), h_(gamma_difference(t, mu, nu)) {
    res_.value = -std::numeric_limits<double>::infinity();
    lp_enabled_ = opts.lp_checks > 0 && t.node_count() <= kMaxLpCheckNodes;
  }

  const EdgeVector& w() const { return w_; }
  const EdgeVector& h() const { return h_; }

  // Returns the objective; records the point if it beats the incumbent.
  double offer(const EdgeVector& w_hat) {
    ++res_.evaluations;
    const double v = objective(w_hat.values(), h_.values());
    if (v > res_.value) {
      res_.value = v;
      res_.w_hat = w_hat;
      if (lp_enabled_ && res_.lp_checks + 1 < opts_.lp_checks) lp_check(w_hat, v);
    }
    return v;
  }

  AdversaryResult finish() {
    if (lp_enabled_ && !res_.w_hat.values().empty()) lp_check(res_.w_hat, res_.value);
    return std::move(res_);
  }

 private:
  void lp_check(const EdgeVector& w_hat, double v) {
    const double lp = ot_lp(t_.with_weights(w_hat), mu_, nu_).value;
    res_.max_lp_gap = std::max(res_.max_lp_gap, std::abs(lp - v));
    ++res_.lp_checks;
  }

  const Tree& t_;
  const Measure& mu_;
  const Measure& nu_;
  AdversaryOptions opts_;
  EdgeVector w_;
  EdgeVector h_;
  AdversaryResult res_;
  bool lp_enabled_ = false;
};

AdversaryResult search_box(const Tree& t, const Measure& mu, const Measure& nu, const BoxSpec& box,
                           const AdversaryOptions& opts) {
  validate_box(t, box);
  Search s(t, mu, nu, opts);
  const std::size_t m = t.edge_count();
  EdgeVector lo = s.w(), hi = s.w();
  for (std::size_t e = 0; e < m; ++e) {
    if (box.alpha.size() == m) lo[e] -= box.alpha[e];
    hi[e] += box.beta[e];
  }
  EdgeVector cand(m);
  if (opts.mode == SearchMode::Grid) {
    if (m > kMaxGridEdges) {
      throw Error(ErrorCode::InstanceTooLarge, std::to_string(m) + " edges exceed the grid limit of " +
                                                   std::to_string(kMaxGridEdges));
    }
    // A linear objective over a box peaks at a corner.
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
      for (std::size_t e = 0; e < m; ++e) cand[e] = (mask >> e) & 1 ? hi[e] : lo[e];
      s.offer(cand);
    }
  } else {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    s.offer(s.w());
    for (std::size_t it = 0; it < opts.budget; ++it) {
      const bool corner = it % 2 == 0;
      for (std::size_t e = 0; e < m; ++e) {
        const double u = unit(rng);
        cand[e] = corner ? (u < 0.5 ? lo[e] : hi[e]) : lo[e] + u * (hi[e] - lo[e]);
      }
      s.offer(cand);
    }
  }
  return s.finish();
}

// Pulls u back inside the l_p ball of radius lambda by radial scaling.
void shrink_to_ball(EdgeVector& u, double p, double lambda) {
  const double norm = lp_norm(u.values(), p);
  if (norm > lambda) {
    const double f = lambda / norm;
    for (auto& x : u.values()) x *= f;
    // Radial scaling can overshoot by an ulp; nudge until feasible.
    while (lp_norm(u.values(), p) > lambda)
      for (auto& x : u.values()) x = std::nextafter(x, 0.0);
  }
}

// Radial scaling onto the sphere of radius lambda (then inside by an ulp).
void to_sphere(EdgeVector& u, double p, double lambda) {
  const double norm = lp_norm(u.values(), p);
  if (norm == 0.0) return;
  const double f = lambda / norm;
  for (auto& x : u.values()) x *= f;
  shrink_to_ball(u, p, lambda);
}

void place(EdgeVector& w_hat, const EdgeVector& w, const EdgeVector& u) {
  for (std::size_t e = 0; e < w.size(); ++e) w_hat[e] = std::max(0.0, w[e] + u[e]);
}

AdversaryResult search_ball(const Tree& t, const Measure& mu, const Measure& nu, const BallSpec& ball,
                            const AdversaryOptions& opts) {
  validate_ball(ball);
  Search s(t, mu, nu, opts);
  const std::size_t m = t.edge_count();
  const double p = ball.p.value();
  const double lambda = ball.lambda;
  EdgeVector u(m), w_hat(m);
  s.offer(s.w());
  if (m == 0 || lambda == 0.0) return s.finish();

  if (opts.mode == SearchMode::Grid) {
    if (m > kMaxGridEdges) {
      throw Error(ErrorCode::InstanceTooLarge, std::to_string(m) + " edges exceed the grid limit of " +
                                                   std::to_string(kMaxGridEdges));
    }
    std::size_t g = 2;
    while (std::pow(static_cast<double>(g + 1), static_cast<double>(m)) <= static_cast<double>(opts.budget)) ++g;
    std::vector<std::size_t> idx(m, 0);
    for (;;) {
      for (std::size_t e = 0; e < m; ++e) u[e] = -lambda + 2.0 * lambda * idx[e] / (g - 1);
      if (lp_norm(u.values(), p) <= lambda) {
        place(w_hat, s.w(), u);
        s.offer(w_hat);
      }
      std::size_t e = 0;
      while (e < m && ++idx[e] == g) idx[e++] = 0;
      if (e == m) break;
    }
    return s.finish();
  }

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss;
  EdgeVector best_u(m), trial(m);
  place(w_hat, s.w(), best_u);
  double best = s.offer(w_hat);

  // Adaptive random walk (1/5th-success style step control).
  const std::size_t walk = opts.budget * 7 / 10;
  double sigma = lambda / 2.0;
  for (std::size_t it = 0; it < walk; ++it) {
    for (std::size_t e = 0; e < m; ++e) trial[e] = best_u[e] + sigma * gauss(rng);
    if (it % 2 == 0) {
      to_sphere(trial, p, lambda);
    } else {
      shrink_to_ball(trial, p, lambda);
    }
    place(w_hat, s.w(), trial);
    const double v = s.offer(w_hat);
    if (v > best) {
      best = v;
      best_u = trial;
      sigma *= 1.5;
    } else {
      sigma = std::max(sigma * 0.95, lambda * 1e-9);
    }
  }

  // Coordinate ascent: step toward an axis vertex lambda e_i, then back out
  // to the sphere.
  double eta = 0.5;
  for (std::size_t it = walk; it < opts.budget && eta > 1e-12;) {
    bool improved = false;
    for (std::size_t e = 0; e < m && it < opts.budget; ++e, ++it) {
      for (std::size_t f = 0; f < m; ++f) trial[f] = (1.0 - eta) * best_u[f];
      trial[e] += eta * lambda;
      to_sphere(trial, p, lambda);
      place(w_hat, s.w(), trial);
      const double v = s.offer(w_hat);
      if (v > best) {
        best = v;
        best_u = trial;
        improved = true;
      }
    }
    if (!improved) eta *= 0.5;
  }
  return s.finish();
}

}  // namespace

AdversaryResult adversary_search(const Tree& t, const Measure& mu, const Measure& nu, const UncertaintySpec& spec,
                                 const AdversaryOptions& opts) {
  if (const auto* box = std::get_if<BoxSpec>(&spec)) return search_box(t, mu, nu, *box, opts);
  return search_ball(t, mu, nu, std::get<BallSpec>(spec), opts);
}

}  // namespace twr::oracle
