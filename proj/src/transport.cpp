#include "twr/transport.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace twr {
namespace {

void check_measure(const Tree& t, const Measure& m, const char* name) {
  for (const auto& a : m.support()) {
    if (!t.valid_node(a.node)) {
      throw Error(ErrorCode::TreeMismatch, std::string(name) + " has support node " + std::to_string(a.node) +
                                               " outside tree of " + std::to_string(t.node_count()) + " nodes");
    }
  }
}

double neumaier_sum(const HProfile& hp, const EdgeVector* coef) {
  double sum = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < hp.size(); ++i) {
    const double x = (coef ? (*coef)[hp.edges[i]] : hp.w[i]) * hp.h[i];
    const double s = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - s) + x : (x - s) + sum;
    sum = s;
  }
  return sum + comp;
}

}  // namespace

EdgeVector HProfile::to_dense(std::size_t edge_count) const {
  EdgeVector out(edge_count);
  for (std::size_t i = 0; i < edges.size(); ++i) out[edges[i]] = h[i];
  return out;
}

void Workspace::reserve(const Tree& t) {
  const std::size_t n = t.node_count();
  if (stamp_.size() < n) {
    stamp_.assign(n, 0);
    mass_mu_.assign(n, 0.0);
    mass_nu_.assign(n, 0.0);
    generation_ = 0;
  }
}

HProfile h_profile(const Tree& t, const Measure& mu, const Measure& nu, Workspace& ws) {
  check_measure(t, mu, "mu");
  check_measure(t, nu, "nu");
  ws.reserve(t);
  if (++ws.generation_ == 0) {
    std::fill(ws.stamp_.begin(), ws.stamp_.end(), 0);
    ws.generation_ = 1;
  }
  const std::uint32_t gen = ws.generation_;
  auto& touched = ws.touched_;
  touched.clear();

  auto visit = [&](NodeId s) {
    for (NodeId v = s; v != t.root() && ws.stamp_[v] != gen; v = t.parent(v)) {
      ws.stamp_[v] = gen;
      ws.mass_mu_[v] = 0.0;
      ws.mass_nu_[v] = 0.0;
      touched.push_back(v);
    }
  };
  for (const auto& a : mu.support()) visit(a.node);
  for (const auto& a : nu.support()) visit(a.node);
  for (const auto& a : mu.support())
    if (a.node != t.root()) ws.mass_mu_[a.node] += a.mass;
  for (const auto& a : nu.support())
    if (a.node != t.root()) ws.mass_nu_[a.node] += a.mass;

  std::sort(touched.begin(), touched.end(),
            [&](NodeId a, NodeId b) { return t.topo_rank(a) < t.topo_rank(b); });
  for (NodeId v : touched) {
    const NodeId p = t.parent(v);
    if (p == t.root()) continue;
    ws.mass_mu_[p] += ws.mass_mu_[v];
    ws.mass_nu_[p] += ws.mass_nu_[v];
  }

  std::sort(touched.begin(), touched.end(),
            [&](NodeId a, NodeId b) { return t.edge_index(a) < t.edge_index(b); });
  HProfile hp;
  hp.edges.reserve(touched.size());
  hp.h.reserve(touched.size());
  hp.w.reserve(touched.size());
  for (NodeId v : touched) {
    const double h = std::abs(ws.mass_mu_[v] - ws.mass_nu_[v]);
    if (h == 0.0) continue;
    hp.edges.push_back(t.edge_index(v));
    hp.h.push_back(h);
    hp.w.push_back(t.weight(v));
  }
  return hp;
}

HProfile h_profile(const Tree& t, const Measure& mu, const Measure& nu) {
  Workspace ws(t);
  return h_profile(t, mu, nu, ws);
}

HProfile h_profile_full(const Tree& t, const Measure& mu, const Measure& nu) {
  check_measure(t, mu, "mu");
  check_measure(t, nu, "nu");
  const std::size_t n = t.node_count();
  std::vector<double> a(n, 0.0), b(n, 0.0);
  for (const auto& x : mu.support()) a[x.node] += x.mass;
  for (const auto& x : nu.support()) b[x.node] += x.mass;
  a[t.root()] = b[t.root()] = 0.0;
  for (NodeId v : t.topo_order()) {
    const NodeId p = t.parent(v);
    if (p == t.root()) continue;
    a[p] += a[v];
    b[p] += b[v];
  }
  HProfile hp;
  for (std::size_t e = 0; e < t.edge_count(); ++e) {
    const NodeId v = t.edge_child(e);
    const double h = std::abs(a[v] - b[v]);
    if (h == 0.0) continue;
    hp.edges.push_back(e);
    hp.h.push_back(h);
    hp.w.push_back(t.weight(v));
  }
  return hp;
}

double weighted_sum(const HProfile& hp, const EdgeVector& coef, Summation mode) {
  if (mode == Summation::Compensated) return neumaier_sum(hp, &coef);
  double s = 0.0;
  for (std::size_t i = 0; i < hp.size(); ++i) s += coef[hp.edges[i]] * hp.h[i];
  return s;
}

double tw_distance(const HProfile& hp, Summation mode) {
  if (mode == Summation::Compensated) return neumaier_sum(hp, nullptr);
  double s = 0.0;
  for (std::size_t i = 0; i < hp.size(); ++i) s += hp.w[i] * hp.h[i];
  return s;
}

double tw_distance(const Tree& t, const Measure& mu, const Measure& nu, Summation mode) {
  return tw_distance(h_profile(t, mu, nu), mode);
}

}  // namespace twr
