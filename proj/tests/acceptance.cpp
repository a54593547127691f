// Acceptance suite: one PASS/FAIL line per criterion, diagnostics indented
// below it. Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "twr/contract.hpp"
#include "twr/experiment.hpp"
#include "twr/io.hpp"
#include "twr/kernel.hpp"
#include "twr/oracle.hpp"
#include "twr/random.hpp"
#include "twr/robust.hpp"
#include "twr/sampling.hpp"
#include "twr/transport.hpp"

using namespace twr;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void verdict(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %2d %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void note(const std::string& text) {
  std::printf("        %s\n", text.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Instance {
  Tree tree;
  Measure mu;
  Measure nu;
};

Instance small_instance(gen::Rng& rng, std::size_t max_nodes = 12, std::size_t max_support = 4) {
  const std::size_t n = std::uniform_int_distribution<std::size_t>(2, max_nodes)(rng);
  Tree t = gen::random_tree(rng, n);
  Measure mu = gen::random_measure(rng, n, max_support);
  Measure nu = gen::random_measure(rng, n, max_support);
  return {std::move(t), std::move(mu), std::move(nu)};
}

const std::vector<double> kBallPs = {1.0, 1.5, 2.0, 3.0, kInf};

void tw_vs_lp() {
  gen::Rng rng(1001);
  const auto t0 = Clock::now();
  double err = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Instance in = small_instance(rng);
    err = std::max(err, std::abs(tw_distance(in.tree, in.mu, in.nu) - oracle::ot_lp(in.tree, in.mu, in.nu).value));
  }
  const double secs = since(t0);
  verdict(1, "closed-form TW vs LP", err <= 1e-9 && secs < 30.0,
          fmt("1000 instances, max |tw - lp| = %.3g (tol 1e-9), %.2f s (limit 30 s)", err, secs));
}

void ball_maximizer() {
  gen::Rng rng(1002);
  const auto t0 = Clock::now();
  double over = -kInf, attain = 0.0, feas = -kInf, lp_gap = 0.0, worst_ratio = 1.0;
  bool negative = false;
  std::size_t count = 0;
  for (double pv : kBallPs) {
    const Exponent p(pv);
    for (double lambda : {0.01, 0.5, 5.0}) {
      for (int k = 0; k < 500; ++k, ++count) {
        const Instance in = small_instance(rng);
        const HProfile hp = h_profile(in.tree, in.mu, in.nu);
        const double closed = rt_ball(hp, p, lambda);

        const auto adv = oracle::adversary_search(in.tree, in.mu, in.nu, BallSpec{p, lambda},
                                                  {oracle::SearchMode::Random, 600, rng(), 1});
        over = std::max(over, adv.value - closed);
        lp_gap = std::max(lp_gap, adv.max_lp_gap);
        if (closed > 0.0) worst_ratio = std::min(worst_ratio, adv.value / closed);

        const EdgeVector w_hat = adversarial_weights(in.tree, hp, p, lambda);
        const EdgeVector h = oracle::gamma_difference(in.tree, in.mu, in.nu);
        const EdgeVector w = in.tree.weights();
        double val = 0.0;
        std::vector<double> diff(w.size());
        for (std::size_t e = 0; e < w.size(); ++e) {
          val += w_hat[e] * h[e];
          diff[e] = w_hat[e] - w[e];
          negative = negative || w_hat[e] < 0.0;
        }
        attain = std::max(attain, std::abs(val - closed));
        feas = std::max(feas, lp_norm(diff, pv) - lambda * (1.0 + 1e-12));
      }
    }
  }
  const double secs = since(t0);
  const bool ok = over <= 1e-9 && attain <= 1e-12 && feas <= 0.0 && !negative && secs < 120.0;
  verdict(2, "ball closed form and maximizer", ok,
          fmt("%zu instances over p in {1,1.5,2,3,inf} x lambda in {0.01,0.5,5}, %.2f s (limit 120 s)", count, secs));
  note(fmt("(a) max search - closed = %.3g (tol 1e-9); search reaches >= %.4f of the closed form", over, worst_ratio));
  note(fmt("(b) max |sum w^ h - closed| = %.3g (tol 1e-12)", attain));
  note(fmt("(c) max ||w^ - w||_p - lambda(1+1e-12) = %.3g (must be <= 0), negative weights: %s", feas,
           negative ? "yes" : "no"));
  note(fmt("LP re-solve on T(w^): max gap %.3g", lp_gap));
}

void box_ball() {
  gen::Rng rng(1003);
  double err = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const Instance in = small_instance(rng, 40, 6);
    const double lambda = std::uniform_real_distribution<double>(0.001, 5.0)(rng);
    const auto [box, ball] = check_box_ball_connection(in.tree, in.mu, in.nu, lambda);
    err = std::max(err, std::abs(box - ball));
  }
  verdict(3, "box with beta = lambda equals ball at p = inf", err <= 1e-12,
          fmt("10000 instances, max |rt_box - rt_ball| = %.3g (tol 1e-12)", err));
}

void contraction() {
  gen::Rng rng(1004);
  std::uniform_real_distribution<double> unif(0.01, 2.0);
  const std::size_t total = 5000;
  double tw_err = 0.0, box_err = 0.0, ball_err = 0.0;
  double box_model = 0.0, ball_model = 0.0, clean_err = 0.0;
  std::size_t robust_breaks = 0, clean = 0;
  for (std::size_t k = 0; k < total; ++k) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 40)(rng);
    const Tree t = gen::zero_some_edges(rng, gen::random_tree(rng, n), 0.3);
    const std::vector<Measure> ms = {gen::random_measure(rng, n, 6), gen::random_measure(rng, n, 6)};
    const Contraction c = contract_zero_edges(t, ms);
    const double beta = unif(rng), lambda = unif(rng);
    const Exponent p(kBallPs[k % kBallPs.size()]);

    const double d_tw = std::abs(tw_distance(t, ms[0], ms[1]) - tw_distance(c.tree, c.measures[0], c.measures[1]));
    const double box_t = rt_box(t, ms[0], ms[1], EdgeVector(t.edge_count(), beta));
    const double box_c = rt_box(c.tree, c.measures[0], c.measures[1], EdgeVector(c.tree.edge_count(), beta));
    const double ball_t = rt_ball(t, ms[0], ms[1], p, lambda);
    const double ball_c = rt_ball(c.tree, c.measures[0], c.measures[1], p, lambda);
    tw_err = std::max(tw_err, d_tw);
    box_err = std::max(box_err, std::abs(box_t - box_c));
    ball_err = std::max(ball_err, std::abs(ball_t - ball_c));

    // The robust gap is exactly the uncertainty carried by the zero edges.
    const EdgeVector h = oracle::gamma_difference(t, ms[0], ms[1]);
    const EdgeVector w = t.weights();
    std::vector<double> kept;
    double zero_mass = 0.0;
    for (std::size_t e = 0; e < h.size(); ++e) {
      if (w[e] == 0.0) {
        zero_mass += h[e];
      } else {
        kept.push_back(h[e]);
      }
    }
    const double q = p.conjugate();
    box_model = std::max(box_model, std::abs((box_t - box_c) - beta * zero_mass));
    ball_model =
        std::max(ball_model, std::abs((ball_t - ball_c) - lambda * (lp_norm(h.values(), q) - lp_norm(kept, q))));
    const bool breaks = std::abs(box_t - box_c) > 1e-12 || std::abs(ball_t - ball_c) > 1e-12;
    robust_breaks += breaks;
    if (zero_mass == 0.0) {
      ++clean;
      clean_err = std::max({clean_err, std::abs(box_t - box_c), std::abs(ball_t - ball_c)});
    }
  }
  const bool ok = tw_err <= 1e-12 && box_err <= 1e-12 && ball_err <= 1e-12;
  verdict(4, "zero-edge contraction invariance", ok,
          fmt("%zu trees with 30%% zeroed edges; max error tw %.3g, rt_box %.3g, rt_ball %.3g (tol 1e-12)", total,
              tw_err, box_err, ball_err));
  if (!ok) {
    note(fmt("robust values change on %zu of %zu instances; tw is invariant", robust_breaks, total));
    note(fmt("rt_box(T) - rt_box(T') = beta * sum of h over zero edges, max deviation %.3g", box_model));
    note(fmt("rt_ball(T) - rt_ball(T') = lambda (||h||_q - ||h restricted to kept edges||_q), max deviation %.3g",
             ball_model));
    note(fmt("on the %zu instances where h vanishes on every zero edge, max robust error %.3g", clean, clean_err));
    note("a zero-length edge stays inside the uncertainty set and the adversary may lengthen it, so");
    note("contraction removes admissible metrics; only the plain tree distance is contraction invariant");
  }
}

void metric_property() {
  gen::Rng rng(1005);
  std::uniform_real_distribution<double> unif(0.0, 2.0);
  struct Tally {
    std::string name;
    double tri = -kInf;
    bool symmetric = true;
    bool identity = true;
  };
  std::vector<Tally> tallies = {{"tw"}, {"rt_box"}, {"rt_ball p=1"}, {"rt_ball p=2"}, {"rt_ball p=inf"}};
  for (int k = 0; k < 10000; ++k) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 30)(rng);
    const Tree t = gen::random_tree(rng, n);
    const Measure a = gen::random_measure(rng, n, 5), b = gen::random_measure(rng, n, 5),
                  c = gen::random_measure(rng, n, 5);
    EdgeVector beta(t.edge_count());
    for (std::size_t e = 0; e < beta.size(); ++e) beta[e] = unif(rng);
    const double lambda = unif(rng) + 0.01;
    const std::vector<std::function<double(const Measure&, const Measure&)>> fns = {
        [&](const Measure& x, const Measure& y) { return tw_distance(t, x, y); },
        [&](const Measure& x, const Measure& y) { return rt_box(t, x, y, beta); },
        [&](const Measure& x, const Measure& y) { return rt_ball(t, x, y, Exponent(1.0), lambda); },
        [&](const Measure& x, const Measure& y) { return rt_ball(t, x, y, Exponent(2.0), lambda); },
        [&](const Measure& x, const Measure& y) { return rt_ball(t, x, y, Exponent(kInf), lambda); },
    };
    for (std::size_t m = 0; m < fns.size(); ++m) {
      const double ab = fns[m](a, b), ba = fns[m](b, a), bc = fns[m](b, c), ac = fns[m](a, c);
      tallies[m].symmetric = tallies[m].symmetric && ab == ba;
      tallies[m].identity = tallies[m].identity && fns[m](a, a) == 0.0;
      tallies[m].tri = std::max(tallies[m].tri, ac - (ab + bc));
    }
  }
  bool ok = true;
  for (const auto& t : tallies) ok = ok && t.symmetric && t.identity && t.tri <= 1e-12;
  verdict(5, "metric property", ok, "10000 random triples per metric");
  for (const auto& t : tallies) {
    note(fmt("%-14s symmetric exactly: %s, d(x,x) = 0: %s, max d(a,c) - d(a,b) - d(b,c) = %.3g (tol 1e-12)",
             t.name.c_str(), t.symmetric ? "yes" : "no", t.identity ? "yes" : "no", t.tri));
  }
}

struct Batch {
  Tree tree;
  std::vector<Measure> measures;
};

Batch random_batch(gen::Rng& rng, std::size_t n_measures) {
  const std::size_t n = std::uniform_int_distribution<std::size_t>(50, 300)(rng);
  Batch b{gen::random_tree(rng, n), {}};
  for (std::size_t i = 0; i < n_measures; ++i) b.measures.push_back(gen::random_measure(rng, n, 10));
  return b;
}

std::vector<std::pair<std::string, MetricSpec>> kernel_metrics(gen::Rng& rng, const Tree& t) {
  std::uniform_real_distribution<double> unif(0.01, 2.0);
  EdgeVector beta(t.edge_count());
  for (std::size_t e = 0; e < beta.size(); ++e) beta[e] = unif(rng);
  MetricSpec box;
  box.metric = Metric::RtBox;
  box.box = BoxSpec{{}, beta};
  return {{"rt_box", box},
          {"rt_ball p=2", MetricSpec::ball_of(Exponent(2.0), unif(rng))},
          {"rt_ball p=3", MetricSpec::ball_of(Exponent(3.0), unif(rng))},
          {"rt_ball p=inf", MetricSpec::ball_of(Exponent(kInf), unif(rng))}};
}

void negative_definite() {
  gen::Rng rng(1006);
  const std::size_t n = 50;
  const double eig_tol = -1e-8 * static_cast<double>(n);
  std::size_t violations = 0, trials = 0, grams = 0;
  double max_qf = -kInf, min_centered = kInf, min_eig = kInf;
  for (int batch = 0; batch < 20; ++batch) {
    const Batch b = random_batch(rng, n);
    for (const auto& [name, spec] : kernel_metrics(rng, b.tree)) {
      const auto d = distance_matrix(b.tree, b.measures, spec, 1);
      const auto rep = check_negative_definite(d, 10000, 1e-8, rng());
      violations += rep.violations;
      trials += rep.trials;
      max_qf = std::max(max_qf, rep.max_quadratic_form);
      if (rep.min_centered_eigenvalue) min_centered = std::min(min_centered, *rep.min_centered_eigenvalue);
      for (const auto& cand : quantile_bandwidths(d, kDefaultQuantilePercents)) {
        min_eig = std::min(min_eig, min_eigenvalue(kernel_from_distances(d, cand.t)));
        ++grams;
      }
    }
  }
  const bool ok = violations == 0 && min_eig >= eig_tol;
  verdict(6, "negative definiteness and kernel PSD", ok,
          fmt("20 batches x 50 measures, rt_box and rt_ball p in {2,3,inf}; %zu quadratic forms, %zu violations; "
              "min Gram eigenvalue %.3g over %zu matrices (tol %.1g)",
              trials, violations, min_eig, grams, eig_tol));
  note(fmt("max c^T D c over unit zero-sum c = %.3g (tol 1e-8); min eigenvalue of -JDJ = %.3g", max_qf,
           min_centered));
}

void divisibility() {
  gen::Rng rng(1007);
  const std::size_t n = 50;
  const double eig_tol = -1e-8 * static_cast<double>(n);
  double min_eig = kInf, pow_err = 0.0;
  std::size_t roots = 0;
  for (int batch = 0; batch < 5; ++batch) {
    const Batch b = random_batch(rng, n);
    for (const auto& [name, spec] : kernel_metrics(rng, b.tree)) {
      const auto d = distance_matrix(b.tree, b.measures, spec, 1);
      const auto k1 = gram_matrix(b.tree, b.measures, {spec, 1.0});
      for (const auto& cand : quantile_bandwidths(d, kDefaultQuantilePercents)) {
        const auto k = gram_matrix(b.tree, b.measures, {spec, cand.t});
        for (std::size_t i = 0; i < k.data().size(); ++i)
          pow_err = std::max(pow_err, std::abs(k.data()[i] - std::pow(k1.data()[i], cand.t)));
        for (unsigned r : {2u, 4u, 8u}) {
          min_eig = std::min(min_eig, min_eigenvalue(divisibility_root(k, r)));
          ++roots;
        }
      }
    }
  }
  verdict(7, "infinite divisibility", min_eig >= eig_tol && pow_err <= 1e-12,
          fmt("%zu roots with n in {2,4,8}: min eigenvalue %.3g (tol %.1g); max |gram(t) - gram(1)^t| = %.3g "
              "(tol 1e-12)",
              roots, min_eig, eig_tol, pow_err));
}

void complexity() {
  const unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  // Supports come from a fixed node prefix that both trees share, so only |E| changes.
  const std::vector<BenchSize> sizes = {{10000, 200, 50}, {100000, 200, 50}};
  const auto rows = run_bench(sizes, {77, 1, 4000, 2000, false});
  const double r_tw = rows[1].tw_restricted_us / rows[0].tw_restricted_us;
  const double r_box = rows[1].rt_box_us / rows[0].rt_box_us;
  const double r_ball = rows[1].rt_ball_us / rows[0].rt_ball_us;
  const double worst = std::max({r_tw, r_box, r_ball});

  gen::Rng rng(1008);
  const Tree t = gen::random_tree(rng, 100001);
  std::vector<Measure> ms;
  for (int i = 0; i < 500; ++i) ms.push_back(gen::random_measure(rng, t.node_count(), 50));
  auto time_gram = [&](const MetricSpec& spec) {
    const auto t0 = Clock::now();
    const auto k = gram_matrix(t, ms, {spec, 1.0}, threads);
    const double secs = since(t0);
    return k.size() == ms.size() ? secs : kInf;
  };
  const double g_tw = time_gram(MetricSpec::tw());
  const double g_ball = time_gram(MetricSpec::ball_of(Exponent(2.0), 0.5));

  const bool ok = worst <= 1.5 && g_tw < 60.0 && g_ball < 60.0;
  verdict(8, "complexity", ok,
          fmt("per-pair cost ratio |E| 1e4 -> 1e5: tw %.3f, rt_box %.3f, rt_ball %.3f (limit 1.5); "
              "500-measure Gram on 1e5 edges: tw %.2f s, rt_ball %.2f s (limit 60 s)",
              r_tw, r_box, r_ball, g_tw, g_ball));
  note(fmt("restricted edges per pair %zu vs %zu; full sweep %.1f us vs %.1f us per pair; %u thread(s)",
           rows[0].avg_restricted_edges, rows[1].avg_restricted_edges, rows[0].tw_full_us, rows[1].tw_full_us,
           threads));
}

void noise_model() {
  gen::Rng rng(1009);
  const Tree t = gen::random_tree(rng, 51, 0.0, 1.0);
  const EdgeVector w0 = t.weights();
  std::size_t bad = 0, clamped = 0;
  for (double delta : {0.05, 0.5}) {
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
      const EdgeVector w = perturb_weights(t, {delta, seed, NoiseDistribution::UniformSigned}).weights();
      for (std::size_t e = 0; e < w.size(); ++e) {
        bad += !(w[e] >= 0.0 && std::abs(w[e] - w0[e]) <= delta);
        clamped += w[e] == 0.0;
      }
    }
  }
  const Tree same = perturb_weights(t, {0.0, 123, NoiseDistribution::UniformSigned});
  const EdgeVector ws = same.weights();
  const bool bytes = io::tree_to_json(same).dump() == io::tree_to_json(t).dump() &&
                     std::memcmp(ws.values().data(), w0.values().data(), w0.size() * sizeof(double)) == 0;
  verdict(9, "noise model", bad == 0 && bytes,
          fmt("2 x 10000 draws at delta in {0.05, 0.5}: %zu bound violations; delta = 0 byte-identical: %s", bad,
              bytes ? "yes" : "no"));
  note(fmt("%zu edge draws clamped to 0", clamped));
}

void monotonicity() {
  gen::Rng rng(1010);
  const Tree t = gen::random_tree(rng, 500);
  std::vector<Measure> ms;
  for (int i = 0; i < 40; ++i) ms.push_back(gen::random_measure(rng, t.node_count(), 12));
  const std::vector<double> grid = {0.01, 0.05, 0.1, 0.5, 1, 5};
  std::size_t checked = 0, broken = 0;
  auto sweep = [&](auto make) {
    SymmetricMatrix prev;
    for (double l : grid) {
      const auto d = distance_matrix(t, ms, make(l), 1);
      if (prev.size()) {
        for (std::size_t i = 0; i < d.data().size(); ++i, ++checked) broken += d.data()[i] < prev.data()[i];
      }
      prev = d;
    }
  };
  sweep([&](double l) { return MetricSpec::box_uniform(t, l); });
  for (double p : {1.0, 2.0, 3.0, kInf}) sweep([&](double l) { return MetricSpec::ball_of(Exponent(p), l); });
  verdict(10, "monotonicity in lambda and beta", broken == 0,
          fmt("%zu entrywise comparisons across {0.01,0.05,0.1,0.5,1,5} for rt_box and rt_ball p in {1,2,3,inf}: "
              "%zu decreases",
              checked, broken));
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  tw_vs_lp();
  ball_maximizer();
  box_ball();
  contraction();
  metric_property();
  negative_definite();
  divisibility();
  complexity();
  noise_model();
  monotonicity();
  std::printf("%d of 10 criteria failed, %.1f s\n", failures, since(t0));
  return failures == 0 ? 0 : 1;
}
