#include "twr/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "twr/contract.hpp"
#include "twr/io.hpp"
#include "twr/oracle.hpp"
#include "twr/random.hpp"

namespace twr {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string label(double v) { return io::format_double(v); }

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j[key].get<T>() : fallback;
}

}  // namespace

json ExperimentConfig::to_json() const {
  return {
      {"tree",
       {{"file", tree.tree_file},
        {"points", tree.points_file},
        {"branching", tree.sampling.branching},
        {"depth", tree.sampling.depth},
        {"seed", tree.sampling.seed}}},
      {"measures_dir", measures_dir},
      {"normalize", normalize},
      {"metric", metric},
      {"beta", beta},
      {"beta_file", beta_file},
      {"p", p},
      {"lambda", lambda},
      {"deltas", deltas},
      {"lambdas", lambdas},
      {"noise_seed", noise_seed},
      {"noise_distribution", noise_distribution},
      {"quantile_percents", quantile_percents},
      {"subsample", subsample},
      {"out", out},
      {"out_dir", out_dir},
      {"threads", threads},
  };
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "experiment config must be a JSON object");
  ExperimentConfig c;
  try {
    if (j.contains("tree")) {
      const json& t = j["tree"];
      c.tree.tree_file = get_or<std::string>(t, "file", "");
      c.tree.points_file = get_or<std::string>(t, "points", "");
      c.tree.sampling.branching = get_or<std::size_t>(t, "branching", c.tree.sampling.branching);
      c.tree.sampling.depth = get_or<std::size_t>(t, "depth", c.tree.sampling.depth);
      c.tree.sampling.seed = get_or<std::uint64_t>(t, "seed", c.tree.sampling.seed);
    }
    c.measures_dir = get_or<std::string>(j, "measures_dir", "");
    c.normalize = get_or<bool>(j, "normalize", c.normalize);
    c.metric = get_or<std::string>(j, "metric", c.metric);
    c.beta = get_or<double>(j, "beta", c.beta);
    c.beta_file = get_or<std::string>(j, "beta_file", "");
    if (j.contains("p")) c.p = j["p"].is_string() ? j["p"].get<std::string>() : label(j["p"].get<double>());
    c.lambda = get_or<double>(j, "lambda", c.lambda);
    c.deltas = get_or<std::vector<double>>(j, "deltas", c.deltas);
    c.lambdas = get_or<std::vector<double>>(j, "lambdas", c.lambdas);
    c.noise_seed = get_or<std::uint64_t>(j, "noise_seed", c.noise_seed);
    c.noise_distribution = get_or<std::string>(j, "noise_distribution", c.noise_distribution);
    c.quantile_percents = get_or<std::vector<double>>(j, "quantile_percents", c.quantile_percents);
    c.subsample = get_or<std::size_t>(j, "subsample", c.subsample);
    c.out = get_or<std::string>(j, "out", "");
    c.out_dir = get_or<std::string>(j, "out_dir", "");
    c.threads = get_or<unsigned>(j, "threads", c.threads);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("experiment config: ") + e.what());
  }
  return c;
}

void ExperimentConfig::validate() const {
  auto bad = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  if (tree.tree_file.empty() == tree.points_file.empty()) bad("set exactly one of tree.file and tree.points");
  const std::string& src = tree.tree_file.empty() ? tree.points_file : tree.tree_file;
  if (!fs::exists(src)) throw Error(ErrorCode::IoError, "missing input " + src);
  if (measures_dir.empty() || !fs::is_directory(measures_dir)) {
    throw Error(ErrorCode::IoError, "measures_dir '" + measures_dir + "' is not a directory");
  }
  if (!beta_file.empty() && !fs::exists(beta_file)) throw Error(ErrorCode::IoError, "missing input " + beta_file);
  parse_metric(metric);
  Exponent::parse(p);
  parse_noise_distribution(noise_distribution);
  if (!(beta >= 0.0)) bad("beta must be >= 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) bad("lambda must be finite and >= 0");
  for (double l : lambdas)
    if (!(l >= 0.0) || !std::isfinite(l)) bad("lambda grid entries must be finite and >= 0");
  for (double d : deltas)
    if (!(d >= 0.0) || !std::isfinite(d)) bad("delta entries must be finite and >= 0");
  for (double s : quantile_percents)
    if (!(s >= 0.0 && s <= 100.0)) bad("quantile percents must lie in [0, 100]");
}

std::string ExperimentConfig::fingerprint() const {
  json j = to_json();
  j.erase("threads");
  return io::sha256_hex(j.dump());
}

Tree load_experiment_tree(const ExperimentConfig& cfg) {
  if (!cfg.tree.tree_file.empty()) return io::load_tree(cfg.tree.tree_file);
  return sample_tree(io::load_points(cfg.tree.points_file), cfg.tree.sampling).tree;
}

MetricSpec metric_from_config(const ExperimentConfig& cfg, const Tree& t) {
  switch (parse_metric(cfg.metric)) {
    case Metric::TW: return MetricSpec::tw();
    case Metric::RtBox: {
      if (cfg.beta_file.empty()) return MetricSpec::box_uniform(t, cfg.beta);
      MetricSpec s;
      s.metric = Metric::RtBox;
      s.box = io::load_box(cfg.beta_file, t);
      return s;
    }
    case Metric::RtBall: return MetricSpec::ball_of(Exponent::parse(cfg.p), cfg.lambda);
  }
  return {};
}

RunResult run_distance_matrix(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  const Tree tree = load_experiment_tree(cfg);
  const auto set = io::load_measure_dir(cfg.measures_dir, cfg.normalize ? Normalization::Relaxed : Normalization::Strict);
  const MetricSpec spec = metric_from_config(cfg, tree);

  RunResult r;
  r.matrix = distance_matrix(tree, set.measures, spec, cfg.threads);
  r.matrix.set_fingerprint(cfg.fingerprint());
  r.pairs = set.measures.size() * (set.measures.empty() ? 0 : set.measures.size() - 1) / 2;
  r.wall_seconds = seconds_since(t0);

  if (!cfg.out.empty()) {
    io::write_matrix(r.matrix, cfg.out);
    json side = {
        {"fingerprint", r.matrix.fingerprint()},
        {"config", cfg.to_json()},
        {"metric", spec.describe()},
        {"n", set.measures.size()},
        {"pairs", r.pairs},
        {"wall_seconds", r.wall_seconds},
        {"names", set.names},
        {"format", io::format_for(cfg.out) == io::MatrixFormat::Binary ? "binary" : "csv"},
    };
    if (spec.metric == Metric::RtBall) side["ball_leaves_orthant"] = ball_leaves_orthant(tree, cfg.lambda);
    io::write_file(cfg.out + ".json", side.dump(2) + "\n");
  }
  return r;
}

SweepReport run_noise_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.out_dir.empty()) throw Error(ErrorCode::InvalidArgument, "sweep needs out_dir");
  const fs::path dir(cfg.out_dir);
  const fs::path manifest = dir / "manifest.json";
  const std::string fp = cfg.fingerprint();
  if (fs::exists(manifest)) {
    const json old = json::parse(io::read_file(manifest));
    if (old.value("fingerprint", std::string{}) != fp) {
      throw Error(ErrorCode::FingerprintMismatch,
                  manifest.string() + " belongs to a different configuration (" + old.value("fingerprint", std::string{"?"}) +
                      " vs " + fp + ")");
    }
  }
  io::write_file(manifest, json{{"fingerprint", fp}, {"config", cfg.to_json()}}.dump(2) + "\n");

  const Tree clean = load_experiment_tree(cfg);
  const auto set = io::load_measure_dir(cfg.measures_dir, cfg.normalize ? Normalization::Relaxed : Normalization::Strict);
  const auto& ms = set.measures;
  const Exponent p = Exponent::parse(cfg.p);
  const NoiseDistribution dist = parse_noise_distribution(cfg.noise_distribution);
  const SymmetricMatrix clean_tw = distance_matrix(clean, ms, MetricSpec::tw(), cfg.threads);
  io::save_tree(clean, dir / "clean_tree.json");
  io::write_matrix(clean_tw, dir / "clean_tw.csv");

  SweepReport rep;
  const std::size_t n = ms.size();
  for (double delta : cfg.deltas) {
    const fs::path ddir = dir / ("delta_" + label(delta));
    const Tree noisy = perturb_weights(clean, {delta, cfg.noise_seed, dist});
    io::save_tree(noisy, ddir / "tree.json");
    const SymmetricMatrix tw = distance_matrix(noisy, ms, MetricSpec::tw(), cfg.threads);
    io::write_matrix(tw, ddir / "tw.csv");

    double dev = 0.0;
    std::size_t dev_count = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (clean_tw(i, j) > 0.0) {
          dev += std::abs(tw(i, j) - clean_tw(i, j)) / clean_tw(i, j);
          ++dev_count;
        }
    dev = dev_count ? dev / dev_count : 0.0;

    for (double lambda : cfg.lambdas) {
      const fs::path ldir = ddir / ("lambda_" + label(lambda));
      const auto box = distance_matrix(noisy, ms, MetricSpec::box_uniform(noisy, lambda), cfg.threads);
      const auto ball = distance_matrix(noisy, ms, MetricSpec::ball_of(p, lambda), cfg.threads);
      const auto ball_inf = distance_matrix(noisy, ms, MetricSpec::ball_of(Exponent(kInf), lambda), cfg.threads);
      io::write_matrix(box, ldir / "rt_box.csv");
      io::write_matrix(ball, ldir / "rt_ball.csv");
      io::write_matrix(ball_inf, ldir / "rt_ball_inf.csv");

      SweepRow row{delta, lambda, dev, 0.0, kInf, -kInf, 0.0};
      std::size_t pairs = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          const double gap = ball(i, j) - tw(i, j);
          row.gap_mean += gap;
          row.gap_min = std::min(row.gap_min, gap);
          row.gap_max = std::max(row.gap_max, gap);
          row.box_ball_max_abs_diff = std::max(row.box_ball_max_abs_diff, std::abs(box(i, j) - ball_inf(i, j)));
          ++pairs;
        }
      if (pairs) {
        row.gap_mean /= static_cast<double>(pairs);
      } else {
        row.gap_min = row.gap_max = 0.0;
      }
      rep.rows.push_back(row);
    }
  }

  std::ostringstream csv;
  csv << "delta,lambda,p,mean_relative_deviation,gap_mean,gap_min,gap_max,box_ball_max_abs_diff\n";
  for (const auto& r : rep.rows) {
    csv << label(r.delta) << ',' << label(r.lambda) << ',' << p.to_string() << ',' << label(r.mean_relative_deviation)
        << ',' << label(r.gap_mean) << ',' << label(r.gap_min) << ',' << label(r.gap_max) << ','
        << label(r.box_ball_max_abs_diff) << '\n';
  }
  rep.summary_csv = dir / "summary.csv";
  io::write_file(rep.summary_csv, csv.str());
  return rep;
}

std::vector<BenchRow> run_bench(std::span<const BenchSize> sizes, const BenchOptions& opts) {
  std::vector<BenchRow> rows;
  for (const auto& sz : sizes) {
    if (sz.measures < 2) throw Error(ErrorCode::InvalidArgument, "bench needs at least 2 measures per size");
    gen::Rng tree_rng(opts.seed);
    gen::Rng measure_rng(opts.seed + 1);
    const Tree t = gen::random_tree(tree_rng, sz.edges + 1);
    const std::size_t pool = opts.support_pool ? std::min(opts.support_pool, t.node_count()) : t.node_count();
    std::vector<Measure> ms;
    ms.reserve(sz.measures);
    for (std::size_t i = 0; i < sz.measures; ++i) ms.push_back(gen::random_measure(measure_rng, pool, sz.support));

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t k = 0; pairs.size() < opts.timing_pairs; ++k) {
      const std::size_t i = k % sz.measures, j = (k * 7 + 1 + k / sz.measures) % sz.measures;
      if (i != j) pairs.emplace_back(i, j);
    }

    BenchRow row;
    row.size = sz;
    Workspace ws(t);
    std::size_t edge_total = 0;
    for (const auto& [i, j] : pairs) edge_total += h_profile(t, ms[i], ms[j], ws).size();
    row.avg_restricted_edges = edge_total / pairs.size();

    // Best of three to damp scheduler noise.
    volatile double sink = 0.0;
    auto time_per_pair = [&](auto&& fn, std::size_t count) {
      double best = kInf;
      for (int rep = 0; rep < 3; ++rep) {
        const auto t0 = Clock::now();
        for (std::size_t k = 0; k < count; ++k) sink = sink + fn(pairs[k].first, pairs[k].second);
        best = std::min(best, seconds_since(t0));
      }
      return best / static_cast<double>(count) * 1e6;
    };
    const EdgeVector beta(t.edge_count(), 0.5);
    const std::size_t n_pairs = pairs.size();
    row.tw_restricted_us = time_per_pair([&](std::size_t i, std::size_t j) { return tw_distance(h_profile(t, ms[i], ms[j], ws)); }, n_pairs);
    row.rt_box_us = time_per_pair([&](std::size_t i, std::size_t j) { return rt_box(h_profile(t, ms[i], ms[j], ws), beta); }, n_pairs);
    row.rt_ball_us = time_per_pair(
        [&](std::size_t i, std::size_t j) { return rt_ball(h_profile(t, ms[i], ms[j], ws), Exponent(2.0), 0.5); }, n_pairs);
    const std::size_t full_pairs = std::clamp<std::size_t>(20'000'000 / std::max<std::size_t>(sz.edges, 1), 5, n_pairs);
    row.tw_full_us = time_per_pair([&](std::size_t i, std::size_t j) { return tw_distance(h_profile_full(t, ms[i], ms[j])); }, full_pairs);

    if (opts.assemble_gram) {
      const auto t0 = Clock::now();
      const auto d = distance_matrix(t, ms, MetricSpec::tw(), opts.threads);
      const auto k = kernel_from_distances(d, 1.0);
      row.gram_seconds = seconds_since(t0);
      sink = sink + k(0, 1);
      row.pairs_per_second = static_cast<double>(sz.measures * (sz.measures - 1) / 2) / std::max(row.gram_seconds, 1e-12);
    }
    rows.push_back(row);
  }
  return rows;
}

std::string bench_to_csv(std::span<const BenchRow> rows) {
  std::ostringstream os;
  os.precision(6);
  os << "edges,measures,support,avg_restricted_edges,tw_restricted_us,tw_full_us,rt_box_us,rt_ball_us,gram_seconds,"
        "pairs_per_second\n";
  for (const auto& r : rows) {
    os << r.size.edges << ',' << r.size.measures << ',' << r.size.support << ',' << r.avg_restricted_edges << ','
       << r.tw_restricted_us << ',' << r.tw_full_us << ',' << r.rt_box_us << ',' << r.rt_ball_us << ','
       << r.gram_seconds << ',' << r.pairs_per_second << '\n';
  }
  return os.str();
}

json run_verify(const VerifyOptions& opts) {
  gen::Rng rng(opts.seed);
  std::uniform_int_distribution<std::size_t> tree_size(2, 12);
  json checks = json::array();
  bool all = true;
  auto record = [&](const std::string& name, std::size_t instances, double max_err, double tol) {
    const bool ok = max_err <= tol;
    all = all && ok;
    checks.push_back({{"name", name}, {"instances", instances}, {"max_error", max_err}, {"tolerance", tol}, {"passed", ok}});
  };

  // Closed form vs transportation LP.
  double err = 0.0;
  for (std::size_t k = 0; k < opts.instances; ++k) {
    const Tree t = gen::random_tree(rng, tree_size(rng));
    const Measure mu = gen::random_measure(rng, t.node_count(), 4);
    const Measure nu = gen::random_measure(rng, t.node_count(), 4);
    err = std::max(err, std::abs(tw_distance(t, mu, nu) - oracle::ot_lp(t, mu, nu).value));
  }
  record("tw_vs_lp", opts.instances, err, 1e-9);

  // Ball closed form vs adversary search, and the maximizer contract.
  const std::vector<double> ps = {1.0, 1.5, 2.0, 3.0, kInf};
  const std::vector<double> lambdas = {0.01, 0.5, 5.0};
  double over = 0.0, attain = 0.0, feas = 0.0, lp_gap = 0.0;
  std::size_t count = 0;
  for (double pv : ps) {
    for (double lambda : lambdas) {
      const Exponent p(pv);
      for (std::size_t k = 0; k < std::max<std::size_t>(opts.instances / 20, 1); ++k, ++count) {
        const Tree t = gen::random_tree(rng, tree_size(rng));
        const Measure mu = gen::random_measure(rng, t.node_count(), 4);
        const Measure nu = gen::random_measure(rng, t.node_count(), 4);
        const HProfile hp = h_profile(t, mu, nu);
        const double closed = rt_ball(hp, p, lambda);
        const auto adv = oracle::adversary_search(t, mu, nu, BallSpec{p, lambda},
                                                  {oracle::SearchMode::Random, 400, rng(), 2});
        over = std::max(over, adv.value - closed);
        lp_gap = std::max(lp_gap, adv.max_lp_gap);
        const EdgeVector w_hat = adversarial_weights(t, hp, p, lambda);
        const EdgeVector h = oracle::gamma_difference(t, mu, nu);
        double val = 0.0;
        std::vector<double> diff(w_hat.size());
        const EdgeVector w = t.weights();
        for (std::size_t e = 0; e < w_hat.size(); ++e) {
          val += w_hat[e] * h[e];
          diff[e] = w_hat[e] - w[e];
          if (w_hat[e] < 0.0) feas = kInf;
        }
        attain = std::max(attain, std::abs(val - closed));
        feas = std::max(feas, lp_norm(diff, pv) / lambda - 1.0);
      }
    }
  }
  record("adversary_below_closed_form", count, std::max(over, 0.0), 1e-9);
  record("maximizer_attains_value", count, attain, 1e-12);
  record("maximizer_feasible", count, std::max(feas, 0.0), 1e-12);
  record("lp_at_adversary_weights", count, lp_gap, 1e-9);

  // Box with beta = lambda vs ball at p = inf.
  err = 0.0;
  for (std::size_t k = 0; k < opts.instances; ++k) {
    const Tree t = gen::random_tree(rng, tree_size(rng));
    const Measure mu = gen::random_measure(rng, t.node_count(), 4);
    const Measure nu = gen::random_measure(rng, t.node_count(), 4);
    const double lambda = std::uniform_real_distribution<double>(0.001, 5.0)(rng);
    const auto [a, b] = check_box_ball_connection(t, mu, nu, lambda);
    err = std::max(err, std::abs(a - b));
  }
  record("box_equals_ball_inf", opts.instances, err, 1e-12);

  // Zero-edge contraction.
  err = 0.0;
  for (std::size_t k = 0; k < opts.instances; ++k) {
    const Tree t = gen::zero_some_edges(rng, gen::random_tree(rng, tree_size(rng)), 0.3);
    const std::vector<Measure> ms = {gen::random_measure(rng, t.node_count(), 4),
                                     gen::random_measure(rng, t.node_count(), 4)};
    const Contraction c = contract_zero_edges(t, ms);
    err = std::max(err, std::abs(tw_distance(t, ms[0], ms[1]) - tw_distance(c.tree, c.measures[0], c.measures[1])));
  }
  record("contraction_invariance", opts.instances, err, 1e-12);

  return {{"seed", opts.seed}, {"passed", all}, {"checks", checks}};
}

}  // namespace twr
