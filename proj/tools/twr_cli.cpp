// twr: tree-Wasserstein and robust tree-OT distances, kernels and verifiers.
//
// Exit codes: 0 success, 2 configuration error, 3 input validation error,
// 4 oracle verification failure.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "twr/experiment.hpp"
#include "twr/io.hpp"
#include "twr/kernel.hpp"
#include "twr/robust.hpp"
#include "twr/sampling.hpp"

namespace {

using namespace twr;
using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitInput = 3;
constexpr int kExitVerify = 4;

struct Failure {
  int code;
};

std::uint64_t resolve_seed(const CLI::Option* opt, std::uint64_t value) {
  if (opt->count() > 0) return value;
  if (const char* env = std::getenv("TWR_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, std::string("TWR_SEED is not an integer: ") + env);
    }
  }
  return value;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad list entry '" + tok + "'");
    }
  }
  return out;
}

// Flags shared by dist and gram.
struct MatrixFlags {
  std::string config;
  std::string tree;
  std::string measures;
  std::string metric = "tw";
  std::string beta_file;
  double beta = 0.0;
  std::string p = "2";
  double lambda = 0.5;
  bool normalize = false;
  unsigned threads = 1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "Experiment config JSON (flags below are then ignored)");
    cmd->add_option("--tree", tree, "Tree JSON");
    cmd->add_option("--measures", measures, "Directory of measure files (*.json, *.txt)");
    cmd->add_option("--metric", metric, "tw | rt-box | rt-ball")->check(CLI::IsMember({"tw", "rt-box", "rt-ball"}));
    cmd->add_option("--beta-file", beta_file, "Box spec JSON {\"beta\": [...], \"alpha\": [...]}");
    cmd->add_option("--beta", beta, "Uniform beta for rt-box when no --beta-file");
    cmd->add_option("--p", p, "Ball exponent in [1, inf]; decimal or 'inf'");
    cmd->add_option("--lambda", lambda, "Ball radius");
    cmd->add_flag("--normalize", normalize, "Relaxed measures: divide masses by their total");
    cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
  }

  ExperimentConfig to_config() const {
    ExperimentConfig c;
    if (!config.empty()) {
      c = ExperimentConfig::from_json(json::parse(io::read_file(config)));
    } else {
      c.tree.tree_file = tree;
      c.measures_dir = measures;
      c.metric = metric;
      c.beta_file = beta_file;
      c.beta = beta;
      c.p = p;
      c.lambda = lambda;
      c.normalize = normalize;
    }
    c.threads = threads;
    return c;
  }
};

void warn_orthant(const ExperimentConfig& cfg) {
  if (cfg.metric != "rt-ball") return;
  const Tree t = load_experiment_tree(cfg);
  if (ball_leaves_orthant(t, cfg.lambda)) {
    std::cerr << "warning: lambda = " << cfg.lambda << " exceeds the smallest edge weight (" << t.min_weight()
              << "); the ball leaves the nonnegative orthant\n";
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Tree-Wasserstein and max-min robust tree OT: distances, kernels, verification"};
  app.require_subcommand(1);

  // build-tree
  std::string points, tree_out, mapping_out;
  SamplingParams sampling;
  auto* build = app.add_subcommand("build-tree", "Sample a tree metric over a point cloud (farthest-point clustering)");
  build->add_option("--points", points, "Point cloud CSV, one point per row")->required();
  build->add_option("--branching", sampling.branching, "Children per cluster")->check(CLI::Range(2, 1 << 20));
  build->add_option("--depth", sampling.depth, "Maximum depth")->check(CLI::Range(1, 1 << 20));
  auto* build_seed = build->add_option("--seed", sampling.seed, "RNG seed (falls back to TWR_SEED)");
  build->add_option("--out", tree_out, "Tree JSON output")->required();
  build->add_option("--mapping", mapping_out, "CSV of point index -> node id");

  // perturb
  std::string tree_in, noise_dist = "uniform-signed";
  NoiseSpec noise;
  auto* perturb = app.add_subcommand("perturb", "Perturb edge weights by at most delta, clamped at 0");
  perturb->add_option("--tree", tree_in, "Tree JSON")->required();
  perturb->add_option("--delta", noise.delta, "Noise bound")->required();
  auto* perturb_seed = perturb->add_option("--seed", noise.seed, "RNG seed (falls back to TWR_SEED)");
  perturb->add_option("--noise-dist", noise_dist, "uniform-signed | uniform-positive")
      ->check(CLI::IsMember({"uniform-signed", "uniform-positive"}));
  perturb->add_option("--out", tree_out, "Tree JSON output")->required();

  // dist
  MatrixFlags dist_flags;
  std::string dist_out;
  auto* dist = app.add_subcommand("dist", "Pairwise distance matrix");
  dist_flags.attach(dist);
  dist->add_option("--out", dist_out, "Output matrix (.csv or .bin)")->required();

  // gram
  MatrixFlags gram_flags;
  std::string gram_out, gram_out_dir, quantile_grid;
  double bandwidth = 0.0;
  std::size_t subsample = 0;
  auto* gram = app.add_subcommand("gram", "Kernel Gram matrix exp(-t D)");
  gram_flags.attach(gram);
  CLI::Option* t_opt = gram->add_option("--t", bandwidth, "Bandwidth t > 0");
  gram->add_option("--quantile-grid", quantile_grid, "Percents s, e.g. 10,20,...,90; 1/t in {q_s, 2q_s, 5q_s}");
  gram->add_option("--subsample", subsample, "Quantiles over this many random off-diagonal distances");
  auto* gram_seed = gram->add_option("--seed", noise.seed, "Subsampling seed (falls back to TWR_SEED)");
  gram->add_option("--out", gram_out, "Gram matrix output for --t (.csv or .bin)");
  gram->add_option("--out-dir", gram_out_dir, "Directory for --quantile-grid outputs");

  // adversary
  std::string mu_file, nu_file, adv_p = "2";
  double adv_lambda = 0.5;
  bool adv_normalize = false;
  auto* adversary = app.add_subcommand("adversary", "Worst-case edge weights over the l_p ball");
  adversary->add_option("--tree", tree_in, "Tree JSON")->required();
  adversary->add_option("--mu", mu_file, "Measure file")->required();
  adversary->add_option("--nu", nu_file, "Measure file")->required();
  adversary->add_option("--p", adv_p, "Ball exponent in [1, inf]; decimal or 'inf'");
  adversary->add_option("--lambda", adv_lambda, "Ball radius");
  adversary->add_flag("--normalize", adv_normalize, "Relaxed measures");
  adversary->add_option("--out", tree_out, "Tree JSON with the adversarial weights")->required();

  // verify
  VerifyOptions verify_opts;
  std::string verify_out;
  auto* verify = app.add_subcommand("verify", "Randomized oracle checks of every closed form");
  auto* verify_seed = verify->add_option("--seed", verify_opts.seed, "RNG seed (falls back to TWR_SEED)");
  verify->add_option("--instances", verify_opts.instances, "Instances per check");
  verify->add_option("--out", verify_out, "JSON report path (default stdout)");

  // sweep
  std::string sweep_config;
  unsigned sweep_threads = 1;
  auto* sweep = app.add_subcommand("sweep", "Noise / radius sweep over tw, rt-box and rt-ball");
  sweep->add_option("--config", sweep_config, "Experiment config JSON")->required();
  sweep->add_option("--threads", sweep_threads, "Worker threads (0 = all cores)");

  // bench
  std::string sizes_text = "10000:100:20,100000:100:20";
  std::string bench_out;
  BenchOptions bench_opts;
  auto* bench = app.add_subcommand("bench", "Timing of per-pair distances and Gram assembly");
  bench->add_option("--sizes", sizes_text, "Comma list of edges:measures:support");
  auto* bench_seed = bench->add_option("--seed", bench_opts.seed, "RNG seed (falls back to TWR_SEED)");
  bench->add_option("--threads", bench_opts.threads, "Worker threads for Gram assembly");
  bench->add_option("--pairs", bench_opts.timing_pairs, "Pairs timed per metric");
  bench->add_option("--support-pool", bench_opts.support_pool, "Draw supports from nodes [0, N)");
  bench->add_option("--out", bench_out, "CSV report path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  if (*build) {
    sampling.seed = resolve_seed(build_seed, sampling.seed);
    const auto sampled = sample_tree(io::load_points(points), sampling);
    io::save_tree(sampled.tree, tree_out);
    if (!mapping_out.empty()) {
      std::ostringstream os;
      os << "point,node\n";
      for (std::size_t i = 0; i < sampled.point_node.size(); ++i) os << i << ',' << sampled.point_node[i] << '\n';
      io::write_file(mapping_out, os.str());
    }
    std::cerr << "tree with " << sampled.tree.node_count() << " nodes written to " << tree_out << '\n';
  } else if (*perturb) {
    noise.seed = resolve_seed(perturb_seed, noise.seed);
    noise.distribution = parse_noise_distribution(noise_dist);
    io::save_tree(perturb_weights(io::load_tree(tree_in), noise), tree_out);
  } else if (*dist) {
    ExperimentConfig cfg = dist_flags.to_config();
    cfg.out = dist_out;
    warn_orthant(cfg);
    const auto r = run_distance_matrix(cfg);
    std::cerr << r.matrix.size() << "x" << r.matrix.size() << " matrix, " << r.pairs << " pairs in " << r.wall_seconds
              << " s -> " << dist_out << '\n';
  } else if (*gram) {
    ExperimentConfig cfg = gram_flags.to_config();
    cfg.validate();
    const bool single = t_opt->count() > 0;
    if (single == !quantile_grid.empty()) {
      throw Error(ErrorCode::InvalidArgument, "give exactly one of --t and --quantile-grid");
    }
    const Tree t = load_experiment_tree(cfg);
    const auto set = io::load_measure_dir(cfg.measures_dir, cfg.normalize ? Normalization::Relaxed : Normalization::Strict);
    const MetricSpec spec = metric_from_config(cfg, t);
    KernelConfig kc{spec, single ? bandwidth : 1.0};
    kc.validate(t);
    const auto d = distance_matrix(t, set.measures, spec, cfg.threads);
    if (single) {
      if (gram_out.empty()) throw Error(ErrorCode::InvalidArgument, "--t needs --out");
      auto k = kernel_from_distances(d, bandwidth);
      k.set_fingerprint(cfg.fingerprint() + ";t=" + std::to_string(bandwidth));
      io::write_matrix(k, gram_out);
    } else {
      if (gram_out_dir.empty()) throw Error(ErrorCode::InvalidArgument, "--quantile-grid needs --out-dir");
      const auto grid = parse_list(quantile_grid);
      const auto cands = quantile_bandwidths(d, grid, subsample, resolve_seed(gram_seed, noise.seed));
      std::ostringstream table;
      table << "percent,multiplier,inverse_t,t,file\n";
      for (const auto& c : cands) {
        std::ostringstream name;
        name << "gram_s" << c.percent << "_x" << c.multiplier << ".csv";
        io::write_matrix(kernel_from_distances(d, c.t), fs::path(gram_out_dir) / name.str());
        table << io::format_double(c.percent) << ',' << io::format_double(c.multiplier) << ','
              << io::format_double(c.inverse_t) << ',' << io::format_double(c.t) << ',' << name.str() << '\n';
      }
      io::write_file(fs::path(gram_out_dir) / "bandwidths.csv", table.str());
    }
  } else if (*adversary) {
    const Tree t = io::load_tree(tree_in);
    const auto mode = adv_normalize ? Normalization::Relaxed : Normalization::Strict;
    const Measure mu = io::load_measure(mu_file, mode);
    const Measure nu = io::load_measure(nu_file, mode);
    const Exponent p = Exponent::parse(adv_p);
    if (ball_leaves_orthant(t, adv_lambda)) {
      std::cerr << "warning: the ball leaves the nonnegative orthant (lambda > min edge weight)\n";
    }
    const HProfile hp = h_profile(t, mu, nu);
    io::save_tree(t.with_weights(adversarial_weights(t, hp, p, adv_lambda)), tree_out);
    std::cout.precision(17);
    std::cout << rt_ball(hp, p, adv_lambda) << '\n';
  } else if (*verify) {
    verify_opts.seed = resolve_seed(verify_seed, verify_opts.seed);
    const json report = run_verify(verify_opts);
    if (verify_out.empty()) {
      std::cout << report.dump(2) << '\n';
    } else {
      io::write_file(verify_out, report.dump(2) + "\n");
    }
    if (!report["passed"].get<bool>()) return kExitVerify;
  } else if (*sweep) {
    ExperimentConfig cfg = ExperimentConfig::from_json(json::parse(io::read_file(sweep_config)));
    cfg.threads = sweep_threads;
    const auto rep = run_noise_sweep(cfg);
    std::cerr << rep.rows.size() << " sweep rows -> " << rep.summary_csv.string() << '\n';
  } else if (*bench) {
    bench_opts.seed = resolve_seed(bench_seed, bench_opts.seed);
    std::vector<BenchSize> sizes;
    std::stringstream ss(sizes_text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      BenchSize s;
      char c1 = 0, c2 = 0;
      std::istringstream ts(tok);
      if (!(ts >> s.edges >> c1 >> s.measures >> c2 >> s.support) || c1 != ':' || c2 != ':') {
        throw Error(ErrorCode::InvalidArgument, "bad size '" + tok + "', expected edges:measures:support");
      }
      sizes.push_back(s);
    }
    const std::string csv = bench_to_csv(run_bench(sizes, bench_opts));
    if (bench_out.empty()) {
      std::cout << csv;
    } else {
      io::write_file(bench_out, csv);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const twr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.code()) {
      case twr::ErrorCode::InvalidArgument:
      case twr::ErrorCode::FingerprintMismatch:
        return kExitConfig;
      default:
        return kExitInput;
    }
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
