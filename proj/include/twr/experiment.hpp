#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "twr/kernel.hpp"
#include "twr/sampling.hpp"

namespace twr {

namespace fs = std::filesystem;

struct TreeSource {
  // Exactly one of the two is used: a tree file, or a point cloud to sample from.
  std::string tree_file;
  std::string points_file;
  SamplingParams sampling;
};

struct ExperimentConfig {
  TreeSource tree;
  std::string measures_dir;
  bool normalize = false;

  // Single-matrix runs.
  std::string metric = "tw";
  double beta = 0.0;          // uniform beta for rt-box when beta_file is empty
  std::string beta_file;
  std::string p = "2";        // decimal or "inf"
  double lambda = 0.5;

  // Noise sweep.
  std::vector<double> deltas = {0.0};
  std::vector<double> lambdas = {0.01, 0.05, 0.1, 0.5, 1, 5};
  std::uint64_t noise_seed = 0;
  std::string noise_distribution = "uniform-signed";

  // Bandwidth grid.
  std::vector<double> quantile_percents = kDefaultQuantilePercents;
  std::size_t subsample = 0;

  std::string out;      // matrix path for single runs
  std::string out_dir;  // sweep output directory

  unsigned threads = 1;  // does not enter the fingerprint

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  // Throws InvalidArgument / IoError.
  void validate() const;
  std::string fingerprint() const;
};

struct RunResult {
  SymmetricMatrix matrix;
  double wall_seconds = 0.0;
  std::size_t pairs = 0;
};

Tree load_experiment_tree(const ExperimentConfig& cfg);
MetricSpec metric_from_config(const ExperimentConfig& cfg, const Tree& t);

// Loads tree and measures, computes the configured distance matrix, writes
// cfg.out (format by extension) and a "<out>.json" sidecar.
RunResult run_distance_matrix(const ExperimentConfig& cfg);

struct SweepRow {
  double delta = 0.0;
  double lambda = 0.0;
  double mean_relative_deviation = 0.0;  // noisy TW vs clean TW, off-diagonal pairs with clean > 0
  double gap_mean = 0.0;                 // mean of rt_ball - tw over off-diagonal pairs
  double gap_min = 0.0;
  double gap_max = 0.0;
  double box_ball_max_abs_diff = 0.0;    // rt_box(beta = lambda) vs rt_ball(p = inf)
};

struct SweepReport {
  std::vector<SweepRow> rows;
  fs::path summary_csv;
};

// For each delta: perturb the clean tree; for each lambda: write tw, rt-box
// (beta = lambda * 1), rt-ball (cfg.p) and rt-ball at p = inf matrices under
// out_dir/delta_<d>/lambda_<l>/, plus summary.csv. lambda = 0 is the
// degenerate reference point where every robust matrix equals tw. A
// manifest.json holds the fingerprint; rerunning into a directory with a
// different fingerprint throws FingerprintMismatch.
SweepReport run_noise_sweep(const ExperimentConfig& cfg);

struct BenchSize {
  std::size_t edges = 0;
  std::size_t measures = 0;
  std::size_t support = 0;
};

struct BenchRow {
  BenchSize size;
  std::size_t avg_restricted_edges = 0;
  double tw_restricted_us = 0.0;  // per pair
  double tw_full_us = 0.0;
  double rt_box_us = 0.0;
  double rt_ball_us = 0.0;
  double gram_seconds = 0.0;
  double pairs_per_second = 0.0;
};

struct BenchOptions {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::size_t timing_pairs = 2000;
  // Supports are drawn from nodes [0, support_pool); 0 means all nodes.
  std::size_t support_pool = 0;
  bool assemble_gram = true;
};

std::vector<BenchRow> run_bench(std::span<const BenchSize> sizes, const BenchOptions& opts = {});
std::string bench_to_csv(std::span<const BenchRow> rows);

struct VerifyOptions {
  std::uint64_t seed = 0;
  std::size_t instances = 200;
};

// Randomized oracle suite; report["passed"] is the overall verdict.
nlohmann::json run_verify(const VerifyOptions& opts);

}  // namespace twr
