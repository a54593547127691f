#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "twr/experiment.hpp"
#include "twr/io.hpp"
#include "twr/oracle.hpp"
#include "twr/random.hpp"

using namespace twr;

namespace {

struct Workdir {
  fixtures::TempDir dir;
  gen::Rng rng;
  Tree tree;
  std::vector<Measure> measures;

  explicit Workdir(std::size_t n_measures, std::uint64_t seed = 81, std::size_t nodes = 60)
      : rng(seed), tree(gen::random_tree(rng, nodes)) {
    io::save_tree(tree, dir / "tree.json");
    for (std::size_t i = 0; i < n_measures; ++i) {
      measures.push_back(gen::random_measure(rng, nodes, 5));
      char name[16];
      std::snprintf(name, sizeof name, "m%02zu.json", i);
      io::save_measure(measures.back(), dir / "measures" / name);
    }
  }

  ExperimentConfig config() const {
    ExperimentConfig cfg;
    cfg.tree.tree_file = (dir / "tree.json").string();
    cfg.measures_dir = (dir / "measures").string();
    cfg.normalize = true;
    return cfg;
  }
};

}  // namespace

TEST_CASE("distance matrix run") {
  Workdir w(3);
  ExperimentConfig cfg = w.config();
  cfg.metric = "rt-ball";
  cfg.p = "2";
  cfg.lambda = 0.5;
  cfg.out = (w.dir / "out" / "d.csv").string();
  const RunResult r = run_distance_matrix(cfg);
  REQUIRE(r.matrix.size() == 3);
  CHECK(r.pairs == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r.matrix(i, i) == 0.0);
    for (std::size_t j = 0; j < 3; ++j)
      if (i != j) CHECK(r.matrix(i, j) == doctest::Approx(rt_ball(w.tree, w.measures[i], w.measures[j], Exponent(2.0), 0.5)).epsilon(1e-12));
  }
  const std::string first = io::read_file(cfg.out);
  run_distance_matrix(cfg);
  CHECK(io::read_file(cfg.out) == first);

  const auto side = io::json::parse(io::read_file(cfg.out + ".json"));
  CHECK(side["n"] == 3);
  CHECK(side["fingerprint"] == cfg.fingerprint());
  CHECK(side["names"] == std::vector<std::string>{"m00", "m01", "m02"});
  CHECK(side.contains("ball_leaves_orthant"));

  cfg.out = (w.dir / "out" / "d.bin").string();
  cfg.threads = 3;
  run_distance_matrix(cfg);
  CHECK(io::read_binary_matrix(cfg.out) == io::read_csv_matrix(w.dir / "out" / "d.csv", MatrixKind::Distance));
}

TEST_CASE("robust distances grow with lambda") {
  Workdir w(8, 82);
  const std::vector<double> grid = {0.01, 0.05, 0.1, 0.5, 1, 5};
  for (const std::string metric : {"rt-box", "rt-ball"}) {
    SymmetricMatrix prev;
    for (double l : grid) {
      ExperimentConfig cfg = w.config();
      cfg.metric = metric;
      cfg.beta = l;
      cfg.lambda = l;
      cfg.p = "3";
      const auto d = run_distance_matrix(cfg).matrix;
      if (prev.size())
        for (std::size_t k = 0; k < d.data().size(); ++k) CHECK(d.data()[k] >= prev.data()[k]);
      prev = d;
    }
  }
}

TEST_CASE("noise sweep") {
  Workdir w(6, 83);
  ExperimentConfig cfg = w.config();
  cfg.deltas = {0.0, 0.3};
  cfg.lambdas = {0.0, 0.1, 1.0};
  cfg.p = "2";
  cfg.noise_seed = 5;
  cfg.out_dir = (w.dir / "sweep").string();
  const SweepReport rep = run_noise_sweep(cfg);
  REQUIRE(rep.rows.size() == 6);
  CHECK(std::filesystem::exists(rep.summary_csv));
  CHECK(std::filesystem::exists(w.dir / "sweep" / "delta_0.3" / "lambda_0.1" / "rt_ball_inf.csv"));

  const auto& zero = rep.rows[0];
  CHECK(zero.delta == 0.0);
  CHECK(zero.lambda == 0.0);
  CHECK(zero.mean_relative_deviation == 0.0);
  CHECK(zero.gap_mean == 0.0);
  CHECK(zero.gap_max == 0.0);
  CHECK(io::load_tree(w.dir / "sweep" / "delta_0" / "tree.json") == w.tree);
  CHECK(io::read_file(w.dir / "sweep" / "delta_0" / "tw.csv") == io::read_file(w.dir / "sweep" / "clean_tw.csv"));
  CHECK(rep.rows[3].mean_relative_deviation > 0.0);

  const Tree noisy = io::load_tree(w.dir / "sweep" / "delta_0.3" / "tree.json");
  for (const auto& row : rep.rows) {
    const Tree& t = row.delta == 0.0 ? w.tree : noisy;
    // Independent gap: lambda * ||h||_2 with h from root-path walks.
    double expect = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < w.measures.size(); ++i)
      for (std::size_t j = i + 1; j < w.measures.size(); ++j, ++pairs) {
        const EdgeVector h = oracle::gamma_difference(t, w.measures[i], w.measures[j]);
        expect += row.lambda * lp_norm(h.values(), 2.0);
      }
    expect /= static_cast<double>(pairs);
    CHECK(std::abs(row.gap_mean - expect) <= 1e-12);
    CHECK(row.box_ball_max_abs_diff <= 1e-12);
    CHECK(row.gap_min <= row.gap_mean);
    CHECK(row.gap_mean <= row.gap_max);
  }

  // Same config reruns; a changed one is refused.
  CHECK_NOTHROW(run_noise_sweep(cfg));
  ExperimentConfig other = cfg;
  other.noise_seed = 6;
  try {
    run_noise_sweep(other);
    FAIL("expected FingerprintMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FingerprintMismatch);
  }
}

TEST_CASE("config JSON round trip") {
  ExperimentConfig cfg;
  cfg.tree.points_file = "pts.csv";
  cfg.tree.sampling = {3, 4, 9};
  cfg.measures_dir = "ms";
  cfg.metric = "rt-box";
  cfg.beta = 0.25;
  cfg.deltas = {0, 0.1};
  cfg.threads = 4;
  const ExperimentConfig back = ExperimentConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
  CHECK(back.fingerprint() == cfg.fingerprint());
  ExperimentConfig threads = cfg;
  threads.threads = 1;
  CHECK(threads.fingerprint() == cfg.fingerprint());
  threads.beta = 0.5;
  CHECK(threads.fingerprint() != cfg.fingerprint());
}

TEST_CASE("invalid configs") {
  ExperimentConfig cfg;
  cfg.measures_dir = "x";
  CHECK_THROWS_AS(cfg.validate(), Error);  // no tree source
  cfg.tree.tree_file = "t.json";
  cfg.metric = "nope";
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.metric = "rt-ball";
  cfg.p = "0.5";
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("bench produces a row per size") {
  const std::vector<BenchSize> sizes = {{200, 10, 4}, {2000, 10, 4}};
  const auto rows = run_bench(sizes, {1, 1, 50, 100, true});
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.tw_restricted_us > 0.0);
    CHECK(r.avg_restricted_edges > 0);
    CHECK(r.avg_restricted_edges <= r.size.edges);
  }
  const std::string csv = bench_to_csv(rows);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("verify passes") {
  const auto rep = run_verify({3, 30});
  CHECK(rep["passed"] == true);
}
