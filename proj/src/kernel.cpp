#include "twr/kernel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include <Eigen/Dense>

#include "twr/io.hpp"

namespace twr {

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::TW: return "tw";
    case Metric::RtBox: return "rt-box";
    case Metric::RtBall: return "rt-ball";
  }
  return "?";
}

Metric parse_metric(std::string_view text) {
  if (text == "tw") return Metric::TW;
  if (text == "rt-box" || text == "rt_box") return Metric::RtBox;
  if (text == "rt-ball" || text == "rt_ball") return Metric::RtBall;
  throw Error(ErrorCode::InvalidArgument, "unknown metric '" + std::string(text) + "'");
}

MetricSpec MetricSpec::box_uniform(const Tree& t, double beta) {
  MetricSpec s;
  s.metric = Metric::RtBox;
  s.box = BoxSpec{EdgeVector{}, EdgeVector(t.edge_count(), beta)};
  return s;
}

MetricSpec MetricSpec::ball_of(Exponent p, double lambda) {
  MetricSpec s;
  s.metric = Metric::RtBall;
  s.ball = BallSpec{p, lambda};
  return s;
}

void MetricSpec::validate(const Tree& t) const {
  switch (metric) {
    case Metric::TW: return;
    case Metric::RtBox:
      if (!box) throw Error(ErrorCode::InvalidArgument, "rt-box needs a beta vector");
      validate_box(t, *box);
      return;
    case Metric::RtBall:
      if (!ball) throw Error(ErrorCode::InvalidArgument, "rt-ball needs p and lambda");
      validate_ball(*ball);
      return;
  }
}

std::string MetricSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << to_string(metric);
  if (metric == Metric::RtBox && box) {
    std::ostringstream vals;
    vals.precision(17);
    for (double b : box->beta.values()) vals << b << ',';
    os << ";beta_sha256=" << io::sha256_hex(vals.str());
  } else if (metric == Metric::RtBall && ball) {
    os << ";p=" << ball->p.to_string() << ";lambda=" << ball->lambda;
  }
  return os.str();
}

double pair_distance(const Tree& t, const Measure& mu, const Measure& nu, const MetricSpec& spec,
                     Workspace& ws) {
  const HProfile hp = h_profile(t, mu, nu, ws);
  switch (spec.metric) {
    case Metric::TW: return tw_distance(hp);
    case Metric::RtBox: return rt_box(hp, spec.box->beta);
    case Metric::RtBall: return rt_ball(hp, spec.ball->p, spec.ball->lambda);
  }
  return 0.0;
}

SymmetricMatrix::SymmetricMatrix(std::size_t n, MatrixKind kind, std::string fingerprint)
    : n_(n), kind_(kind), data_(n * n, 0.0), fingerprint_(std::move(fingerprint)) {
  if (kind == MatrixKind::Kernel)
    for (std::size_t i = 0; i < n; ++i) data_[i * n + i] = 1.0;
}

std::vector<double> SymmetricMatrix::off_diagonal() const {
  std::vector<double> out;
  out.reserve(n_ * (n_ > 0 ? n_ - 1 : 0) / 2);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j) out.push_back(data_[i * n_ + j]);
  return out;
}

SymmetricMatrix distance_matrix(const Tree& t, std::span<const Measure> ms, const MetricSpec& spec,
                                unsigned threads) {
  spec.validate(t);
  for (const auto& m : ms) m.validate_for(t);
  const std::size_t n = ms.size();
  SymmetricMatrix d(n, MatrixKind::Distance, spec.describe());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));

  // Rows are handed out dynamically; row i owns cells (i, j > i).
  std::atomic<std::size_t> next_row{0};
  auto worker = [&] {
    Workspace ws(t);
    for (std::size_t i = next_row++; i < n; i = next_row++) {
      for (std::size_t j = i + 1; j < n; ++j) d.set(i, j, pair_distance(t, ms[i], ms[j], spec, ws));
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  return d;
}

void KernelConfig::validate(const Tree& tree) const {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw Error(ErrorCode::InvalidBandwidth, "bandwidth t must be finite and > 0, got " + std::to_string(t));
  }
  if (metric.metric == Metric::RtBall && metric.ball && metric.ball->p.value() < 2.0) {
    throw Error(ErrorCode::PLessThanTwoForKernel,
                "rt-ball kernels need p in [2, inf], got p = " + metric.ball->p.to_string());
  }
  metric.validate(tree);
}

SymmetricMatrix kernel_from_distances(const SymmetricMatrix& d, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw Error(ErrorCode::InvalidBandwidth, "bandwidth t must be finite and > 0, got " + std::to_string(t));
  }
  std::ostringstream fp;
  fp.precision(17);
  fp << d.fingerprint() << ";t=" << t;
  SymmetricMatrix k(d.size(), MatrixKind::Kernel, fp.str());
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = i + 1; j < d.size(); ++j) k.set(i, j, std::exp(-t * d(i, j)));
  return k;
}

SymmetricMatrix gram_matrix(const Tree& tree, std::span<const Measure> ms, const KernelConfig& cfg,
                            unsigned threads) {
  cfg.validate(tree);
  return kernel_from_distances(distance_matrix(tree, ms, cfg.metric, threads), cfg.t);
}

double quantile(std::vector<double> values, double percent) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of an empty set");
  if (!(percent >= 0.0 && percent <= 100.0)) {
    throw Error(ErrorCode::InvalidArgument, "percent must lie in [0, 100], got " + std::to_string(percent));
  }
  std::sort(values.begin(), values.end());
  const double pos = (values.size() - 1) * percent / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - lo;
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<BandwidthCandidate> quantile_bandwidths(const SymmetricMatrix& d, std::span<const double> percents,
                                                    std::size_t subsample, std::uint64_t seed) {
  std::vector<double> vals = d.off_diagonal();
  if (std::none_of(vals.begin(), vals.end(), [](double x) { return x > 0.0; })) {
    throw Error(ErrorCode::DegenerateDistances, "no strictly positive off-diagonal distance");
  }
  if (subsample > 0 && subsample < vals.size()) {
    std::vector<double> picked;
    picked.reserve(subsample);
    std::mt19937_64 rng(seed);
    std::sample(vals.begin(), vals.end(), std::back_inserter(picked), subsample, rng);
    vals = std::move(picked);
  }
  std::vector<BandwidthCandidate> out;
  for (double s : percents) {
    const double q = quantile(vals, s);
    for (double mult : kBandwidthMultipliers) {
      const double inv = mult * q;
      out.push_back({s, mult, inv, inv > 0.0 ? 1.0 / inv : kInf});
    }
  }
  return out;
}

double min_eigenvalue(const SymmetricMatrix& m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  if (n == 0) return 0.0;
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> a(m.data().data(), n, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

DefinitenessReport check_negative_definite(const SymmetricMatrix& d, std::size_t trials, double tol,
                                           std::uint64_t seed) {
  DefinitenessReport rep;
  rep.trials = trials;
  const std::size_t n = d.size();
  if (n >= 2) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::vector<double> c(n), dc(n);
    rep.max_quadratic_form = -kInf;
    for (std::size_t k = 0; k < trials; ++k) {
      double mean = 0.0;
      for (auto& x : c) mean += (x = gauss(rng));
      mean /= static_cast<double>(n);
      double norm = 0.0;
      for (auto& x : c) {
        x -= mean;
        norm += x * x;
      }
      norm = std::sqrt(norm);
      if (norm == 0.0) continue;
      for (auto& x : c) x /= norm;
      double form = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += d(i, j) * c[j];
        form += c[i] * row;
      }
      rep.max_quadratic_form = std::max(rep.max_quadratic_form, form);
      if (form > tol) ++rep.violations;
    }
  }
  if (n <= kMaxEigenSize) {
    if (n == 0) {
      rep.min_centered_eigenvalue = 0.0;
    } else {
      const auto m = static_cast<Eigen::Index>(n);
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> a(d.data().data(), m, m);
      const Eigen::MatrixXd j = Eigen::MatrixXd::Identity(m, m) - Eigen::MatrixXd::Constant(m, m, 1.0 / m);
      const Eigen::MatrixXd b = -(j * a * j);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b, Eigen::EigenvaluesOnly);
      rep.min_centered_eigenvalue = es.eigenvalues().minCoeff();
    }
  }
  return rep;
}

SymmetricMatrix divisibility_root(const SymmetricMatrix& k, unsigned n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "root order must be >= 1");
  SymmetricMatrix out(k.size(), k.kind(), k.fingerprint() + ";root=" + std::to_string(n));
  const double inv = 1.0 / n;
  for (std::size_t i = 0; i < k.size(); ++i)
    for (std::size_t j = i + 1; j < k.size(); ++j) out.set(i, j, n == 1 ? k(i, j) : std::pow(k(i, j), inv));
  return out;
}

}  // namespace twr
