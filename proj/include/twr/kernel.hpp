#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "twr/measure.hpp"
#include "twr/robust.hpp"
#include "twr/tree.hpp"

namespace twr {

enum class Metric { TW, RtBox, RtBall };

std::string_view to_string(Metric m);
Metric parse_metric(std::string_view text);  // "tw", "rt-box"/"rt_box", "rt-ball"/"rt_ball"

struct MetricSpec {
  Metric metric = Metric::TW;
  std::optional<BoxSpec> box;    // required for RtBox
  std::optional<BallSpec> ball;  // required for RtBall

  static MetricSpec tw() { return {}; }
  static MetricSpec box_uniform(const Tree& t, double beta);
  static MetricSpec ball_of(Exponent p, double lambda);

  void validate(const Tree& t) const;
  // Stable textual identity used in matrix fingerprints.
  std::string describe() const;
};

// Distance between two measures under the configured metric.
double pair_distance(const Tree& t, const Measure& mu, const Measure& nu, const MetricSpec& spec,
                     Workspace& ws);

enum class MatrixKind : std::uint32_t { Distance = 0, Kernel = 1 };

// Dense n x n matrix, row-major, symmetric by construction (set() writes both
// triangles). Distance kind has a zero diagonal, kernel kind a unit diagonal.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  SymmetricMatrix(std::size_t n, MatrixKind kind, std::string fingerprint = {});

  std::size_t size() const noexcept { return n_; }
  MatrixKind kind() const noexcept { return kind_; }
  const std::string& fingerprint() const noexcept { return fingerprint_; }
  void set_fingerprint(std::string f) { fingerprint_ = std::move(f); }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    data_[i * n_ + j] = v;
    data_[j * n_ + i] = v;
  }
  std::span<const double> data() const noexcept { return data_; }

  // Upper-triangle entries, row by row.
  std::vector<double> off_diagonal() const;

  friend bool operator==(const SymmetricMatrix&, const SymmetricMatrix&) = default;

 private:
  std::size_t n_ = 0;
  MatrixKind kind_ = MatrixKind::Distance;
  std::vector<double> data_;
  std::string fingerprint_;
};

// Each unordered pair is evaluated once; work is spread over `threads`
// workers (0 = hardware concurrency), each with a private workspace. Output is
// independent of the thread count.
SymmetricMatrix distance_matrix(const Tree& t, std::span<const Measure> ms, const MetricSpec& spec,
                                unsigned threads = 1);

struct KernelConfig {
  MetricSpec metric;
  double t = 1.0;

  void validate(const Tree& tree) const;
};

// exp(-t D) elementwise with an exact unit diagonal. Throws InvalidBandwidth.
SymmetricMatrix kernel_from_distances(const SymmetricMatrix& d, double t);

// Throws InvalidBandwidth, PLessThanTwoForKernel.
SymmetricMatrix gram_matrix(const Tree& tree, std::span<const Measure> ms, const KernelConfig& cfg,
                            unsigned threads = 1);

// Linear interpolation between order statistics (numpy's default): the s%
// quantile of sorted x sits at position (n - 1) * s / 100.
double quantile(std::vector<double> values, double percent);

struct BandwidthCandidate {
  double percent = 0.0;     // s
  double multiplier = 1.0;  // 1, 2 or 5
  double inverse_t = 0.0;   // multiplier * q_s
  double t = 0.0;           // 1 / inverse_t
};

inline const std::vector<double> kDefaultQuantilePercents = {10, 20, 30, 40, 50, 60, 70, 80, 90};
inline const std::vector<double> kBandwidthMultipliers = {1.0, 2.0, 5.0};

// 1/t grid {q_s, 2 q_s, 5 q_s} for each s. When subsample > 0, quantiles are
// taken over that many off-diagonal entries drawn without replacement.
std::vector<BandwidthCandidate> quantile_bandwidths(const SymmetricMatrix& d,
                                                    std::span<const double> percents,
                                                    std::size_t subsample = 0,
                                                    std::uint64_t seed = 0);

// Dense symmetric eigen-decomposition; smallest eigenvalue.
double min_eigenvalue(const SymmetricMatrix& m);

struct DefinitenessReport {
  std::size_t trials = 0;
  std::size_t violations = 0;
  double max_quadratic_form = 0.0;  // over unit-norm zero-sum c
  std::optional<double> min_centered_eigenvalue;  // of -J D J, when n <= kMaxEigenSize
  bool passed() const noexcept { return violations == 0; }
};

inline constexpr std::size_t kMaxEigenSize = 2048;

// Draws zero-sum unit vectors c and checks c^T D c <= tol.
DefinitenessReport check_negative_definite(const SymmetricMatrix& d, std::size_t trials, double tol,
                                           std::uint64_t seed = 0);

// Elementwise K^{1/n}.
SymmetricMatrix divisibility_root(const SymmetricMatrix& k, unsigned n);

}  // namespace twr
