#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lrp/kernel.hpp"
#include "lrp/stats.hpp"

namespace lrp {

// One configuration drives every experiment; unused knobs are ignored by
// the ops that do not need them.
struct ExperimentConfig {
  KernelSpec kernel;                 // d, beta, variant
  std::vector<std::int32_t> sizes;   // box sides, strictly increasing
  int replicas = 200;
  std::uint64_t master_seed = 1;

  double delta = 0.25;               // good-block threshold coefficient
  std::int32_t block_k = 8;          // block side for renormalization checks
  std::vector<double> eps_grid;      // lower-tail epsilon values, increasing
  double theta_hat = 0.0;            // distance exponent; 0 = not set
  std::int64_t exact_diameter_threshold = 20000;
  int bootstrap_rounds = 1000;
  int threads = 1;

  int lowertail_replicas = 0;        // 0 = fall back to replicas
  int balltail_replicas = 0;
  int coupling_replicas = 200;
  int goodblocks_replicas = 0;
  int metric_replicas = 0;
  double beta_low = 0.5;             // coupling check pair
  double beta_high = 2.0;
  std::vector<std::int32_t> box_count_m = {8, 16, 32};
  double metric_radius_scale = 1.0;
  double eta = 0.0;                  // stretched-moment exponent
  std::int32_t cross_section = 0;    // d >= 2: elongated n x c^(d-1) boxes for
                                     // distance-only runs; 0 = full cube

  void validate() const;
};

// Distance-exponent estimate: log median D(0, (n-1)e_1) against
// log (n-1), bootstrap CI over replicas; the mean-based slope is reported
// alongside.
struct ThetaEstimate {
  ScalingFit fit;
  double mean_slope = 0.0;
  std::vector<std::int64_t> separations;
  std::vector<std::vector<double>> samples;  // raw distances per size
  bool elongated = false;

  double theta() const { return fit.slope; }
};

ThetaEstimate estimate_theta(const ExperimentConfig& config);

// Ball-volume growth at the largest size: log median |B_k| against the ball
// extent log(2k+1), over radii unsaturated in every replica.
struct VolumeGrowthResult {
  ScalingFit fit;
  std::vector<std::int32_t> radii;
  std::int32_t box_side = 0;
  int discarded_radii = 0;
  double target = 0.0;  // d / theta_hat
  double diff = 0.0;    // slope - target
  double diff_lo = 0.0;
  double diff_hi = 0.0;
};

VolumeGrowthResult estimate_volume_exponent(const ExperimentConfig& config, double theta_hat,
                                            double theta_lo, double theta_hi);

// Exceedance tail of |B_r| / r^(d/theta) at the largest jointly unsaturated
// radius, calibrated so K = 1 sits at the median.
struct BallTailResult {
  std::int32_t radius = 0;
  std::int32_t box_side = 0;
  double scale_c = 0.0;
  int replicas = 0;
  std::vector<double> phat;          // index K-1
  std::vector<WilsonInterval> ci;
  int observable_k = 0;              // largest K with a positive estimate
  double log_slope = 0.0;            // slope of ln phat over K = 1..observable_k
  bool nonincreasing = true;
};

BallTailResult ball_tail_experiment(const ExperimentConfig& config, double theta_hat);

// Empirical P(D(0, x) <= eps * |x|^theta) on the largest size with Wilson
// intervals; noisy grid points (interval wider than half the estimate) are
// excluded from the log-log slope.
struct LowerTailCurve {
  std::vector<double> eps;
  std::vector<std::int64_t> hits;
  std::vector<double> phat;
  std::vector<WilsonInterval> ci;
  std::vector<bool> used;
  std::int64_t replicas = 0;
  std::int64_t separation = 0;
  double theta_hat = 0.0;
  std::optional<double> slope;  // absent when fewer than 4 usable points
  double target = 0.0;          // 2d / theta_hat
};

LowerTailCurve lower_tail_experiment(const ExperimentConfig& config, double theta_hat);

// Mean of exp((dia / n^theta)^eta) per size, with a Mann-Kendall check that
// the sequence shows no increasing trend at the 5% level.
struct StretchedMomentResult {
  std::vector<std::int32_t> sizes;
  std::vector<double> moments;
  double eta = 0.0;
  double mk_pvalue = 1.0;
  bool increasing_trend = false;
  bool bounded = true;
};

StretchedMomentResult stretched_moment_diagnostic(const ExperimentConfig& config,
                                                  double theta_hat, double eta);

// Per-block chemical box counts at one subdivision level m: for each block
// of side n/m, the number of blocks within chemical distance
// scale * (n/m)^theta. Reports the per-replica maximum over blocks.
struct MetricBoxCountResult {
  std::int32_t m = 0;
  std::int32_t block_side = 0;
  std::int32_t radius = 0;
  std::vector<std::int64_t> max_counts;  // per replica
  double median_max = 0.0;
  double normalizer = 0.0;  // smallest M with max count <= M * log(m)
};

MetricBoxCountResult metric_box_count(const ExperimentConfig& config, double theta_hat,
                                      std::int32_t m);

// Hard per-replica monotonicity check of the Harris coupling: every low
// edge present in high, and D(0, .) pointwise no larger in high.
struct CouplingCheckResult {
  int replicas = 0;
  std::int64_t edge_violations = 0;
  std::int64_t distance_violations = 0;
  std::int64_t low_edges = 0;
  std::int64_t high_edges = 0;
};

CouplingCheckResult coupling_check(const ExperimentConfig& config);

// Deterministic per-replica seed: a pure function of the master seed, the
// experiment tag, the size index and the replica index.
std::uint64_t replica_seed(std::uint64_t master_seed, std::uint64_t experiment_tag,
                           std::int64_t size_index, std::int64_t replica);

}  // namespace lrp
