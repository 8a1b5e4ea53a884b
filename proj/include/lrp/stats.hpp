#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace lrp {

// Log-log least-squares fit with a replicate-level bootstrap on the slope.
struct ScalingFit {
  std::vector<double> log_x;
  std::vector<double> log_y;
  double slope = 0.0;
  double intercept = 0.0;
  double ci_lo = 0.0;  // bootstrap 95% percentile interval on the slope
  double ci_hi = 0.0;
  std::vector<double> medians;  // per-point aggregated ordinates (raw scale)
  int bootstrap_rounds = 0;

  double ci_width() const { return ci_hi - ci_lo; }
};

enum class Aggregate { kMedian, kMean };

double median(std::vector<double> values);
double mean(std::span<const double> values);

// Plain fit of log y on log x; at least 4 points, all positive.
ScalingFit fit_power_law(std::span<const double> x, std::span<const double> y);

// Replicate-aware fit: y per point is aggregated (median or mean) over its
// replicate list; the CI comes from resampling replicates within each point.
// Deterministic given bootstrap_seed.
ScalingFit fit_power_law_replicates(std::span<const double> x,
                                    const std::vector<std::vector<double>>& replicates,
                                    Aggregate aggregate, int bootstrap_rounds,
                                    std::uint64_t bootstrap_seed);

struct WilsonInterval {
  double lo;
  double hi;
  double center;
};

// 95% Wilson score interval for a binomial proportion.
WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials);

// Exact two-sided Mann-Kendall trend test for short sequences (n <= 9:
// permutation enumeration; larger n: normal approximation with continuity
// correction). Returns the p-value for the null of no monotone trend.
double mann_kendall_pvalue(std::span<const double> values);

}  // namespace lrp
