#pragma once

#include <cmath>

// Numeric gates used by both the verification suite and the run reports.
namespace lrp::criteria {

// Kernel exactness.
inline constexpr double kClosedFormAbsTol = 1e-10;
inline constexpr double kAggregationRelTol = 1e-8;

// Scaling reproduction (d = 1, beta = 1).
inline constexpr double kThetaCiWidthMax = 0.05;
inline constexpr double kVolumeSlopeTol = 0.15;   // |slope - 1/theta| bound
inline constexpr double kLowerTailSlopeTol = 0.3; // |slope - 2/theta| bound

// Ball-tail decay: at least geometric with the reference base 1.5, i.e. the
// fitted slope of ln P(K) must be <= -ln(1.5).
inline const double kBallTailMaxLogSlope = -std::log(1.5);

// Metric box counts: the log-normalized maxima max_count(m) / log(m) must
// stay within this factor across the tested m.
inline constexpr double kMetricLogRatioMax = 2.0;

// Statistical comparisons against exact oracles use three sigma.
inline constexpr double kSigmaGate = 3.0;

}  // namespace lrp::criteria
