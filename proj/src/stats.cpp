#include "lrp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lrp/rng.hpp"

namespace lrp {

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean: empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

namespace {

struct LineFit {
  double slope;
  double intercept;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("fit: degenerate abscissas");
  const double slope = (n * sxy - sx * sy) / denom;
  return LineFit{slope, (sy - slope * sx) / n};
}

void check_fit_inputs(std::span<const double> x, std::size_t ny) {
  if (x.size() != ny) throw std::invalid_argument("fit: size mismatch");
  if (x.size() < 4) throw std::invalid_argument("fit: need at least 4 points");
  for (double v : x) {
    if (!(v > 0.0)) throw std::invalid_argument("fit: abscissas must be positive");
  }
}

double aggregate_value(std::vector<double>& scratch, Aggregate aggregate) {
  return aggregate == Aggregate::kMedian ? median(scratch) : mean(scratch);
}

}  // namespace

ScalingFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  check_fit_inputs(x, y.size());
  ScalingFit fit;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0)) throw std::invalid_argument("fit: ordinates must be positive");
    fit.log_x.push_back(std::log(x[i]));
    fit.log_y.push_back(std::log(y[i]));
    fit.medians.push_back(y[i]);
  }
  const LineFit line = least_squares(fit.log_x, fit.log_y);
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.ci_lo = fit.ci_hi = line.slope;
  return fit;
}

ScalingFit fit_power_law_replicates(std::span<const double> x,
                                    const std::vector<std::vector<double>>& replicates,
                                    Aggregate aggregate, int bootstrap_rounds,
                                    std::uint64_t bootstrap_seed) {
  check_fit_inputs(x, replicates.size());
  ScalingFit fit;
  fit.bootstrap_rounds = bootstrap_rounds;

  std::vector<double> scratch;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (replicates[i].empty()) throw std::invalid_argument("fit: empty replicate list");
    scratch = replicates[i];
    const double agg = aggregate_value(scratch, aggregate);
    if (!(agg > 0.0) || !std::isfinite(agg))
      throw std::invalid_argument("fit: aggregated ordinates must be positive and finite");
    fit.log_x.push_back(std::log(x[i]));
    fit.log_y.push_back(std::log(agg));
    fit.medians.push_back(agg);
  }
  const LineFit line = least_squares(fit.log_x, fit.log_y);
  fit.slope = line.slope;
  fit.intercept = line.intercept;

  if (bootstrap_rounds <= 0) {
    fit.ci_lo = fit.ci_hi = fit.slope;
    return fit;
  }

  std::vector<double> slopes;
  slopes.reserve(static_cast<std::size_t>(bootstrap_rounds));
  std::vector<double> log_y(x.size());
  CounterStream rng = CounterStream::keyed(bootstrap_seed, kDomainBootstrap);
  for (int round = 0; round < bootstrap_rounds; ++round) {
    bool ok = true;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto& pool = replicates[i];
      scratch.resize(pool.size());
      for (std::size_t r = 0; r < pool.size(); ++r)
        scratch[r] = pool[static_cast<std::size_t>(rng.below(pool.size()))];
      const double agg = aggregate_value(scratch, aggregate);
      if (!(agg > 0.0) || !std::isfinite(agg)) {
        ok = false;
        break;
      }
      log_y[i] = std::log(agg);
    }
    if (!ok) continue;  // resample produced a nonpositive aggregate; skip
    slopes.push_back(least_squares(fit.log_x, log_y).slope);
  }
  if (slopes.empty()) {
    fit.ci_lo = fit.ci_hi = fit.slope;
    return fit;
  }
  std::sort(slopes.begin(), slopes.end());
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(slopes.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, slopes.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return slopes[lo] * (1.0 - frac) + slopes[hi] * frac;
  };
  fit.ci_lo = quantile(0.025);
  fit.ci_hi = quantile(0.975);
  return fit;
}

WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials) {
  if (trials <= 0) throw std::invalid_argument("wilson: no trials");
  if (successes < 0 || successes > trials)
    throw std::invalid_argument("wilson: successes out of range");
  constexpr double z = 1.959963984540054;  // 97.5% normal quantile
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  WilsonInterval ci{std::max(0.0, center - half), std::min(1.0, center + half), center};
  if (successes == 0) ci.lo = 0.0;
  if (successes == trials) ci.hi = 1.0;
  return ci;
}

namespace {

int mk_statistic(std::span<const double> values) {
  int s = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = i + 1; j < values.size(); ++j) {
      if (values[j] > values[i]) ++s;
      else if (values[j] < values[i]) --s;
    }
  }
  return s;
}

}  // namespace

double mann_kendall_pvalue(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 3) return 1.0;
  const int observed = std::abs(mk_statistic(values));

  if (n <= 9) {
    // Exact permutation null distribution.
    std::vector<double> perm(values.begin(), values.end());
    std::sort(perm.begin(), perm.end());
    std::int64_t total = 0, extreme = 0;
    do {
      ++total;
      if (std::abs(mk_statistic(perm)) >= observed) ++extreme;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(extreme) / static_cast<double>(total);
  }

  const double nn = static_cast<double>(n);
  const double var = nn * (nn - 1.0) * (2.0 * nn + 5.0) / 18.0;
  if (observed == 0) return 1.0;
  const double z = (static_cast<double>(observed) - 1.0) / std::sqrt(var);
  return std::erfc(z / std::sqrt(2.0));
}

}  // namespace lrp
