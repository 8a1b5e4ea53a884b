#include "lrp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "lrp/graphdist.hpp"
#include "lrp/parallel.hpp"
#include "lrp/renorm.hpp"
#include "lrp/rng.hpp"
#include "lrp/sampler.hpp"

namespace lrp {

namespace {

enum : std::uint64_t {
  kTagTheta = 1,
  kTagGrowth = 2,
  kTagLowerTail = 3,
  kTagBallTail = 4,
  kTagStretched = 5,
  kTagMetric = 6,
  kTagCoupling = 7,
};

BoxShape distance_box(const ExperimentConfig& config, std::int32_t n, bool* elongated) {
  const int d = config.kernel.dim;
  if (d >= 2 && config.cross_section > 0 && config.cross_section < n) {
    std::vector<std::int32_t> sides(static_cast<std::size_t>(d), config.cross_section);
    sides[0] = n;
    if (elongated) *elongated = true;
    return BoxShape::rect(std::move(sides));
  }
  if (elongated) *elongated = false;
  return BoxShape::cube(d, n);
}

VertexId axis_target(const BoxIndexer& idx, std::int32_t n) {
  std::vector<std::int32_t> c(static_cast<std::size_t>(idx.dim()), 0);
  c[0] = n - 1;
  return idx.index(c);
}

VertexId center_vertex(const BoxIndexer& idx) {
  std::vector<std::int32_t> c(static_cast<std::size_t>(idx.dim()));
  for (int i = 0; i < idx.dim(); ++i) c[static_cast<std::size_t>(i)] = idx.side(i) / 2;
  return idx.index(c);
}

bool needs_table(const KernelSpec& spec) {
  return !(spec.beta == 0.0 && spec.variant == KernelVariant::kSelfSimilar);
}

std::optional<KernelTable> build_table(const KernelSpec& spec, const BoxShape& shape) {
  if (!needs_table(spec)) return std::nullopt;
  std::int32_t r = 1;
  for (std::int32_t s : shape.sides) r = std::max(r, s - 1);
  return std::make_optional<KernelTable>(spec, r);
}

// Distance samples D(0, (n-1)e_1), one per replica, per size.
std::vector<std::vector<double>> collect_distance_samples(const ExperimentConfig& config,
                                                          std::span<const std::int32_t> sizes,
                                                          std::uint64_t tag, int replicas,
                                                          bool* elongated) {
  std::vector<std::vector<double>> samples(sizes.size());
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const std::int32_t n = sizes[si];
    const BoxShape shape = distance_box(config, n, elongated);
    const auto table = build_table(config.kernel, shape);
    samples[si].assign(static_cast<std::size_t>(replicas), 0.0);
    parallel_for(replicas, config.threads, [&](std::int64_t rep) {
      const std::uint64_t seed =
          replica_seed(config.master_seed, tag, static_cast<std::int64_t>(si), rep);
      const Environment env =
          sample_box(config.kernel, shape, seed, table ? &*table : nullptr);
      const VertexId source[1] = {0};
      const DistanceField field = bfs_distances(env, source);
      samples[si][static_cast<std::size_t>(rep)] =
          static_cast<double>(field.at(axis_target(env.indexer(), n)));
    });
  }
  return samples;
}

// Geometric radius ladder 4, 5, 8, 11, 16, ... capped at half the box side
// (a ball of that radius around the center always reaches the boundary).
// Radii below 4 sit deep in the deterministic lattice regime |B_k| ~ 2k+1
// and would only distort the growth fit.
std::vector<std::int32_t> radius_ladder(std::int32_t n) {
  std::vector<std::int32_t> radii;
  double r = 4.0;
  while (static_cast<std::int32_t>(r) <= n / 2) {
    const std::int32_t ri = static_cast<std::int32_t>(r);
    if (radii.empty() || ri > radii.back()) radii.push_back(ri);
    r *= std::sqrt(2.0);
  }
  return radii;
}

struct BallSamples {
  std::vector<std::int32_t> radii;              // kept radii
  std::vector<std::vector<double>> sizes;       // per radius, per replica
  std::vector<std::int64_t> saturated;          // clipped replicas per kept radius
  int discarded = 0;
  std::int32_t box_side = 0;
};

BallSamples collect_ball_samples(const ExperimentConfig& config, std::uint64_t tag,
                                 int replicas) {
  const std::int32_t n = config.sizes.back();
  const BoxShape shape = BoxShape::cube(config.kernel.dim, n);
  const auto table = build_table(config.kernel, shape);
  const std::vector<std::int32_t> ladder = radius_ladder(n);
  if (ladder.empty()) throw std::runtime_error("ball samples: box too small for any radius");
  const std::int32_t k_max = ladder.back();

  std::vector<std::vector<std::int64_t>> at_ladder(static_cast<std::size_t>(replicas));
  std::vector<std::int32_t> saturation(static_cast<std::size_t>(replicas));
  parallel_for(replicas, config.threads, [&](std::int64_t rep) {
    const std::uint64_t seed = replica_seed(config.master_seed, tag, 0, rep);
    const Environment env = sample_box(config.kernel, shape, seed, table ? &*table : nullptr);
    const BallCurve curve = ball_curve(env, center_vertex(env.indexer()), k_max);
    auto& values = at_ladder[static_cast<std::size_t>(rep)];
    values.reserve(ladder.size());
    for (std::int32_t r : ladder) values.push_back(curve.sizes[static_cast<std::size_t>(r)]);
    saturation[static_cast<std::size_t>(rep)] =
        curve.saturated_from ? *curve.saturated_from : k_max + 1;
  });

  // A radius stays in when at most 0.5% of replicas saturated there; those
  // few clipped values are only lower bounds, so they enter the medians as
  // +infinity, which leaves the median exact while the saturated fraction
  // stays below one half.
  const std::int64_t allowed =
      static_cast<std::int64_t>(0.005 * static_cast<double>(replicas));
  BallSamples out;
  out.box_side = n;
  for (std::size_t li = 0; li < ladder.size(); ++li) {
    std::int64_t saturated = 0;
    for (std::int32_t s : saturation)
      if (ladder[li] >= s) ++saturated;
    if (saturated > allowed) {
      ++out.discarded;
      continue;
    }
    out.radii.push_back(ladder[li]);
    out.saturated.push_back(saturated);
    std::vector<double> vals(static_cast<std::size_t>(replicas));
    for (int rep = 0; rep < replicas; ++rep) {
      const bool clipped = ladder[li] >= saturation[static_cast<std::size_t>(rep)];
      vals[static_cast<std::size_t>(rep)] =
          clipped ? std::numeric_limits<double>::infinity()
                  : static_cast<double>(at_ladder[static_cast<std::size_t>(rep)][li]);
    }
    out.sizes.push_back(std::move(vals));
  }
  return out;
}

}  // namespace

std::uint64_t replica_seed(std::uint64_t master_seed, std::uint64_t experiment_tag,
                           std::int64_t size_index, std::int64_t replica) {
  const std::int64_t parts[3] = {static_cast<std::int64_t>(experiment_tag), size_index, replica};
  return CounterStream::keyed(master_seed, kDomainReplica, parts).next();
}

void ExperimentConfig::validate() const {
  kernel.validate();
  if (sizes.empty()) throw std::invalid_argument("config: sizes must not be empty");
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    if (sizes[i] >= sizes[i + 1])
      throw std::invalid_argument("config: sizes must be strictly increasing");
  }
  if (sizes.front() < 2) throw std::invalid_argument("config: sizes must be >= 2");
  if (replicas < 1) throw std::invalid_argument("config: replicas must be >= 1");
  if (bootstrap_rounds < 0) throw std::invalid_argument("config: bootstrap_rounds must be >= 0");
  if (threads < 0) throw std::invalid_argument("config: threads must be >= 0");
  if (!(delta > 0.0)) throw std::invalid_argument("config: delta must be > 0");
  if (block_k < 1) throw std::invalid_argument("config: block_k must be >= 1");
  for (std::size_t i = 0; i + 1 < eps_grid.size(); ++i) {
    if (eps_grid[i] >= eps_grid[i + 1])
      throw std::invalid_argument("config: eps_grid must be strictly increasing");
  }
  for (double e : eps_grid) {
    if (!(e > 0.0) || e >= 1.0)
      throw std::invalid_argument("config: eps_grid values must lie in (0, 1)");
  }
}

ThetaEstimate estimate_theta(const ExperimentConfig& config) {
  config.validate();
  if (config.sizes.size() < 4)
    throw std::invalid_argument("estimate_theta: need at least 4 sizes");

  ThetaEstimate est;
  est.samples = collect_distance_samples(config, config.sizes, kTagTheta, config.replicas,
                                         &est.elongated);
  std::vector<double> separations;
  for (std::int32_t n : config.sizes) {
    separations.push_back(static_cast<double>(n - 1));
    est.separations.push_back(n - 1);
  }
  est.fit = fit_power_law_replicates(separations, est.samples, Aggregate::kMedian,
                                     config.bootstrap_rounds,
                                     replica_seed(config.master_seed, kTagTheta, -1, -1));
  est.mean_slope = fit_power_law_replicates(separations, est.samples, Aggregate::kMean, 0, 0)
                       .slope;
  return est;
}

VolumeGrowthResult estimate_volume_exponent(const ExperimentConfig& config, double theta_hat,
                                            double theta_lo, double theta_hi) {
  config.validate();
  if (!(theta_hat > 0.0))
    throw std::invalid_argument("estimate_volume_exponent: theta_hat must be > 0");
  const int replicas = config.replicas;
  const BallSamples balls = collect_ball_samples(config, kTagGrowth, replicas);
  if (balls.radii.size() < 4)
    throw std::runtime_error(
        "estimate_volume_exponent: fewer than 4 unsaturated radii; box too small");

  VolumeGrowthResult result;
  result.radii = balls.radii;
  result.box_side = balls.box_side;
  result.discarded_radii = balls.discarded;
  std::vector<double> extents;
  for (std::int32_t r : balls.radii) extents.push_back(static_cast<double>(2 * r + 1));
  result.fit = fit_power_law_replicates(extents, balls.sizes, Aggregate::kMedian,
                                        config.bootstrap_rounds,
                                        replica_seed(config.master_seed, kTagGrowth, -1, -1));
  const double d = static_cast<double>(config.kernel.dim);
  result.target = d / theta_hat;
  result.diff = result.fit.slope - result.target;
  const double target_hi = d / std::min(theta_lo, theta_hat);
  const double target_lo = d / std::max(theta_hi, theta_hat);
  result.diff_lo = result.fit.ci_lo - target_hi;
  result.diff_hi = result.fit.ci_hi - target_lo;
  return result;
}

BallTailResult ball_tail_experiment(const ExperimentConfig& config, double theta_hat) {
  config.validate();
  if (!(theta_hat > 0.0))
    throw std::invalid_argument("ball_tail_experiment: theta_hat must be > 0");
  const int replicas =
      config.balltail_replicas > 0 ? config.balltail_replicas : config.replicas;
  const BallSamples balls = collect_ball_samples(config, kTagBallTail, replicas);
  if (balls.radii.empty())
    throw std::runtime_error("ball_tail_experiment: every radius saturated");

  // The tail needs exact sizes, not lower bounds: use the largest radius
  // with no clipped replica at all.
  std::size_t pick = balls.radii.size();
  for (std::size_t i = 0; i < balls.radii.size(); ++i) {
    if (balls.saturated[i] == 0) pick = i;
  }
  if (pick == balls.radii.size())
    throw std::runtime_error("ball_tail_experiment: no fully unsaturated radius");

  BallTailResult result;
  result.radius = balls.radii[pick];
  result.box_side = balls.box_side;
  result.replicas = replicas;
  const std::vector<double>& values = balls.sizes[pick];
  const double med = median(values);
  const double d = static_cast<double>(config.kernel.dim);
  result.scale_c = med * std::pow(static_cast<double>(result.radius), -d / theta_hat);

  // P(K) = fraction of replicas with |B_r| >= K * median.
  for (std::int32_t k = 1;; ++k) {
    std::int64_t hits = 0;
    for (double v : values) {
      if (v >= med * static_cast<double>(k)) ++hits;
    }
    result.phat.push_back(static_cast<double>(hits) / static_cast<double>(replicas));
    result.ci.push_back(wilson_interval(hits, replicas));
    if (hits == 0 || k > 64) break;
  }
  for (std::size_t i = 1; i < result.phat.size(); ++i) {
    if (result.phat[i] > result.phat[i - 1]) result.nonincreasing = false;
  }
  result.observable_k = 0;
  for (std::size_t i = 0; i < result.phat.size(); ++i) {
    if (result.phat[i] > 0.0) result.observable_k = static_cast<int>(i) + 1;
  }
  if (result.observable_k >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = 1; k <= result.observable_k; ++k) {
      const double x = static_cast<double>(k);
      const double y = std::log(result.phat[static_cast<std::size_t>(k - 1)]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double n = static_cast<double>(result.observable_k);
    result.log_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return result;
}

LowerTailCurve lower_tail_experiment(const ExperimentConfig& config, double theta_hat) {
  config.validate();
  if (!(theta_hat > 0.0))
    throw std::invalid_argument("lower_tail_experiment: theta_hat must be > 0");
  if (config.eps_grid.empty())
    throw std::invalid_argument("lower_tail_experiment: eps_grid is empty");

  const std::int32_t n = config.sizes.back();
  const std::int64_t separation = n - 1;
  const double scale = std::pow(static_cast<double>(separation), theta_hat);
  for (double eps : config.eps_grid) {
    if (eps * scale < 1.0)
      throw std::invalid_argument(
          "lower_tail_experiment: eps_grid violates eps * |x|^theta_hat >= 1");
  }

  const int replicas =
      config.lowertail_replicas > 0 ? config.lowertail_replicas : config.replicas;
  const std::int32_t sizes_one[1] = {n};
  const auto samples =
      collect_distance_samples(config, sizes_one, kTagLowerTail, replicas, nullptr);
  const std::vector<double>& dist = samples[0];

  LowerTailCurve curve;
  curve.eps = config.eps_grid;
  curve.replicas = replicas;
  curve.separation = separation;
  curve.theta_hat = theta_hat;
  curve.target = 2.0 * static_cast<double>(config.kernel.dim) / theta_hat;

  for (double eps : config.eps_grid) {
    const double threshold = eps * scale;
    std::int64_t hits = 0;
    for (double v : dist) {
      if (v <= threshold) ++hits;
    }
    curve.hits.push_back(hits);
    curve.phat.push_back(static_cast<double>(hits) / static_cast<double>(replicas));
    curve.ci.push_back(wilson_interval(hits, replicas));
  }

  std::vector<double> used_eps, used_p;
  for (std::size_t i = 0; i < curve.eps.size(); ++i) {
    const bool ok = curve.phat[i] > 0.0 &&
                    (curve.ci[i].hi - curve.ci[i].lo) <= 0.5 * curve.phat[i];
    curve.used.push_back(ok);
    if (ok) {
      used_eps.push_back(curve.eps[i]);
      used_p.push_back(curve.phat[i]);
    }
  }
  if (used_eps.size() >= 4) curve.slope = fit_power_law(used_eps, used_p).slope;
  return curve;
}

StretchedMomentResult stretched_moment_diagnostic(const ExperimentConfig& config,
                                                  double theta_hat, double eta) {
  config.validate();
  if (!(theta_hat > 0.0))
    throw std::invalid_argument("stretched_moment_diagnostic: theta_hat must be > 0");
  if (eta < 0.0) throw std::invalid_argument("stretched_moment_diagnostic: eta must be >= 0");

  StretchedMomentResult result;
  result.eta = eta;
  const int d = config.kernel.dim;
  for (std::int32_t n : config.sizes) {
    double count = 1.0;
    for (int i = 0; i < d; ++i) count *= static_cast<double>(n);
    if (count > static_cast<double>(config.exact_diameter_threshold))
      throw std::invalid_argument(
          "stretched_moment_diagnostic: exact diameter infeasible at size " + std::to_string(n));
  }

  for (std::size_t si = 0; si < config.sizes.size(); ++si) {
    const std::int32_t n = config.sizes[si];
    const BoxShape shape = BoxShape::cube(d, n);
    const KernelTable table(config.kernel, n - 1);
    std::vector<VertexId> all(static_cast<std::size_t>(shape.vertex_count()));
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<VertexId>(i);

    std::vector<double> values(static_cast<std::size_t>(config.replicas));
    parallel_for(config.replicas, config.threads, [&](std::int64_t rep) {
      const std::uint64_t seed =
          replica_seed(config.master_seed, kTagStretched, static_cast<std::int64_t>(si), rep);
      const Environment env = sample_box(config.kernel, shape, seed, &table);
      const DiameterResult dia =
          diameter(env, all, DiameterMode::kExact, config.exact_diameter_threshold, 1);
      const double ratio = static_cast<double>(dia.value) / std::pow(static_cast<double>(n), theta_hat);
      values[static_cast<std::size_t>(rep)] = std::exp(std::pow(ratio, eta));
    });
    result.sizes.push_back(n);
    result.moments.push_back(mean(values));
  }

  result.mk_pvalue = mann_kendall_pvalue(result.moments);
  int s = 0;
  for (std::size_t i = 0; i < result.moments.size(); ++i) {
    for (std::size_t j = i + 1; j < result.moments.size(); ++j) {
      if (result.moments[j] > result.moments[i]) ++s;
      else if (result.moments[j] < result.moments[i]) --s;
    }
  }
  // A monotone rise whose per-size slope strictly shrinks is convergence
  // from below, not growth; only a sustained (non-decelerating) significant
  // rise counts against boundedness.
  bool decelerating = result.moments.size() >= 3;
  for (std::size_t i = 2; i < result.moments.size(); ++i) {
    const double d1 = (result.moments[i - 1] - result.moments[i - 2]) /
                      static_cast<double>(result.sizes[i - 1] - result.sizes[i - 2]);
    const double d2 = (result.moments[i] - result.moments[i - 1]) /
                      static_cast<double>(result.sizes[i] - result.sizes[i - 1]);
    if (!(d2 > 0.0) || !(d1 > 0.0) || d2 >= d1) decelerating = false;
  }
  result.increasing_trend = result.mk_pvalue <= 0.05 && s > 0 && !decelerating;
  result.bounded = !result.increasing_trend;
  return result;
}

MetricBoxCountResult metric_box_count(const ExperimentConfig& config, double theta_hat,
                                      std::int32_t m) {
  config.validate();
  if (!(theta_hat > 0.0))
    throw std::invalid_argument("metric_box_count: theta_hat must be > 0");
  const std::int32_t n = config.sizes.back();
  if (m < 2 || n % m != 0)
    throw std::invalid_argument("metric_box_count: m must divide the box side");

  const std::int32_t block = n / m;
  const std::int32_t radius = static_cast<std::int32_t>(
      config.metric_radius_scale * std::pow(static_cast<double>(block), theta_hat));
  const int replicas = config.metric_replicas > 0 ? config.metric_replicas : config.replicas;
  const BoxShape shape = BoxShape::cube(config.kernel.dim, n);
  const auto table = build_table(config.kernel, shape);

  MetricBoxCountResult result;
  result.m = m;
  result.block_side = block;
  result.radius = radius;
  result.max_counts.assign(static_cast<std::size_t>(replicas), 0);

  parallel_for(replicas, config.threads, [&](std::int64_t rep) {
    const std::uint64_t seed =
        replica_seed(config.master_seed, kTagMetric, static_cast<std::int64_t>(m), rep);
    const Environment env = sample_box(config.kernel, shape, seed, table ? &*table : nullptr);
    BlockGrid grid(env.shape(), block);
    std::int64_t worst = 0;
    for (std::int64_t b = 0; b < grid.block_count(); ++b) {
      const std::vector<VertexId> sources = grid.block_vertices(b);
      const DistanceField field = bfs_distances(env, sources);
      std::vector<std::int32_t> block_min(static_cast<std::size_t>(grid.block_count()), -1);
      for (VertexId v = 0; v < env.vertex_count(); ++v) {
        const std::int32_t dv = field.at(v);
        if (dv < 0 || dv > radius) continue;
        auto& slot = block_min[static_cast<std::size_t>(grid.block_of(v))];
        if (slot < 0 || dv < slot) slot = dv;
      }
      std::int64_t count = 0;
      for (std::int32_t dv : block_min) {
        if (dv >= 0) ++count;
      }
      worst = std::max(worst, count);
    }
    result.max_counts[static_cast<std::size_t>(rep)] = worst;
  });

  std::vector<double> as_double(result.max_counts.begin(), result.max_counts.end());
  result.median_max = median(as_double);
  result.normalizer = result.median_max / std::log(static_cast<double>(m));
  return result;
}

CouplingCheckResult coupling_check(const ExperimentConfig& config) {
  config.validate();
  const std::int32_t n = config.sizes.back();
  const BoxShape shape = BoxShape::cube(config.kernel.dim, n);
  KernelSpec low = config.kernel;
  low.beta = config.beta_low;
  KernelSpec high = config.kernel;
  high.beta = config.beta_high;

  CouplingCheckResult result;
  result.replicas = config.coupling_replicas;
  std::vector<std::int64_t> edge_bad(static_cast<std::size_t>(config.coupling_replicas), 0);
  std::vector<std::int64_t> dist_bad(static_cast<std::size_t>(config.coupling_replicas), 0);
  std::vector<std::int64_t> low_count(static_cast<std::size_t>(config.coupling_replicas), 0);
  std::vector<std::int64_t> high_count(static_cast<std::size_t>(config.coupling_replicas), 0);

  parallel_for(config.coupling_replicas, config.threads, [&](std::int64_t rep) {
    const std::uint64_t seed = replica_seed(config.master_seed, kTagCoupling, 0, rep);
    const CouplingPair pair = sample_coupled(low, high, shape, seed);
    low_count[static_cast<std::size_t>(rep)] = pair.low.long_edge_count();
    high_count[static_cast<std::size_t>(rep)] = pair.high.long_edge_count();

    std::int64_t bad = 0;
    pair.low.for_each_long_edge([&](VertexId u, VertexId v) {
      const auto nbrs = pair.high.long_neighbors(u);
      if (!std::binary_search(nbrs.begin(), nbrs.end(), v)) ++bad;
    });
    edge_bad[static_cast<std::size_t>(rep)] = bad;

    const VertexId source[1] = {0};
    const DistanceField d_low = bfs_distances(pair.low, source);
    const DistanceField d_high = bfs_distances(pair.high, source);
    std::int64_t dbad = 0;
    for (VertexId v = 0; v < pair.low.vertex_count(); ++v) {
      if (d_high.at(v) > d_low.at(v)) ++dbad;
    }
    dist_bad[static_cast<std::size_t>(rep)] = dbad;
  });

  for (int rep = 0; rep < config.coupling_replicas; ++rep) {
    result.edge_violations += edge_bad[static_cast<std::size_t>(rep)];
    result.distance_violations += dist_bad[static_cast<std::size_t>(rep)];
    result.low_edges += low_count[static_cast<std::size_t>(rep)];
    result.high_edges += high_count[static_cast<std::size_t>(rep)];
  }
  return result;
}

}  // namespace lrp
