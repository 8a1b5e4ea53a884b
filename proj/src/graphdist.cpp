#include "lrp/graphdist.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lrp/parallel.hpp"
#include "lrp/renorm.hpp"

namespace lrp {

namespace {

// All nonzero offsets in {-1, 0, 1}^d.
std::vector<std::array<std::int32_t, 8>> make_nn_offsets(int d) {
  std::vector<std::array<std::int32_t, 8>> out;
  std::array<std::int32_t, 8> off{};
  off.fill(0);
  std::vector<std::int32_t> digit(static_cast<std::size_t>(d), -1);
  while (true) {
    bool nonzero = false;
    for (int i = 0; i < d; ++i) {
      off[static_cast<std::size_t>(i)] = digit[static_cast<std::size_t>(i)];
      nonzero |= digit[static_cast<std::size_t>(i)] != 0;
    }
    if (nonzero) out.push_back(off);
    int axis = d - 1;
    while (axis >= 0) {
      if (digit[static_cast<std::size_t>(axis)] < 1) {
        ++digit[static_cast<std::size_t>(axis)];
        for (int i = axis + 1; i < d; ++i) digit[static_cast<std::size_t>(i)] = -1;
        break;
      }
      --axis;
    }
    if (axis < 0) break;
  }
  return out;
}

struct BfsLimits {
  const std::vector<std::uint8_t>* domain = nullptr;  // restrict to domain[v] != 0
  std::int32_t max_level = std::numeric_limits<std::int32_t>::max();
  // When both side masks are set, edges joining the two sides are skipped.
  const std::vector<std::uint8_t>* side_a = nullptr;
  const std::vector<std::uint8_t>* side_b = nullptr;
};

// Level-synchronous BFS over implicit nearest-neighbor edges plus explicit
// long edges. Writes levels into dist (must be pre-sized, filled with -1).
void bfs_engine(const Environment& env, std::span<const VertexId> sources,
                std::vector<std::int32_t>& dist, const BfsLimits& lim,
                std::vector<VertexId>* frontier_buf = nullptr,
                std::vector<VertexId>* next_buf = nullptr) {
  const BoxIndexer& idx = env.indexer();
  const int d = idx.dim();
  static thread_local std::vector<std::array<std::int32_t, 8>> offsets;
  static thread_local int offsets_dim = 0;
  if (offsets_dim != d) {
    offsets = make_nn_offsets(d);
    offsets_dim = d;
  }

  std::vector<VertexId> local_frontier, local_next;
  std::vector<VertexId>& frontier = frontier_buf ? *frontier_buf : local_frontier;
  std::vector<VertexId>& next = next_buf ? *next_buf : local_next;
  frontier.clear();
  next.clear();

  auto allowed = [&](VertexId v) { return !lim.domain || (*lim.domain)[static_cast<std::size_t>(v)]; };
  auto blocked = [&](VertexId u, VertexId v) {
    if (!lim.side_a) return false;
    const auto& a = *lim.side_a;
    const auto& b = *lim.side_b;
    return (a[static_cast<std::size_t>(u)] && b[static_cast<std::size_t>(v)]) ||
           (b[static_cast<std::size_t>(u)] && a[static_cast<std::size_t>(v)]);
  };

  for (VertexId s : sources) {
    if (!allowed(s)) throw std::invalid_argument("bfs: source outside domain");
    if (dist[static_cast<std::size_t>(s)] != 0) {
      dist[static_cast<std::size_t>(s)] = 0;
      frontier.push_back(s);
    }
  }

  std::array<std::int32_t, 8> cu{}, cv{};
  std::int32_t level = 0;
  while (!frontier.empty() && level < lim.max_level) {
    next.clear();
    for (VertexId u : frontier) {
      idx.coords(u, {cu.data(), static_cast<std::size_t>(d)});
      for (const auto& off : offsets) {
        bool inside = true;
        for (int i = 0; i < d; ++i) {
          const std::int32_t c = cu[static_cast<std::size_t>(i)] + off[static_cast<std::size_t>(i)];
          if (c < 0 || c >= idx.side(i)) {
            inside = false;
            break;
          }
          cv[static_cast<std::size_t>(i)] = c;
        }
        if (!inside) continue;
        const VertexId v = idx.index({cv.data(), static_cast<std::size_t>(d)});
        if (dist[static_cast<std::size_t>(v)] >= 0 || !allowed(v) || blocked(u, v)) continue;
        dist[static_cast<std::size_t>(v)] = level + 1;
        next.push_back(v);
      }
      for (VertexId v : env.long_neighbors(u)) {
        if (dist[static_cast<std::size_t>(v)] >= 0 || !allowed(v) || blocked(u, v)) continue;
        dist[static_cast<std::size_t>(v)] = level + 1;
        next.push_back(v);
      }
    }
    frontier.swap(next);
    ++level;
  }
}

std::vector<std::uint8_t> make_mask(std::int64_t n, std::span<const VertexId> members) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(n), 0);
  for (VertexId v : members) {
    if (v < 0 || v >= n) throw std::invalid_argument("vertex subset: index out of range");
    mask[static_cast<std::size_t>(v)] = 1;
  }
  return mask;
}

std::int64_t implicit_degree(const BoxIndexer& idx, VertexId v) {
  std::array<std::int32_t, 8> c{};
  idx.coords(v, {c.data(), static_cast<std::size_t>(idx.dim())});
  std::int64_t count = 1;
  for (int i = 0; i < idx.dim(); ++i) {
    std::int64_t span = 1;
    if (c[static_cast<std::size_t>(i)] > 0) ++span;
    if (c[static_cast<std::size_t>(i)] < idx.side(i) - 1) ++span;
    count *= span;
  }
  return count - 1;
}

}  // namespace

DistanceField bfs_distances(const Environment& env, std::span<const VertexId> sources,
                            std::span<const VertexId> restriction) {
  if (sources.empty()) throw std::invalid_argument("bfs_distances: empty source set");
  DistanceField field;
  field.sources.assign(sources.begin(), sources.end());
  field.dist.assign(static_cast<std::size_t>(env.vertex_count()), DistanceField::kUnreachable);

  BfsLimits lim;
  std::vector<std::uint8_t> mask;
  if (!restriction.empty()) {
    mask = make_mask(env.vertex_count(), restriction);
    for (VertexId s : sources) {
      if (!mask[static_cast<std::size_t>(s)])
        throw std::invalid_argument("bfs_distances: source not inside restriction");
    }
    lim.domain = &mask;
    field.restriction.emplace(restriction.begin(), restriction.end());
    std::sort(field.restriction->begin(), field.restriction->end());
  }
  // Mark sources as unvisited sentinel for the engine.
  for (auto& v : field.dist) (void)v;
  bfs_engine(env, sources, field.dist, lim);
  for (VertexId s : field.sources) field.dist[static_cast<std::size_t>(s)] = 0;
  return field;
}

BallCurve ball_curve(const Environment& env, VertexId center, std::int32_t k_max) {
  if (center < 0 || center >= env.vertex_count())
    throw std::invalid_argument("ball_curve: center outside box");
  if (k_max < 0) throw std::invalid_argument("ball_curve: negative radius");

  std::vector<std::int32_t> dist(static_cast<std::size_t>(env.vertex_count()), -1);
  BfsLimits lim;
  lim.max_level = k_max;
  const VertexId sources[1] = {center};
  bfs_engine(env, sources, dist, lim);
  dist[static_cast<std::size_t>(center)] = 0;

  BallCurve curve;
  curve.sizes.assign(static_cast<std::size_t>(k_max) + 1, 0);
  const BoxIndexer& idx = env.indexer();
  std::int32_t first_boundary = std::numeric_limits<std::int32_t>::max();
  for (VertexId v = 0; v < env.vertex_count(); ++v) {
    const std::int32_t dv = dist[static_cast<std::size_t>(v)];
    if (dv < 0 || dv > k_max) continue;
    ++curve.sizes[static_cast<std::size_t>(dv)];
    if (idx.on_boundary(v)) first_boundary = std::min(first_boundary, dv);
  }
  for (std::size_t k = 1; k < curve.sizes.size(); ++k) curve.sizes[k] += curve.sizes[k - 1];
  if (first_boundary <= k_max) curve.saturated_from = first_boundary;
  return curve;
}

DiameterResult diameter(const Environment& env, std::span<const VertexId> subset,
                        DiameterMode mode, std::int64_t exact_threshold, int threads) {
  if (subset.empty()) throw std::invalid_argument("diameter: empty subset");
  const std::vector<std::uint8_t> mask = make_mask(env.vertex_count(), subset);

  auto eccentricity = [&](VertexId source, std::vector<std::int32_t>& dist,
                          std::vector<VertexId>& f1, std::vector<VertexId>& f2,
                          VertexId* farthest) {
    std::fill(dist.begin(), dist.end(), -1);
    BfsLimits lim;
    lim.domain = &mask;
    const VertexId sources[1] = {source};
    bfs_engine(env, sources, dist, lim, &f1, &f2);
    dist[static_cast<std::size_t>(source)] = 0;
    std::int32_t ecc = 0;
    VertexId far = source;
    for (VertexId v : subset) {
      const std::int32_t dv = dist[static_cast<std::size_t>(v)];
      if (dv < 0) throw std::runtime_error("diameter: subset is not connected within itself");
      if (dv > ecc || (dv == ecc && v < far)) {
        ecc = dv;
        far = v;
      }
    }
    if (farthest) *farthest = far;
    return ecc;
  };

  if (mode == DiameterMode::kDoubleSweepLowerBound) {
    std::vector<std::int32_t> dist(static_cast<std::size_t>(env.vertex_count()));
    std::vector<VertexId> f1, f2;
    VertexId far = subset[0];
    eccentricity(subset[0], dist, f1, f2, &far);
    const std::int32_t bound = eccentricity(far, dist, f1, f2, nullptr);
    return DiameterResult{bound, false};
  }

  if (static_cast<std::int64_t>(subset.size()) > exact_threshold)
    throw std::invalid_argument("diameter: subset exceeds the exact-mode threshold");

  std::atomic<std::int32_t> best{0};
  parallel_for(static_cast<std::int64_t>(subset.size()), threads, [&](std::int64_t i) {
    static thread_local std::vector<std::int32_t> dist;
    static thread_local std::vector<VertexId> f1, f2;
    dist.assign(static_cast<std::size_t>(env.vertex_count()), -1);
    const std::int32_t ecc =
        eccentricity(subset[static_cast<std::size_t>(i)], dist, f1, f2, nullptr);
    std::int32_t seen = best.load();
    while (ecc > seen && !best.compare_exchange_weak(seen, ecc)) {
    }
  });
  return DiameterResult{best.load(), true};
}

std::optional<std::int32_t> indirect_distance(const Environment& env,
                                              std::span<const VertexId> set_a,
                                              std::span<const VertexId> set_b) {
  if (set_a.empty() || set_b.empty())
    throw std::invalid_argument("indirect_distance: empty set");
  const std::vector<std::uint8_t> in_a = make_mask(env.vertex_count(), set_a);
  const std::vector<std::uint8_t> in_b = make_mask(env.vertex_count(), set_b);
  for (VertexId v : set_b) {
    if (in_a[static_cast<std::size_t>(v)])
      throw std::invalid_argument("indirect_distance: sets overlap");
  }

  std::vector<std::int32_t> dist(static_cast<std::size_t>(env.vertex_count()), -1);
  BfsLimits lim;
  lim.side_a = &in_a;
  lim.side_b = &in_b;
  bfs_engine(env, set_a, dist, lim);
  for (VertexId s : set_a) dist[static_cast<std::size_t>(s)] = 0;

  std::int32_t best = std::numeric_limits<std::int32_t>::max();
  for (VertexId v : set_b) {
    const std::int32_t dv = dist[static_cast<std::size_t>(v)];
    if (dv >= 0) best = std::min(best, dv);
  }
  if (best == std::numeric_limits<std::int32_t>::max()) return std::nullopt;
  return best;
}

DegreeStats degree_stats(const Environment& env, std::span<const VertexId> z,
                         const RenormGraph* renorm_context) {
  const std::vector<std::uint8_t> in_z = make_mask(env.vertex_count(), z);
  DegreeStats stats;
  stats.degree.reserve(z.size());

  std::vector<std::uint8_t> boundary_mask(static_cast<std::size_t>(env.vertex_count()), 0);
  const BoxIndexer& idx = env.indexer();
  const int d = idx.dim();
  const auto offsets = make_nn_offsets(d);
  std::array<std::int32_t, 8> cu{}, cv{};

  double total = 0.0;
  for (VertexId u : z) {
    const std::int64_t deg =
        implicit_degree(idx, u) + static_cast<std::int64_t>(env.long_neighbors(u).size());
    stats.degree.emplace_back(u, deg);
    total += static_cast<double>(deg);

    idx.coords(u, {cu.data(), static_cast<std::size_t>(d)});
    for (const auto& off : offsets) {
      bool inside = true;
      for (int i = 0; i < d; ++i) {
        const std::int32_t c = cu[static_cast<std::size_t>(i)] + off[static_cast<std::size_t>(i)];
        if (c < 0 || c >= idx.side(i)) {
          inside = false;
          break;
        }
        cv[static_cast<std::size_t>(i)] = c;
      }
      if (!inside) continue;
      const VertexId v = idx.index({cv.data(), static_cast<std::size_t>(d)});
      if (!in_z[static_cast<std::size_t>(v)]) boundary_mask[static_cast<std::size_t>(v)] = 1;
    }
    for (VertexId v : env.long_neighbors(u)) {
      if (!in_z[static_cast<std::size_t>(v)]) boundary_mask[static_cast<std::size_t>(v)] = 1;
    }
  }
  stats.average_degree = z.empty() ? 0.0 : total / static_cast<double>(z.size());
  for (VertexId v = 0; v < env.vertex_count(); ++v) {
    if (boundary_mask[static_cast<std::size_t>(v)]) stats.boundary.push_back(v);
  }

  if (renorm_context != nullptr) {
    const std::int64_t blocks = renorm_context->block_count();
    stats.neighborhood_degree.resize(static_cast<std::size_t>(blocks));
    for (std::int64_t u = 0; u < blocks; ++u)
      stats.neighborhood_degree[static_cast<std::size_t>(u)] =
          renorm_context->neighborhood_degree(u);
  }
  return stats;
}

std::vector<PairProbability> exact_distance_distribution(
    const KernelSpec& spec, const BoxShape& shape,
    std::span<const std::pair<VertexId, VertexId>> pairs, std::int32_t threshold,
    int max_edges) {
  spec.validate();
  shape.validate();
  const BoxIndexer idx(shape);
  const std::int64_t n = idx.vertex_count();
  const int d = idx.dim();

  // Collect the possible long-edge slots and their probabilities.
  struct Slot {
    VertexId u, v;
    double p;
  };
  std::vector<Slot> slots;
  std::array<std::int32_t, 8> cu{}, cv{};
  std::vector<std::int32_t> w(static_cast<std::size_t>(d));
  for (VertexId u = 0; u < n; ++u) {
    idx.coords(u, {cu.data(), static_cast<std::size_t>(d)});
    for (VertexId v = u + 1; v < n; ++v) {
      idx.coords(v, {cv.data(), static_cast<std::size_t>(d)});
      std::int32_t inf = 0;
      for (int i = 0; i < d; ++i) {
        w[static_cast<std::size_t>(i)] = cv[static_cast<std::size_t>(i)] - cu[static_cast<std::size_t>(i)];
        inf = std::max(inf, std::abs(w[static_cast<std::size_t>(i)]));
      }
      if (inf < 2) continue;
      const double p = edge_probability_value(spec, w);
      if (p > 0.0) slots.push_back(Slot{u, v, p});
    }
  }
  if (static_cast<int>(slots.size()) > max_edges)
    throw std::invalid_argument("exact_distance_distribution: too many long-edge slots (" +
                                std::to_string(slots.size()) + ")");

  for (const auto& [a, b] : pairs) {
    if (a < 0 || b < 0 || a >= n || b >= n)
      throw std::invalid_argument("exact_distance_distribution: pair vertex out of range");
  }

  const auto offsets = make_nn_offsets(d);
  std::vector<std::vector<VertexId>> adj(static_cast<std::size_t>(n));
  std::vector<std::int32_t> dist(static_cast<std::size_t>(n));
  std::vector<VertexId> queue;
  std::vector<double> accum(pairs.size(), 0.0);

  const std::uint64_t configs = 1ull << slots.size();
  for (std::uint64_t mask = 0; mask < configs; ++mask) {
    double weight = 1.0;
    for (std::size_t e = 0; e < slots.size(); ++e) {
      weight *= (mask >> e) & 1 ? slots[e].p : 1.0 - slots[e].p;
    }
    if (weight == 0.0) continue;
    for (auto& lst : adj) lst.clear();
    for (std::size_t e = 0; e < slots.size(); ++e) {
      if ((mask >> e) & 1) {
        adj[static_cast<std::size_t>(slots[e].u)].push_back(slots[e].v);
        adj[static_cast<std::size_t>(slots[e].v)].push_back(slots[e].u);
      }
    }

    for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
      // Tiny BFS per pair; boxes here are small by the slot cap.
      std::fill(dist.begin(), dist.end(), -1);
      queue.clear();
      queue.push_back(pairs[pi].first);
      dist[static_cast<std::size_t>(pairs[pi].first)] = 0;
      for (std::size_t head = 0; head < queue.size(); ++head) {
        const VertexId x = queue[head];
        const std::int32_t dx = dist[static_cast<std::size_t>(x)];
        if (dx >= threshold) continue;
        idx.coords(x, {cu.data(), static_cast<std::size_t>(d)});
        for (const auto& off : offsets) {
          bool inside = true;
          for (int i = 0; i < d; ++i) {
            const std::int32_t c = cu[static_cast<std::size_t>(i)] + off[static_cast<std::size_t>(i)];
            if (c < 0 || c >= idx.side(i)) {
              inside = false;
              break;
            }
            cv[static_cast<std::size_t>(i)] = c;
          }
          if (!inside) continue;
          const VertexId y = idx.index({cv.data(), static_cast<std::size_t>(d)});
          if (dist[static_cast<std::size_t>(y)] < 0) {
            dist[static_cast<std::size_t>(y)] = dx + 1;
            queue.push_back(y);
          }
        }
        for (VertexId y : adj[static_cast<std::size_t>(x)]) {
          if (dist[static_cast<std::size_t>(y)] < 0) {
            dist[static_cast<std::size_t>(y)] = dx + 1;
            queue.push_back(y);
          }
        }
      }
      const std::int32_t dv = dist[static_cast<std::size_t>(pairs[pi].second)];
      if (dv >= 0 && dv <= threshold) accum[pi] += weight;
    }
  }

  std::vector<PairProbability> out;
  out.reserve(pairs.size());
  for (std::size_t pi = 0; pi < pairs.size(); ++pi)
    out.push_back(PairProbability{pairs[pi].first, pairs[pi].second, accum[pi]});
  return out;
}

}  // namespace lrp
