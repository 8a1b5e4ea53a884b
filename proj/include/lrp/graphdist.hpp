#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lrp/environment.hpp"

namespace lrp {

struct RenormGraph;  // defined in renorm.hpp

// Exact unit-weight distances from a source set. Nearest-neighbor edges are
// generated on the fly (3^d - 1 offsets), long edges come from the
// environment's adjacency. A restriction confines paths to a vertex subset.
struct DistanceField {
  static constexpr std::int32_t kUnreachable = -1;

  std::vector<VertexId> sources;
  std::vector<std::int32_t> dist;                    // indexed by vertex
  std::optional<std::vector<VertexId>> restriction;  // sorted, when given

  std::int32_t at(VertexId v) const { return dist[static_cast<std::size_t>(v)]; }
};

DistanceField bfs_distances(const Environment& env, std::span<const VertexId> sources,
                            std::span<const VertexId> restriction = {});

// k -> |B_k|, cumulative ball sizes around a center. Radii from the first
// boundary contact onward are flagged: those sizes are lower bounds only.
struct BallCurve {
  std::vector<std::int64_t> sizes;  // index k = 0..k_max
  std::optional<std::int32_t> saturated_from;

  std::int32_t k_max() const { return static_cast<std::int32_t>(sizes.size()) - 1; }
  bool saturated(std::int32_t k) const { return saturated_from && k >= *saturated_from; }
};

BallCurve ball_curve(const Environment& env, VertexId center, std::int32_t k_max);

enum class DiameterMode { kExact, kDoubleSweepLowerBound };

struct DiameterResult {
  std::int32_t value;
  bool exact;
};

// Diameter of a subset under within-subset distances. Exact mode sweeps a
// BFS from every vertex and is gated by the threshold; the double-sweep mode
// returns a lower bound.
DiameterResult diameter(const Environment& env, std::span<const VertexId> subset,
                        DiameterMode mode, std::int64_t exact_threshold = 20000,
                        int threads = 1);

// Shortest open path between disjoint sets that never traverses a direct
// A-B edge (nearest-neighbor adjacencies between the sets count as direct
// edges too). Empty when no such path exists inside the box.
std::optional<std::int32_t> indirect_distance(const Environment& env,
                                              std::span<const VertexId> set_a,
                                              std::span<const VertexId> set_b);

struct DegreeStats {
  std::vector<std::pair<VertexId, std::int64_t>> degree;  // per vertex of Z
  double average_degree;                                  // over Z
  std::vector<VertexId> boundary;                         // S_1(Z), sorted
  std::vector<std::int64_t> neighborhood_degree;  // per coarse vertex, when a renorm
                                                  // context is supplied
};

DegreeStats degree_stats(const Environment& env, std::span<const VertexId> z,
                         const RenormGraph* renorm_context = nullptr);

// Exact P(D(a, b) <= threshold) per pair by enumerating all configurations
// of the possible long edges and summing product-Bernoulli weights. The
// number of long-edge slots is capped (default 24).
struct PairProbability {
  VertexId a;
  VertexId b;
  double prob;
};

std::vector<PairProbability> exact_distance_distribution(
    const KernelSpec& spec, const BoxShape& shape,
    std::span<const std::pair<VertexId, VertexId>> pairs, std::int32_t threshold,
    int max_edges = 24);

}  // namespace lrp
