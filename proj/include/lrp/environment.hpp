#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "lrp/box.hpp"
#include "lrp/kernel.hpp"

namespace lrp {

// One sampled percolation configuration on a finite box. Only long edges
// (inf-norm displacement >= 2) are stored; nearest-neighbor edges are open
// by construction and handled implicitly by the distance routines.
// Immutable after construction; concurrent reads are safe.
class Environment {
 public:
  // Edges may arrive in any order as (u, v) pairs with u < v; they are
  // validated (in range, no self loops, no duplicates, long range only).
  Environment(BoxShape shape, KernelSpec spec, std::uint64_t seed,
              std::vector<std::pair<VertexId, VertexId>> long_edges);

  const BoxShape& shape() const { return shape_; }
  const KernelSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  const BoxIndexer& indexer() const { return indexer_; }

  std::int64_t vertex_count() const { return indexer_.vertex_count(); }
  std::int64_t long_edge_count() const { return static_cast<std::int64_t>(adj_.size()) / 2; }

  std::span<const VertexId> long_neighbors(VertexId v) const {
    return {adj_.data() + offsets_[static_cast<std::size_t>(v)],
            adj_.data() + offsets_[static_cast<std::size_t>(v) + 1]};
  }

  // Visits each long edge once, as (u, v) with u < v, in vertex order.
  template <typename Fn>
  void for_each_long_edge(Fn&& fn) const {
    const auto n = indexer_.vertex_count();
    for (VertexId u = 0; u < n; ++u) {
      for (VertexId v : long_neighbors(u)) {
        if (v > u) fn(u, v);
      }
    }
  }

 private:
  BoxShape shape_;
  KernelSpec spec_;
  std::uint64_t seed_;
  BoxIndexer indexer_;
  std::vector<std::int64_t> offsets_;
  std::vector<VertexId> adj_;
};

// FNV-1a over the serialized form; used for determinism checks.
std::uint64_t environment_hash(const Environment& env);

}  // namespace lrp
