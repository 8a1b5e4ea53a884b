#include "lrp/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lrp {

namespace {

std::int32_t edge_inf_norm(const BoxIndexer& idx, VertexId u, VertexId v) {
  std::int32_t cu[8], cv[8];
  idx.coords(u, {cu, static_cast<std::size_t>(idx.dim())});
  idx.coords(v, {cv, static_cast<std::size_t>(idx.dim())});
  std::int32_t m = 0;
  for (int i = 0; i < idx.dim(); ++i) m = std::max(m, std::abs(cu[i] - cv[i]));
  return m;
}

}  // namespace

Environment::Environment(BoxShape shape, KernelSpec spec, std::uint64_t seed,
                         std::vector<std::pair<VertexId, VertexId>> long_edges)
    : shape_(std::move(shape)), spec_(spec), seed_(seed), indexer_(shape_) {
  shape_.validate();
  spec_.validate();
  const std::int64_t n = indexer_.vertex_count();

  offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& [u, v] : long_edges) {
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw std::invalid_argument("environment: edge endpoint out of range");
    if (u == v) throw std::invalid_argument("environment: self loop");
    if (u > v) throw std::invalid_argument("environment: edges must satisfy u < v");
    if (edge_inf_norm(indexer_, u, v) < 2)
      throw std::invalid_argument("environment: explicit edge with inf-norm displacement < 2");
    ++offsets_[static_cast<std::size_t>(u) + 1];
    ++offsets_[static_cast<std::size_t>(v) + 1];
  }
  for (std::size_t i = 1; i < offsets_.size(); ++i) offsets_[i] += offsets_[i - 1];

  adj_.assign(static_cast<std::size_t>(offsets_.back()), 0);
  std::vector<std::int64_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& [u, v] : long_edges) {
    adj_[static_cast<std::size_t>(cursor[static_cast<std::size_t>(u)]++)] = v;
    adj_[static_cast<std::size_t>(cursor[static_cast<std::size_t>(v)]++)] = u;
  }
  for (VertexId u = 0; u < n; ++u) {
    auto begin = adj_.begin() + offsets_[static_cast<std::size_t>(u)];
    auto end = adj_.begin() + offsets_[static_cast<std::size_t>(u) + 1];
    std::sort(begin, end);
    if (std::adjacent_find(begin, end) != end)
      throw std::invalid_argument("environment: duplicate edge");
  }
}

}  // namespace lrp
