#include "lrp/renorm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "lrp/graphdist.hpp"

namespace lrp {

BlockGrid::BlockGrid(const BoxShape& shape, std::int32_t block_side)
    : block_side_(block_side), fine_(shape) {
  if (block_side < 1) throw std::invalid_argument("block grid: block side must be >= 1");
  for (std::int32_t s : shape.sides) {
    if (s % block_side != 0)
      throw std::invalid_argument("block grid: block side must divide every box side");
    coarse_sides_.push_back(s / block_side);
  }
  coarse_strides_.resize(coarse_sides_.size());
  std::int64_t stride = 1;
  for (int i = dim() - 1; i >= 0; --i) {
    coarse_strides_[static_cast<std::size_t>(i)] = stride;
    stride *= coarse_sides_[static_cast<std::size_t>(i)];
  }
  block_count_ = stride;
}

std::int64_t BlockGrid::block_of(VertexId v) const {
  std::array<std::int32_t, 8> c{};
  fine_.coords(v, {c.data(), static_cast<std::size_t>(dim())});
  std::int64_t idx = 0;
  for (int i = 0; i < dim(); ++i)
    idx += (c[static_cast<std::size_t>(i)] / block_side_) * coarse_strides_[static_cast<std::size_t>(i)];
  return idx;
}

void BlockGrid::block_coords(std::int64_t block, std::span<std::int32_t> out) const {
  std::int64_t rest = block;
  for (int i = 0; i < dim(); ++i) {
    out[static_cast<std::size_t>(i)] =
        static_cast<std::int32_t>(rest / coarse_strides_[static_cast<std::size_t>(i)]);
    rest %= coarse_strides_[static_cast<std::size_t>(i)];
  }
}

std::int64_t BlockGrid::block_index(std::span<const std::int32_t> coords) const {
  std::int64_t idx = 0;
  for (int i = 0; i < dim(); ++i)
    idx += coords[static_cast<std::size_t>(i)] * coarse_strides_[static_cast<std::size_t>(i)];
  return idx;
}

std::vector<VertexId> BlockGrid::block_vertices(std::int64_t block) const {
  std::array<std::int32_t, 8> base{};
  block_coords(block, {base.data(), static_cast<std::size_t>(dim())});
  for (int i = 0; i < dim(); ++i) base[static_cast<std::size_t>(i)] *= block_side_;

  std::vector<VertexId> out;
  std::int64_t total = 1;
  for (int i = 0; i < dim(); ++i) total *= block_side_;
  out.reserve(static_cast<std::size_t>(total));

  std::array<std::int32_t, 8> offset{};
  std::array<std::int32_t, 8> point{};
  while (true) {
    for (int i = 0; i < dim(); ++i)
      point[static_cast<std::size_t>(i)] = base[static_cast<std::size_t>(i)] + offset[static_cast<std::size_t>(i)];
    out.push_back(fine_.index({point.data(), static_cast<std::size_t>(dim())}));
    int axis = dim() - 1;
    while (axis >= 0) {
      if (offset[static_cast<std::size_t>(axis)] < block_side_ - 1) {
        ++offset[static_cast<std::size_t>(axis)];
        for (int i = axis + 1; i < dim(); ++i) offset[static_cast<std::size_t>(i)] = 0;
        break;
      }
      --axis;
    }
    if (axis < 0) break;
  }
  return out;
}

bool BlockGrid::interior(std::int64_t block) const {
  std::array<std::int32_t, 8> c{};
  block_coords(block, {c.data(), static_cast<std::size_t>(dim())});
  for (int i = 0; i < dim(); ++i) {
    if (c[static_cast<std::size_t>(i)] == 0 ||
        c[static_cast<std::size_t>(i)] == coarse_sides_[static_cast<std::size_t>(i)] - 1)
      return false;
  }
  return true;
}

std::int32_t BlockGrid::coarse_inf_distance(std::int64_t a, std::int64_t b) const {
  std::array<std::int32_t, 8> ca{}, cb{};
  block_coords(a, {ca.data(), static_cast<std::size_t>(dim())});
  block_coords(b, {cb.data(), static_cast<std::size_t>(dim())});
  std::int32_t m = 0;
  for (int i = 0; i < dim(); ++i)
    m = std::max(m, std::abs(ca[static_cast<std::size_t>(i)] - cb[static_cast<std::size_t>(i)]));
  return m;
}

std::span<const std::int64_t> RenormGraph::far_neighbors(std::int64_t block) const {
  return {far_adj.data() + far_offsets[static_cast<std::size_t>(block)],
          far_adj.data() + far_offsets[static_cast<std::size_t>(block) + 1]};
}

bool RenormGraph::coarse_adjacent(std::int64_t a, std::int64_t b) const {
  if (a == b) return false;
  if (grid.coarse_inf_distance(a, b) == 1) return true;
  const auto nbrs = far_neighbors(a);
  return std::binary_search(nbrs.begin(), nbrs.end(), b);
}

std::int64_t RenormGraph::coarse_degree(std::int64_t block) const {
  std::array<std::int32_t, 8> c{};
  grid.block_coords(block, {c.data(), static_cast<std::size_t>(grid.dim())});
  std::int64_t nn = 1;
  for (int i = 0; i < grid.dim(); ++i) {
    std::int64_t span = 1;
    if (c[static_cast<std::size_t>(i)] > 0) ++span;
    if (c[static_cast<std::size_t>(i)] < grid.coarse_side(i) - 1) ++span;
    nn *= span;
  }
  return (nn - 1) + static_cast<std::int64_t>(far_neighbors(block).size());
}

std::int64_t RenormGraph::neighborhood_degree(std::int64_t block) const {
  std::array<std::int32_t, 8> c{}, n{};
  grid.block_coords(block, {c.data(), static_cast<std::size_t>(grid.dim())});
  const int d = grid.dim();
  std::vector<std::int32_t> digit(static_cast<std::size_t>(d), -1);
  std::int64_t total = 0;
  while (true) {
    bool inside = true;
    for (int i = 0; i < d; ++i) {
      const std::int32_t x = c[static_cast<std::size_t>(i)] + digit[static_cast<std::size_t>(i)];
      if (x < 0 || x >= grid.coarse_side(i)) {
        inside = false;
        break;
      }
      n[static_cast<std::size_t>(i)] = x;
    }
    if (inside) total += coarse_degree(grid.block_index({n.data(), static_cast<std::size_t>(d)}));
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
  return total;
}

std::pair<VertexId, VertexId> RenormGraph::witness_for(std::int64_t a, std::int64_t b) const {
  if (a > b) std::swap(a, b);
  const std::int32_t cd = grid.coarse_inf_distance(a, b);
  if (cd >= 2) {
    const auto it = std::lower_bound(far_edges.begin(), far_edges.end(), std::make_pair(a, b));
    if (it == far_edges.end() || *it != std::make_pair(a, b))
      throw std::invalid_argument("witness_for: blocks are not adjacent");
    return witness[static_cast<std::size_t>(it - far_edges.begin())];
  }
  if (cd != 1) throw std::invalid_argument("witness_for: identical blocks");
  // Face witness: nearest fine pair across the contact, always open.
  const int d = grid.dim();
  std::array<std::int32_t, 8> ca{}, cb{}, xa{}, xb{};
  grid.block_coords(a, {ca.data(), static_cast<std::size_t>(d)});
  grid.block_coords(b, {cb.data(), static_cast<std::size_t>(d)});
  const std::int32_t k = grid.block_side();
  for (int i = 0; i < d; ++i) {
    const std::int32_t delta = cb[static_cast<std::size_t>(i)] - ca[static_cast<std::size_t>(i)];
    if (delta == 0) {
      xa[static_cast<std::size_t>(i)] = xb[static_cast<std::size_t>(i)] = ca[static_cast<std::size_t>(i)] * k;
    } else if (delta > 0) {
      xa[static_cast<std::size_t>(i)] = ca[static_cast<std::size_t>(i)] * k + k - 1;
      xb[static_cast<std::size_t>(i)] = xa[static_cast<std::size_t>(i)] + 1;
    } else {
      xa[static_cast<std::size_t>(i)] = ca[static_cast<std::size_t>(i)] * k;
      xb[static_cast<std::size_t>(i)] = xa[static_cast<std::size_t>(i)] - 1;
    }
  }
  return {grid.fine().index({xa.data(), static_cast<std::size_t>(d)}),
          grid.fine().index({xb.data(), static_cast<std::size_t>(d)})};
}

RenormGraph build_renorm_graph(const Environment& env, std::int32_t block_side) {
  if (block_side < 2) throw std::invalid_argument("build_renorm_graph: block side must be >= 2");
  BlockGrid grid(env.shape(), block_side);

  std::map<std::pair<std::int64_t, std::int64_t>, std::pair<VertexId, VertexId>> edges;
  env.for_each_long_edge([&](VertexId u, VertexId v) {
    std::int64_t bu = grid.block_of(u);
    std::int64_t bv = grid.block_of(v);
    if (bu == bv) return;
    if (grid.coarse_inf_distance(bu, bv) < 2) return;  // absorbed by face adjacency
    if (bu > bv) std::swap(bu, bv);
    edges.try_emplace({bu, bv}, std::make_pair(u, v));
  });

  RenormGraph g{std::move(grid), {}, {}, {}, {}};
  const std::int64_t blocks = g.grid.block_count();
  g.far_offsets.assign(static_cast<std::size_t>(blocks) + 1, 0);
  for (const auto& [e, w] : edges) {
    g.far_edges.push_back(e);
    g.witness.push_back(w);
    ++g.far_offsets[static_cast<std::size_t>(e.first) + 1];
    ++g.far_offsets[static_cast<std::size_t>(e.second) + 1];
  }
  for (std::size_t i = 1; i < g.far_offsets.size(); ++i) g.far_offsets[i] += g.far_offsets[i - 1];
  g.far_adj.assign(static_cast<std::size_t>(g.far_offsets.back()), 0);
  std::vector<std::int64_t> cursor(g.far_offsets.begin(), g.far_offsets.end() - 1);
  for (const auto& [e, w] : edges) {
    g.far_adj[static_cast<std::size_t>(cursor[static_cast<std::size_t>(e.first)]++)] = e.second;
    g.far_adj[static_cast<std::size_t>(cursor[static_cast<std::size_t>(e.second)]++)] = e.first;
  }
  for (std::int64_t b = 0; b < blocks; ++b) {
    auto begin = g.far_adj.begin() + g.far_offsets[static_cast<std::size_t>(b)];
    auto end = g.far_adj.begin() + g.far_offsets[static_cast<std::size_t>(b) + 1];
    std::sort(begin, end);
  }
  return g;
}

double block_edge_marginal(const KernelSpec& spec, std::int32_t block_side,
                           std::span<const std::int32_t> coarse_w, double rel_tol) {
  spec.validate();
  std::int32_t inf = 0;
  for (std::int32_t c : coarse_w) inf = std::max(inf, std::abs(c));
  if (inf < 2)
    throw std::invalid_argument("block_edge_marginal: coarse displacement must have inf-norm >= 2");
  const double expected = edge_probability_value(spec, coarse_w);
  if (block_side == 1) return expected;  // degenerate tessellation

  const double sum = block_sum_j(spec, block_side, coarse_w);
  const double marginal = -std::expm1(-spec.beta * sum);
  const double err = std::abs(marginal - expected);
  if (expected == 0.0) {
    if (err != 0.0)
      throw std::runtime_error("block_edge_marginal: identity violated at beta = 0");
  } else if (err > rel_tol * expected) {
    throw std::runtime_error("block_edge_marginal: aggregation identity violated (rel err " +
                             std::to_string(err / expected) + ")");
  }
  return marginal;
}

GoodBlockReport classify_good_block(const Environment& env, const BlockGrid& grid,
                                    std::int64_t block, double delta, double theta_hat,
                                    const RenormGraph* graph) {
  if (block < 0 || block >= grid.block_count())
    throw std::invalid_argument("classify_good_block: block out of range");
  if (!grid.interior(block))
    throw std::invalid_argument("classify_good_block: block is not interior");
  if (!(delta > 0.0)) throw std::invalid_argument("classify_good_block: delta must be > 0");

  const double threshold = delta * std::pow(static_cast<double>(grid.block_side()), theta_hat);
  const std::vector<VertexId> members = grid.block_vertices(block);
  std::vector<std::uint8_t> in_block(static_cast<std::size_t>(env.vertex_count()), 0);
  for (VertexId v : members) in_block[static_cast<std::size_t>(v)] = 1;

  // External connections per member vertex. Near blocks come from implicit
  // nearest-neighbor adjacency, everything else from long edges.
  const BoxIndexer& idx = env.indexer();
  const int d = idx.dim();
  std::map<VertexId, std::set<std::int64_t>> ext;       // vertex -> external blocks
  std::map<std::int64_t, std::vector<VertexId>> entry;  // far block -> entry vertices

  std::array<std::int32_t, 8> cu{}, cv{};
  for (VertexId u : members) {
    idx.coords(u, {cu.data(), static_cast<std::size_t>(d)});
    // Implicit neighbors live in blocks at coarse inf-distance <= 1.
    std::vector<std::int32_t> digit(static_cast<std::size_t>(d), -1);
    while (true) {
      bool inside = true;
      bool zero = true;
      for (int i = 0; i < d; ++i) {
        const std::int32_t c = cu[static_cast<std::size_t>(i)] + digit[static_cast<std::size_t>(i)];
        if (c < 0 || c >= idx.side(i)) {
          inside = false;
          break;
        }
        zero &= digit[static_cast<std::size_t>(i)] == 0;
        cv[static_cast<std::size_t>(i)] = c;
      }
      if (inside && !zero) {
        const VertexId v = idx.index({cv.data(), static_cast<std::size_t>(d)});
        if (!in_block[static_cast<std::size_t>(v)]) ext[u].insert(grid.block_of(v));
      }
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
    for (VertexId v : env.long_neighbors(u)) {
      if (in_block[static_cast<std::size_t>(v)]) continue;
      const std::int64_t bv = grid.block_of(v);
      ext[u].insert(bv);
      if (grid.coarse_inf_distance(block, bv) >= 2) entry[bv].push_back(u);
    }
  }
  for (auto& [b, xs] : entry) {
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  }

  GoodBlockReport report;
  report.block = block;
  report.delta = delta;
  report.theta_hat = theta_hat;
  report.good1 = report.good2 = report.good3 = true;

  auto note_violation = [&](VertexId x, VertexId y, std::int32_t dist, int family) {
    if (family == 1) report.good1 = false;
    if (family == 2) report.good2 = false;
    if (family == 3) report.good3 = false;
    if (!report.witness || dist < report.witness->distance)
      report.witness = GoodBlockWitness{x, y, dist, family};
  };

  // One within-block BFS per distinct far-entry vertex serves both family 1
  // and family 2.
  for (const auto& [far_block, xs] : entry) {
    for (VertexId x : xs) {
      const VertexId sources[1] = {x};
      const DistanceField field = bfs_distances(env, sources, members);
      for (const auto& [y, blocks] : ext) {
        const std::int32_t dist = field.at(y);
        bool other = false;
        for (std::int64_t b : blocks) {
          if (b != far_block) {
            other = true;
            break;
          }
        }
        if (other && static_cast<double>(dist) < threshold) note_violation(x, y, dist, 1);
      }
      for (VertexId y : xs) {
        if (y == x) continue;
        const std::int32_t dist = field.at(y);
        if (static_cast<double>(dist) < threshold) note_violation(x, y, dist, 2);
      }
    }
  }

  // Family 3: indirect distance from the block to the union of far blocks.
  std::vector<VertexId> far_union;
  for (VertexId v = 0; v < env.vertex_count(); ++v) {
    if (in_block[static_cast<std::size_t>(v)]) continue;
    if (grid.coarse_inf_distance(block, grid.block_of(v)) >= 2) far_union.push_back(v);
  }
  if (!far_union.empty()) {
    const auto dstar = indirect_distance(env, members, far_union);
    if (dstar && static_cast<double>(*dstar) < threshold)
      note_violation(-1, -1, *dstar, 3);
  }

  report.good = report.good1 && report.good2 && report.good3;

  // Coarse neighborhood-degree, reported alongside the verdicts.
  if (graph != nullptr) {
    report.nbh_degree = graph->neighborhood_degree(block);
  } else {
    report.nbh_degree = build_renorm_graph(env, grid.block_side()).neighborhood_degree(block);
  }
  return report;
}

BoxCountResult box_count(const Environment& env, const BlockGrid& grid, std::int32_t radius) {
  if (radius < 0) throw std::invalid_argument("box_count: radius must be >= 0");
  std::array<std::int32_t, 8> center{};
  for (int i = 0; i < grid.dim(); ++i)
    center[static_cast<std::size_t>(i)] = grid.coarse_side(i) / 2;
  const std::int64_t center_block =
      grid.block_index({center.data(), static_cast<std::size_t>(grid.dim())});

  const std::vector<VertexId> sources = grid.block_vertices(center_block);
  const DistanceField field = bfs_distances(env, sources);

  BoxCountResult result;
  result.radius = radius;
  result.center_block = center_block;
  result.block_distance.assign(static_cast<std::size_t>(grid.block_count()), -1);
  for (VertexId v = 0; v < env.vertex_count(); ++v) {
    const std::int32_t dv = field.at(v);
    if (dv < 0) continue;
    auto& slot = result.block_distance[static_cast<std::size_t>(grid.block_of(v))];
    if (slot < 0 || dv < slot) slot = dv;
  }
  result.count = 0;
  for (std::int32_t dist : result.block_distance) {
    if (dist >= 0 && dist <= radius) ++result.count;
  }
  return result;
}

}  // namespace lrp
