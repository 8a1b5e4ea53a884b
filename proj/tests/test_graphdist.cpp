#include "lrp/graphdist.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "lrp/rng.hpp"
#include "lrp/sampler.hpp"
#include "support/reference_graph.hpp"

using namespace lrp;
using lrp::testing::naive_distances;

namespace {

KernelSpec selfsim(int d, double beta) {
  KernelSpec s;
  s.dim = d;
  s.beta = beta;
  return s;
}

std::vector<VertexId> range_vertices(VertexId lo, VertexId hi) {
  std::vector<VertexId> out(static_cast<std::size_t>(hi - lo));
  std::iota(out.begin(), out.end(), lo);
  return out;
}

}  // namespace

TEST_CASE("distance to self is zero and sources are honored") {
  const auto env = sample_box(selfsim(1, 1.0), BoxShape::cube(1, 32), 3);
  const VertexId src[1] = {5};
  const auto field = bfs_distances(env, src);
  CHECK(field.at(5) == 0);
  CHECK(field.at(6) == 1);
}

TEST_CASE("beta=0 in d=1 gives |x - source| exactly") {
  const auto env = sample_box(selfsim(1, 0.0), BoxShape::cube(1, 50), 3);
  const VertexId src[1] = {0};
  const auto field = bfs_distances(env, src);
  for (VertexId v = 0; v < 50; ++v) CHECK(field.at(v) == v);
}

TEST_CASE("empty source set is an error") {
  const auto env = sample_box(selfsim(1, 0.0), BoxShape::cube(1, 8), 3);
  CHECK_THROWS(bfs_distances(env, {}));
}

TEST_CASE("BFS equals the naive reference on 1000 random small instances") {
  int instance = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    CounterStream cfg(static_cast<std::uint64_t>(trial) * 977 + 11);
    const int d = 1 + static_cast<int>(cfg.below(2));
    const std::int32_t n = d == 1 ? 4 + static_cast<std::int32_t>(cfg.below(29))
                                  : 4 + static_cast<std::int32_t>(cfg.below(13));
    const double beta = 2.0 * cfg.u01();
    const auto env = sample_box(selfsim(d, beta), BoxShape::cube(d, n),
                                static_cast<std::uint64_t>(trial));
    const VertexId source = static_cast<VertexId>(cfg.below(static_cast<std::uint64_t>(env.vertex_count())));
    const VertexId src[1] = {source};
    const auto field = bfs_distances(env, src);
    const auto reference = naive_distances(env, source);
    for (VertexId v = 0; v < env.vertex_count(); ++v) REQUIRE(field.at(v) == reference[static_cast<std::size_t>(v)]);
    ++instance;
  }
  CHECK(instance == 1000);
}

TEST_CASE("distance fields satisfy the structural inequalities") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto env = sample_box(selfsim(2, 1.0), BoxShape::cube(2, 12), seed);
    const BoxIndexer& idx = env.indexer();
    const VertexId src[1] = {0};
    const auto field = bfs_distances(env, src);
    std::int32_t c[2];
    for (VertexId v = 0; v < env.vertex_count(); ++v) {
      idx.coords(v, c);
      // 1-Lipschitz against the l1 upper bound on the full box.
      CHECK(field.at(v) <= c[0] + c[1]);
      // 1-Lipschitz along implicit neighbors.
      if (c[1] + 1 < 12) {
        const std::int32_t right[2] = {c[0], c[1] + 1};
        CHECK(std::abs(field.at(v) - field.at(idx.index(right))) <= 1);
      }
    }
  }
}

TEST_CASE("restricted distances dominate unrestricted ones") {
  const auto env = sample_box(selfsim(1, 1.5), BoxShape::cube(1, 64), 17);
  const VertexId src[1] = {10};
  const auto full = bfs_distances(env, src);
  const auto subset = range_vertices(5, 40);
  const auto restricted = bfs_distances(env, src, subset);
  for (VertexId v : subset) {
    if (restricted.at(v) >= 0) CHECK(restricted.at(v) >= full.at(v));
  }
  CHECK_THROWS(bfs_distances(env, src, range_vertices(20, 30)));  // source outside
}

TEST_CASE("ball curves at beta=0 are the lattice balls") {
  SUBCASE("d=1: |B_k| = 2k+1 until the boundary") {
    const auto env = sample_box(selfsim(1, 0.0), BoxShape::cube(1, 41), 3);
    const auto curve = ball_curve(env, 20, 25);
    for (std::int32_t k = 0; k <= 19; ++k) {
      CHECK(curve.sizes[static_cast<std::size_t>(k)] == 2 * k + 1);
      CHECK_FALSE(curve.saturated(k));
    }
    CHECK(curve.saturated(20));
    CHECK(curve.saturated_from == 20);
  }
  SUBCASE("d=2: |B_k| = (2k+1)^2 until the boundary") {
    const auto env = sample_box(selfsim(2, 0.0), BoxShape::cube(2, 21), 3);
    const std::int32_t center_c[2] = {10, 10};
    const auto curve = ball_curve(env, env.indexer().index(center_c), 12);
    for (std::int32_t k = 0; k <= 9; ++k)
      CHECK(curve.sizes[static_cast<std::size_t>(k)] == (2 * k + 1) * (2 * k + 1));
    CHECK(curve.saturated(10));
  }
}

TEST_CASE("ball curves grow strictly before saturation") {
  const auto env = sample_box(selfsim(1, 1.0), BoxShape::cube(1, 256), 5);
  const auto curve = ball_curve(env, 128, 40);
  CHECK(curve.sizes[0] == 1);
  const std::int32_t stop = curve.saturated_from ? *curve.saturated_from : curve.k_max();
  for (std::int32_t k = 1; k < stop; ++k)
    CHECK(curve.sizes[static_cast<std::size_t>(k)] >= curve.sizes[static_cast<std::size_t>(k - 1)] + 1);
}

TEST_CASE("balls always contain the clipped inf-norm ball") {
  // Nearest neighbors in the inf-norm are open, so D(c, x) <= |x - c|_inf.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto env = sample_box(selfsim(2, 1.5), BoxShape::cube(2, 15), seed);
    const std::int32_t c[2] = {6, 4};
    const auto curve = ball_curve(env, env.indexer().index(c), 10);
    for (std::int32_t k = 0; k <= 10; ++k) {
      const std::int64_t rows = std::min(c[0] + k, 14) - std::max(c[0] - k, 0) + 1;
      const std::int64_t cols = std::min(c[1] + k, 14) - std::max(c[1] - k, 0) + 1;
      CHECK(curve.sizes[static_cast<std::size_t>(k)] >= rows * cols);
    }
  }
}

TEST_CASE("diameter") {
  SUBCASE("beta=0 diameters are side-1") {
    const auto env1 = sample_box(selfsim(1, 0.0), BoxShape::cube(1, 33), 3);
    const auto all1 = range_vertices(0, 33);
    CHECK(diameter(env1, all1, DiameterMode::kExact).value == 32);
    CHECK(diameter(env1, all1, DiameterMode::kExact).exact);
    const auto env2 = sample_box(selfsim(2, 0.0), BoxShape::cube(2, 9), 3);
    const auto all2 = range_vertices(0, 81);
    CHECK(diameter(env2, all2, DiameterMode::kExact).value == 8);
  }
  SUBCASE("exact mode equals the all-pairs oracle on random environments") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto env = sample_box(selfsim(1, 1.0), BoxShape::cube(1, 40), seed);
      const auto all = range_vertices(0, 40);
      std::int32_t brute = 0;
      for (VertexId s = 0; s < 40; ++s) {
        const auto ref = naive_distances(env, s);
        for (std::int32_t dv : ref) brute = std::max(brute, dv);
      }
      CHECK(diameter(env, all, DiameterMode::kExact).value == brute);
    }
  }
  SUBCASE("threshold gate and double sweep") {
    const auto env = sample_box(selfsim(1, 1.0), BoxShape::cube(1, 64), 9);
    const auto all = range_vertices(0, 64);
    CHECK_THROWS(diameter(env, all, DiameterMode::kExact, 32));
    const auto sweep = diameter(env, all, DiameterMode::kDoubleSweepLowerBound);
    CHECK_FALSE(sweep.exact);
    CHECK(sweep.value <= diameter(env, all, DiameterMode::kExact).value);
    CHECK(sweep.value >= 1);
  }
  SUBCASE("threads do not change the result") {
    const auto env = sample_box(selfsim(1, 1.0), BoxShape::cube(1, 128), 21);
    const auto all = range_vertices(0, 128);
    CHECK(diameter(env, all, DiameterMode::kExact, 20000, 1).value ==
          diameter(env, all, DiameterMode::kExact, 20000, 4).value);
  }
}

TEST_CASE("indirect distance") {
  SUBCASE("adjacent singletons with no detour") {
    const auto env = sample_box(selfsim(1, 0.0), BoxShape::cube(1, 2), 3);
    const VertexId a[1] = {0}, b[1] = {1};
    CHECK_FALSE(indirect_distance(env, a, b).has_value());
  }
  SUBCASE("detour through the middle vertex") {
    const auto env = sample_box(selfsim(1, 0.0), BoxShape::cube(1, 3), 3);
    const VertexId a[1] = {0}, b[1] = {2};
    const auto dstar = indirect_distance(env, a, b);
    REQUIRE(dstar.has_value());
    CHECK(*dstar == 2);
  }
  SUBCASE("overlapping sets are rejected") {
    const auto env = sample_box(selfsim(1, 0.0), BoxShape::cube(1, 8), 3);
    const VertexId a[2] = {0, 1}, b[2] = {1, 2};
    CHECK_THROWS(indirect_distance(env, a, b));
  }
  SUBCASE("equals the delete-direct-edges oracle on random environments") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto env = sample_box(selfsim(1, 1.0), BoxShape::cube(1, 24), seed);
      const auto set_a = range_vertices(0, 4);
      const auto set_b = range_vertices(12, 17);
      // Oracle: rebuild without A-B long edges, widen the gap so no
      // nearest-neighbor direct edges exist, then multi-source BFS.
      std::vector<std::pair<VertexId, VertexId>> kept;
      env.for_each_long_edge([&](VertexId u, VertexId v) {
        const bool ua = u < 4, ub = u >= 12 && u < 17;
        const bool va = v < 4, vb = v >= 12 && v < 17;
        if ((ua && vb) || (ub && va)) return;
        kept.emplace_back(u, v);
      });
      const Environment pruned(env.shape(), env.spec(), env.seed(), std::move(kept));
      const auto field = bfs_distances(pruned, set_a);
      std::int32_t oracle = -1;
      for (VertexId v : set_b) {
        if (field.at(v) >= 0 && (oracle < 0 || field.at(v) < oracle)) oracle = field.at(v);
      }
      const auto dstar = indirect_distance(env, set_a, set_b);
      if (oracle < 0) {
        CHECK_FALSE(dstar.has_value());
      } else {
        REQUIRE(dstar.has_value());
        CHECK(*dstar == oracle);
      }
    }
  }
  SUBCASE("indirect dominates the plain set distance") {
    const auto env = sample_box(selfsim(1, 2.0), BoxShape::cube(1, 32), 77);
    const auto set_a = range_vertices(0, 3);
    const auto set_b = range_vertices(20, 24);
    const auto field = bfs_distances(env, set_a);
    std::int32_t plain = 1 << 30;
    for (VertexId v : set_b) plain = std::min(plain, field.at(v));
    const auto dstar = indirect_distance(env, set_a, set_b);
    if (dstar) CHECK(*dstar >= plain);
  }
}

TEST_CASE("degree statistics") {
  SUBCASE("beta=0 interior vertex has degree 2 in d=1") {
    const auto env = sample_box(selfsim(1, 0.0), BoxShape::cube(1, 16), 3);
    const VertexId z[1] = {8};
    const auto stats = degree_stats(env, z);
    CHECK(stats.degree.at(0).second == 2);
    CHECK(stats.average_degree == 2.0);
  }
  SUBCASE("boundary set of an interior interval") {
    const auto env = sample_box(selfsim(1, 0.0), BoxShape::cube(1, 16), 3);
    const auto z = range_vertices(5, 10);  // {5..9}
    const auto stats = degree_stats(env, z);
    CHECK(stats.boundary == std::vector<VertexId>{4, 10});
  }
  SUBCASE("average degree matches a hand sum on a 10-vertex set") {
    const auto env = sample_box(selfsim(1, 1.0), BoxShape::cube(1, 40), 23);
    const auto z = range_vertices(10, 20);
    const auto stats = degree_stats(env, z);
    double hand = 0.0;
    for (VertexId u : z) hand += 2.0 + static_cast<double>(env.long_neighbors(u).size());
    CHECK(stats.average_degree == doctest::Approx(hand / 10.0));
  }
}

TEST_CASE("exact distance distribution") {
  SUBCASE("the 11/36 instance: d=1, n=5, beta=1, threshold 2") {
    const auto spec = selfsim(1, 1.0);
    const auto shape = BoxShape::cube(1, 5);
    const std::pair<VertexId, VertexId> pairs[1] = {{0, 4}};
    const auto result = exact_distance_distribution(spec, shape, pairs, 2);
    REQUIRE(result.size() == 1);
    // Inclusion-exclusion over the four path events gives
    // 1 - (15/16)^2 (8/9)^2 = 11/36.
    const double by_hand = 1.0 - std::pow(15.0 / 16.0, 2) * std::pow(8.0 / 9.0, 2);
    CHECK(result[0].prob == doctest::Approx(11.0 / 36.0).epsilon(1e-12));
    CHECK(result[0].prob == doctest::Approx(by_hand).epsilon(1e-12));
  }
  SUBCASE("beta=0 degenerates to the lattice distance") {
    const auto spec = selfsim(1, 0.0);
    const auto shape = BoxShape::cube(1, 5);
    const std::pair<VertexId, VertexId> pairs[1] = {{0, 4}};
    CHECK(exact_distance_distribution(spec, shape, pairs, 2)[0].prob == 0.0);
    CHECK(exact_distance_distribution(spec, shape, pairs, 4)[0].prob == 1.0);
  }
  SUBCASE("monotone in beta") {
    const auto shape = BoxShape::cube(1, 5);
    const std::pair<VertexId, VertexId> pairs[1] = {{0, 4}};
    const double p1 = exact_distance_distribution(selfsim(1, 1.0), shape, pairs, 2)[0].prob;
    const double p2 = exact_distance_distribution(selfsim(1, 2.0), shape, pairs, 2)[0].prob;
    CHECK(p2 >= p1);
  }
  SUBCASE("slot cap is enforced") {
    const auto spec = selfsim(1, 1.0);
    const std::pair<VertexId, VertexId> pairs[1] = {{0, 9}};
    CHECK_THROWS(exact_distance_distribution(spec, BoxShape::cube(1, 10), pairs, 3));
  }
}
