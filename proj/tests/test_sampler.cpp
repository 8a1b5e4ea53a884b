#include "lrp/sampler.hpp"

#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "lrp/graphdist.hpp"
#include "lrp/rng.hpp"

using namespace lrp;

namespace {
KernelSpec selfsim(int d, double beta) {
  KernelSpec s;
  s.dim = d;
  s.beta = beta;
  return s;
}
}  // namespace

TEST_CASE("displacement pair counts") {
  const auto box5 = BoxShape::cube(1, 5);
  std::int32_t w2[] = {2};
  std::int32_t w5[] = {5};
  CHECK(displacement_pair_count(box5, w2) == 3);
  CHECK(displacement_pair_count(box5, w5) == 0);
  const auto box4 = BoxShape::cube(2, 4);
  std::int32_t w23[] = {2, 3};
  CHECK(displacement_pair_count(box4, w23) == 2);
  std::int32_t wneg[] = {-2, 3};
  CHECK(displacement_pair_count(box4, wneg) == 2);
}

TEST_CASE("beta=0 yields no explicit edges") {
  const auto env = sample_box(selfsim(1, 0.0), BoxShape::cube(1, 64), 7);
  CHECK(env.long_edge_count() == 0);
  const auto env2 = sample_box(selfsim(2, 0.0), BoxShape::cube(2, 8), 7);
  CHECK(env2.long_edge_count() == 0);
}

TEST_CASE("determinism: identical seeds give byte-identical environments") {
  const auto spec = selfsim(1, 1.0);
  const auto shape = BoxShape::cube(1, 128);
  const auto a = sample_box(spec, shape, 12345);
  const auto b = sample_box(spec, shape, 12345);
  CHECK(serialize(a) == serialize(b));
  CHECK(environment_hash(a) == environment_hash(b));
  const auto c = sample_box(spec, shape, 12346);
  CHECK(environment_hash(a) != environment_hash(c));
}

TEST_CASE("edge {0,2} frequency matches p = 1/4 over 200000 replicas") {
  const auto spec = selfsim(1, 1.0);
  const auto shape = BoxShape::cube(1, 5);
  const int replicas = 200000;
  int hits = 0;
  for (int r = 0; r < replicas; ++r) {
    const auto env = sample_box(spec, shape, 900000 + static_cast<std::uint64_t>(r));
    for (VertexId v : env.long_neighbors(0)) {
      if (v == 2) ++hits;
    }
  }
  const double freq = static_cast<double>(hits) / replicas;
  CHECK(std::abs(freq - 0.25) <= 0.005);
}

TEST_CASE("grouped sampling matches the product-Bernoulli law on a tiny box") {
  // d=1, n=4: slots (0,2), (1,3) at p=1/4 and (0,3) at p=1/9. Chi-square
  // against exact subset probabilities over all 8 configurations.
  const auto spec = selfsim(1, 1.0);
  const auto shape = BoxShape::cube(1, 4);
  const int replicas = 100000;
  std::map<std::set<std::pair<VertexId, VertexId>>, int> counts;
  for (int r = 0; r < replicas; ++r) {
    const auto env = sample_box(spec, shape, 31337 + static_cast<std::uint64_t>(r));
    std::set<std::pair<VertexId, VertexId>> edges;
    env.for_each_long_edge([&](VertexId u, VertexId v) { edges.insert({u, v}); });
    ++counts[edges];
  }
  const std::vector<std::pair<std::pair<VertexId, VertexId>, double>> slots = {
      {{0, 2}, 0.25}, {{1, 3}, 0.25}, {{0, 3}, 1.0 / 9.0}};
  double chi_sq = 0.0;
  for (int mask = 0; mask < 8; ++mask) {
    std::set<std::pair<VertexId, VertexId>> config;
    double prob = 1.0;
    for (int e = 0; e < 3; ++e) {
      if ((mask >> e) & 1) {
        config.insert(slots[static_cast<std::size_t>(e)].first);
        prob *= slots[static_cast<std::size_t>(e)].second;
      } else {
        prob *= 1.0 - slots[static_cast<std::size_t>(e)].second;
      }
    }
    const double expected = prob * replicas;
    const auto it = counts.find(config);
    const double observed = it == counts.end() ? 0.0 : static_cast<double>(it->second);
    chi_sq += (observed - expected) * (observed - expected) / expected;
  }
  // 7 degrees of freedom, alpha = 0.001 critical value.
  CHECK(chi_sq <= 24.322);
}

TEST_CASE("box-symmetric displacement classes get statistically equal counts") {
  const auto spec = selfsim(2, 1.0);
  const auto shape = BoxShape::cube(2, 5);
  const int replicas = 20000;
  std::int64_t count_x = 0, count_y = 0;
  for (int r = 0; r < replicas; ++r) {
    const auto env = sample_box(spec, shape, 5150 + static_cast<std::uint64_t>(r));
    const BoxIndexer& idx = env.indexer();
    env.for_each_long_edge([&](VertexId u, VertexId v) {
      std::int32_t cu[2], cv[2];
      idx.coords(u, cu);
      idx.coords(v, cv);
      const std::int32_t dx = std::abs(cu[0] - cv[0]);
      const std::int32_t dy = std::abs(cu[1] - cv[1]);
      if (dx == 2 && dy == 0) ++count_x;
      if (dx == 0 && dy == 2) ++count_y;
    });
  }
  // Both are Binomial(replicas * 15, p((2,0))); compare within 3 sigma each.
  std::int32_t w20[] = {2, 0};
  const double p = edge_probability_value(spec, w20);
  const double mean = replicas * 15.0 * p;
  const double sigma = std::sqrt(replicas * 15.0 * p * (1.0 - p));
  CHECK(std::abs(count_x - mean) <= 3.0 * sigma);
  CHECK(std::abs(count_y - mean) <= 3.0 * sigma);
}

TEST_CASE("coupling: equal betas give identical environments") {
  const auto pair = sample_coupled(selfsim(1, 1.0), selfsim(1, 1.0), BoxShape::cube(1, 256), 99);
  CHECK(serialize(pair.low) == serialize(pair.high));
  // And they agree with the plain sampler at that beta.
  const auto direct = sample_box(selfsim(1, 1.0), BoxShape::cube(1, 256), 99);
  CHECK(serialize(pair.low) == serialize(direct));
}

TEST_CASE("coupling: low edges are a subset of high edges, exhaustively") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto pair =
        sample_coupled(selfsim(1, 0.5), selfsim(1, 2.0), BoxShape::cube(1, 512), seed);
    std::set<std::pair<VertexId, VertexId>> high;
    pair.high.for_each_long_edge([&](VertexId u, VertexId v) { high.insert({u, v}); });
    bool subset = true;
    pair.low.for_each_long_edge([&](VertexId u, VertexId v) {
      if (!high.count({u, v})) subset = false;
    });
    CHECK(subset);
  }
}

TEST_CASE("coupling: distances are pointwise monotone") {
  const auto pair = sample_coupled(selfsim(1, 0.5), selfsim(1, 2.0), BoxShape::cube(1, 512), 4242);
  const VertexId origin[1] = {0};
  const auto d_low = bfs_distances(pair.low, origin);
  const auto d_high = bfs_distances(pair.high, origin);
  for (VertexId v = 0; v < pair.low.vertex_count(); ++v) CHECK(d_high.at(v) <= d_low.at(v));
}

TEST_CASE("coupling marginals: each side matches its own edge probability") {
  // The thinning construction must leave the low marginal Bernoulli(p_low).
  const auto spec_low = selfsim(1, 0.5);
  const auto spec_high = selfsim(1, 2.0);
  const auto shape = BoxShape::cube(1, 5);
  const int replicas = 200000;
  int low_hits = 0, high_hits = 0;
  for (int r = 0; r < replicas; ++r) {
    const auto pair = sample_coupled(spec_low, spec_high, shape, 777000 + static_cast<std::uint64_t>(r));
    for (VertexId v : pair.low.long_neighbors(0))
      if (v == 2) ++low_hits;
    for (VertexId v : pair.high.long_neighbors(0))
      if (v == 2) ++high_hits;
  }
  std::int32_t w2[] = {2};
  const double p_low = edge_probability_value(spec_low, w2);
  const double p_high = edge_probability_value(spec_high, w2);
  const double sigma_low = std::sqrt(p_low * (1 - p_low) / replicas);
  const double sigma_high = std::sqrt(p_high * (1 - p_high) / replicas);
  CHECK(std::abs(static_cast<double>(low_hits) / replicas - p_low) <= 3.5 * sigma_low);
  CHECK(std::abs(static_cast<double>(high_hits) / replicas - p_high) <= 3.5 * sigma_high);
}

TEST_CASE("coupling rejects dimension mismatch") {
  CHECK_THROWS(sample_coupled(selfsim(1, 0.5), selfsim(2, 2.0), BoxShape::cube(1, 8), 1));
}

TEST_CASE("serialization round trip") {
  const auto env = sample_box(selfsim(1, 1.0), BoxShape::cube(1, 64), 2024);
  const std::string text = serialize(env);
  const auto back = deserialize(text);
  CHECK(serialize(back) == text);
  CHECK(environment_hash(back) == environment_hash(env));

  const auto empty = sample_box(selfsim(1, 0.0), BoxShape::cube(1, 8), 1);
  CHECK(serialize(deserialize(serialize(empty))) == serialize(empty));
}

TEST_CASE("serialization header fields parse back") {
  const auto env = sample_box(selfsim(1, 1.0), BoxShape::cube(1, 8), 42);
  const std::string text = serialize(env);
  CHECK(text.substr(0, 36) == "LRP 1 d=1 n=8 beta=1 seed=42 variant");
  const auto back = deserialize(text);
  CHECK(back.shape().sides[0] == 8);
  CHECK(back.spec().beta == 1.0);
  CHECK(back.seed() == 42);
  CHECK(back.spec().variant == KernelVariant::kSelfSimilar);
}

TEST_CASE("deserialize rejects malformed input with positions") {
  SUBCASE("vertex out of range carries the line number") {
    const std::string text = "LRP 1 d=1 n=8 beta=1 seed=42 variant=selfsim\nedges 1\n0 8\n";
    try {
      deserialize(text);
      FAIL("expected parse error");
    } catch (const EnvParseError& e) {
      CHECK(e.line == 3);
      CHECK(std::string(e.what()).find("out of range") != std::string::npos);
    }
  }
  SUBCASE("truncated edge list") {
    const std::string text = "LRP 1 d=1 n=8 beta=1 seed=42 variant=selfsim\nedges 2\n0 2\n";
    CHECK_THROWS_AS(deserialize(text), EnvParseError);
  }
  SUBCASE("bad magic") {
    CHECK_THROWS_AS(deserialize("LRQ 1 d=1 n=8 beta=1 seed=42 variant=selfsim\nedges 0\n"),
                    EnvParseError);
  }
  SUBCASE("nearest-neighbor edge rejected") {
    const std::string text = "LRP 1 d=1 n=8 beta=1 seed=42 variant=selfsim\nedges 1\n0 1\n";
    CHECK_THROWS_AS(deserialize(text), EnvParseError);
  }
  SUBCASE("duplicate edge rejected") {
    const std::string text = "LRP 1 d=1 n=8 beta=1 seed=42 variant=selfsim\nedges 2\n0 2\n0 2\n";
    CHECK_THROWS_AS(deserialize(text), EnvParseError);
  }
}

TEST_CASE("power-law variant round trips through the header") {
  KernelSpec s;
  s.dim = 1;
  s.beta = 0.5;
  s.variant = KernelVariant::kPowerLaw;
  s.power_exponent = 2.5;
  const auto env = sample_box(s, BoxShape::cube(1, 32), 5);
  const auto back = deserialize(serialize(env));
  CHECK(back.spec().variant == KernelVariant::kPowerLaw);
  CHECK(back.spec().power_exponent == 2.5);
}

TEST_CASE("binomial sampler agrees with exact moments") {
  CounterStream s(123);
  const int trials = 50000;
  double sum = 0.0;
  for (int i = 0; i < trials; ++i) sum += static_cast<double>(sample_binomial(s, 100, 0.3));
  const double mean = sum / trials;
  // mean 30, sd of the average = sqrt(100*0.3*0.7/trials) ~ 0.02
  CHECK(std::abs(mean - 30.0) <= 0.1);
  CHECK(sample_binomial(s, 100, 0.0) == 0);
  CHECK(sample_binomial(s, 100, 1.0) == 100);
}

TEST_CASE("distinct sampling covers the range without repeats") {
  CounterStream s(9);
  const auto sparse = sample_distinct(s, 1000000, 20);
  CHECK(sparse.size() == 20);
  CHECK(std::is_sorted(sparse.begin(), sparse.end()));
  CHECK(std::adjacent_find(sparse.begin(), sparse.end()) == sparse.end());
  const auto dense = sample_distinct(s, 40, 37);
  CHECK(dense.size() == 37);
  CHECK(std::adjacent_find(dense.begin(), dense.end()) == dense.end());
  CHECK(dense.back() < 40);
}
