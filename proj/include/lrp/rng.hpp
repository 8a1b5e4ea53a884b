#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace lrp {

// 64-bit finalizer (splitmix64). Used both to derive stream keys from
// structured identifiers and as the output stage of the counter streams.
std::uint64_t mix64(std::uint64_t x);

// Domain separators for derived streams. Keeping these distinct guarantees
// that the binomial counts, the edge placements, the per-edge coupling
// uniforms, the per-replica seeds and the bootstrap draws never alias.
enum : std::uint64_t {
  kDomainBinomial = 0x42494e4f4d31ull,
  kDomainPlacement = 0x504c414345ull,
  kDomainEdgeUniform = 0x45444745ull,
  kDomainReplica = 0x5245504cull,
  kDomainBootstrap = 0x424f4f54ull,
};

// Counter-based stream: state advances by a fixed odd constant and each
// output is mix64(state). Streams derived from distinct keys are
// independent for sampling purposes, and a stream's output sequence depends
// only on its key, never on what other streams did.
class CounterStream {
 public:
  explicit CounterStream(std::uint64_t key) : state_(key) {}

  static CounterStream keyed(std::uint64_t seed, std::uint64_t domain,
                             std::span<const std::int64_t> parts = {});

  std::uint64_t next();
  double u01();       // [0, 1)
  double open_u01();  // (0, 1)
  std::uint64_t below(std::uint64_t bound);  // unbiased uniform in [0, bound)

 private:
  std::uint64_t state_;
};

// Exact Binomial(trials, p) via geometric gap skipping; expected work is
// O(trials * p + 1).
std::int64_t sample_binomial(CounterStream& stream, std::int64_t trials, double p);

// k distinct values from {0, ..., population-1}, returned sorted.
// Floyd's algorithm when sparse, partial Fisher-Yates when dense.
std::vector<std::int64_t> sample_distinct(CounterStream& stream, std::int64_t population,
                                          std::int64_t k);

// Pure function of (seed, domain, a, b): one uniform in [0,1) per key.
double unit_uniform_from_key(std::uint64_t seed, std::uint64_t domain, std::uint64_t a,
                             std::uint64_t b);

}  // namespace lrp
