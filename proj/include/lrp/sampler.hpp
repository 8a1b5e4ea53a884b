#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "lrp/environment.hpp"

namespace lrp {

// Number of unordered pairs {x, x+w} with both endpoints in the box:
// prod_i max(0, n_i - |w_i|).
std::int64_t displacement_pair_count(const BoxShape& shape, std::span<const std::int32_t> w);

// Samples one environment. Work is grouped by displacement class: for each
// class the number of open edges is a Binomial(pair_count, p) draw from a
// stream keyed by (seed, class), and the edges are placed at distinct
// uniform positions from a second stream keyed the same way. Each edge is
// marginally Bernoulli(p) and distinct edges are independent. Deterministic
// in (spec, shape, seed).
Environment sample_box(const KernelSpec& spec, const BoxShape& shape, std::uint64_t seed,
                       const KernelTable* table = nullptr);

struct CouplingPair {
  Environment low;
  Environment high;
  std::uint64_t seed;
};

// Harris coupling: conceptually one uniform per edge compared against both
// edge probabilities. Implemented by drawing the superposition environment
// at p_max = max(p_low, p_high) per class and thinning each side with a
// per-edge uniform keyed by the edge identity, which realizes exactly that
// coupling. When p_low(w) <= p_high(w) for every class (e.g. beta_low <=
// beta_high for the self-similar kernel), low is a subgraph of high.
CouplingPair sample_coupled(const KernelSpec& spec_low, const KernelSpec& spec_high,
                            const BoxShape& shape, std::uint64_t seed);

// Text format (UTF-8, LF):
//   LRP 1 d=<d> n=<n> beta=<decimal> seed=<u64> variant=<selfsim|power:s>
//   edges <count>
//   <i> <j>          one line per long edge, i < j, row-major indices
// Non-cubic boxes write n=<n0>x<n1>x...; nearest-neighbor edges are omitted
// by contract.
std::string serialize(const Environment& env);

struct EnvParseError : std::runtime_error {
  EnvParseError(const std::string& msg, std::int64_t line, std::int64_t byte_offset);
  std::int64_t line;
  std::int64_t byte_offset;
};

Environment deserialize(std::string_view text);

}  // namespace lrp
