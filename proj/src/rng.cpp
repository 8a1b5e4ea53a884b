#include "lrp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace lrp {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;
}

std::uint64_t mix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

CounterStream CounterStream::keyed(std::uint64_t seed, std::uint64_t domain,
                                   std::span<const std::int64_t> parts) {
  std::uint64_t key = mix64(seed ^ mix64(domain));
  for (std::int64_t part : parts) key = mix64(key ^ static_cast<std::uint64_t>(part));
  return CounterStream(key);
}

std::uint64_t CounterStream::next() {
  state_ += kGolden;
  return mix64(state_);
}

double CounterStream::u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double CounterStream::open_u01() {
  return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t CounterStream::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("below: bound must be positive");
  const std::uint64_t limit = bound * (~0ull / bound);
  std::uint64_t v;
  do {
    v = next();
  } while (v >= limit);
  return v % bound;
}

std::int64_t sample_binomial(CounterStream& stream, std::int64_t trials, double p) {
  if (trials < 0) throw std::invalid_argument("sample_binomial: negative trial count");
  if (p <= 0.0 || trials == 0) return 0;
  if (p >= 1.0) return trials;
  const double log_q = std::log1p(-p);
  std::int64_t successes = 0;
  std::int64_t position = 0;
  while (true) {
    const double gap = std::floor(std::log(stream.open_u01()) / log_q);
    if (gap >= static_cast<double>(trials - position)) break;
    position += static_cast<std::int64_t>(gap) + 1;
    ++successes;
    if (position >= trials) break;
  }
  return successes;
}

std::vector<std::int64_t> sample_distinct(CounterStream& stream, std::int64_t population,
                                          std::int64_t k) {
  if (k < 0 || k > population)
    throw std::invalid_argument("sample_distinct: k out of range");
  std::vector<std::int64_t> out;
  if (k == 0) return out;
  out.reserve(static_cast<std::size_t>(k));
  if (k >= population / 4) {
    // Dense: partial Fisher-Yates over the full index range.
    std::vector<std::int64_t> idx(static_cast<std::size_t>(population));
    std::iota(idx.begin(), idx.end(), std::int64_t{0});
    for (std::int64_t i = 0; i < k; ++i) {
      const std::int64_t j =
          i + static_cast<std::int64_t>(stream.below(static_cast<std::uint64_t>(population - i)));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
      out.push_back(idx[static_cast<std::size_t>(i)]);
    }
  } else {
    std::unordered_set<std::int64_t> chosen;
    chosen.reserve(static_cast<std::size_t>(k) * 2);
    for (std::int64_t j = population - k; j < population; ++j) {
      const std::int64_t t = static_cast<std::int64_t>(stream.below(static_cast<std::uint64_t>(j + 1)));
      if (!chosen.insert(t).second) chosen.insert(j);
    }
    out.assign(chosen.begin(), chosen.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

double unit_uniform_from_key(std::uint64_t seed, std::uint64_t domain, std::uint64_t a,
                             std::uint64_t b) {
  std::uint64_t key = mix64(seed ^ mix64(domain));
  key = mix64(key ^ a);
  key = mix64(key ^ b);
  return static_cast<double>(key >> 11) * 0x1.0p-53;
}

}  // namespace lrp
