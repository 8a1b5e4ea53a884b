#include "lrp/sampler.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

#include "lrp/rng.hpp"

namespace lrp {

namespace {

// Iterates over all displacement classes that index unordered vertex pairs
// exactly once: w lexicographically positive (first nonzero coordinate > 0),
// ||w||_inf >= 2, |w_i| <= n_i - 1. Calls fn(w).
template <typename Fn>
void for_each_long_class(const BoxShape& shape, Fn&& fn) {
  const int d = shape.dim();
  std::vector<std::int32_t> w(static_cast<std::size_t>(d));
  std::vector<std::int32_t> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    lo[static_cast<std::size_t>(i)] = -(shape.sides[static_cast<std::size_t>(i)] - 1);
    hi[static_cast<std::size_t>(i)] = shape.sides[static_cast<std::size_t>(i)] - 1;
    w[static_cast<std::size_t>(i)] = lo[static_cast<std::size_t>(i)];
  }
  while (true) {
    bool lex_positive = false;
    std::int32_t inf = 0;
    for (int i = 0; i < d; ++i) {
      const std::int32_t c = w[static_cast<std::size_t>(i)];
      if (!lex_positive) {
        if (c > 0) lex_positive = true;
        else if (c < 0) break;
      }
      inf = std::max(inf, std::abs(c));
    }
    if (lex_positive && inf >= 2) fn(std::span<const std::int32_t>(w));
    int axis = d - 1;
    while (axis >= 0) {
      if (w[static_cast<std::size_t>(axis)] < hi[static_cast<std::size_t>(axis)]) {
        ++w[static_cast<std::size_t>(axis)];
        for (int i = axis + 1; i < d; ++i) w[static_cast<std::size_t>(i)] = lo[static_cast<std::size_t>(i)];
        break;
      }
      --axis;
    }
    if (axis < 0) break;
  }
}

std::vector<std::int64_t> class_key(std::span<const std::int32_t> w) {
  return {w.begin(), w.end()};
}

// Maps a flat position index within a displacement class to the edge
// (u, u+w); the base vertex runs over a sub-box of per-axis extent
// n_i - |w_i|, mixed-radix decoded.
std::pair<VertexId, VertexId> decode_edge(const BoxIndexer& idx, std::span<const std::int32_t> w,
                                          std::int64_t position) {
  const int d = idx.dim();
  std::array<std::int32_t, 8> a{}, b{};
  std::int64_t rest = position;
  for (int i = d - 1; i >= 0; --i) {
    const std::int32_t wi = w[static_cast<std::size_t>(i)];
    const std::int64_t radix = idx.side(i) - std::abs(wi);
    const std::int32_t digit = static_cast<std::int32_t>(rest % radix);
    rest /= radix;
    const std::int32_t base = std::max(0, -wi) + digit;
    a[static_cast<std::size_t>(i)] = base;
    b[static_cast<std::size_t>(i)] = base + wi;
  }
  const VertexId u = idx.index({a.data(), static_cast<std::size_t>(d)});
  const VertexId v = idx.index({b.data(), static_cast<std::size_t>(d)});
  return {u, v};  // lex-positive w makes v > u in row-major order
}

std::int32_t cover_radius(const BoxShape& shape) {
  std::int32_t r = 1;
  for (std::int32_t s : shape.sides) r = std::max(r, s - 1);
  return r;
}

}  // namespace

std::int64_t displacement_pair_count(const BoxShape& shape, std::span<const std::int32_t> w) {
  if (static_cast<int>(w.size()) != shape.dim())
    throw std::invalid_argument("pair count: dimension mismatch");
  std::int64_t count = 1;
  for (int i = 0; i < shape.dim(); ++i) {
    const std::int64_t extent =
        shape.sides[static_cast<std::size_t>(i)] - std::abs(w[static_cast<std::size_t>(i)]);
    if (extent <= 0) return 0;
    count *= extent;
  }
  return count;
}

Environment sample_box(const KernelSpec& spec, const BoxShape& shape, std::uint64_t seed,
                       const KernelTable* table) {
  spec.validate();
  shape.validate();
  std::vector<std::pair<VertexId, VertexId>> edges;
  if (spec.beta == 0.0 && spec.variant == KernelVariant::kSelfSimilar)
    return Environment(shape, spec, seed, std::move(edges));

  std::optional<KernelTable> local;
  if (table == nullptr) {
    local.emplace(spec, cover_radius(shape));
    table = &*local;
  }

  const BoxIndexer idx(shape);
  try {
    for_each_long_class(shape, [&](std::span<const std::int32_t> w) {
      const double p = table->p(w);
      if (p <= 0.0) return;
      const std::int64_t count = displacement_pair_count(shape, w);
      const auto key = class_key(w);
      CounterStream bin = CounterStream::keyed(seed, kDomainBinomial, key);
      const std::int64_t successes = sample_binomial(bin, count, p);
      if (successes == 0) return;
      CounterStream place = CounterStream::keyed(seed, kDomainPlacement, key);
      for (std::int64_t pos : sample_distinct(place, count, successes))
        edges.push_back(decode_edge(idx, w, pos));
    });
  } catch (const std::bad_alloc&) {
    throw std::runtime_error("sample_box: out of memory after placing " +
                             std::to_string(edges.size()) + " edges");
  }
  return Environment(shape, spec, seed, std::move(edges));
}

CouplingPair sample_coupled(const KernelSpec& spec_low, const KernelSpec& spec_high,
                            const BoxShape& shape, std::uint64_t seed) {
  spec_low.validate();
  spec_high.validate();
  shape.validate();
  if (spec_low.dim != spec_high.dim)
    throw std::invalid_argument("sample_coupled: dimension mismatch");

  const std::int32_t radius = cover_radius(shape);
  const KernelTable table_low(spec_low, radius);
  const KernelTable table_high(spec_high, radius);

  const BoxIndexer idx(shape);
  std::vector<std::pair<VertexId, VertexId>> low_edges, high_edges;
  for_each_long_class(shape, [&](std::span<const std::int32_t> w) {
    const double p_low = table_low.p(w);
    const double p_high = table_high.p(w);
    const double p_max = std::max(p_low, p_high);
    if (p_max <= 0.0) return;
    const std::int64_t count = displacement_pair_count(shape, w);
    const auto key = class_key(w);
    CounterStream bin = CounterStream::keyed(seed, kDomainBinomial, key);
    const std::int64_t successes = sample_binomial(bin, count, p_max);
    if (successes == 0) return;
    CounterStream place = CounterStream::keyed(seed, kDomainPlacement, key);
    const double ratio_low = p_low / p_max;
    const double ratio_high = p_high / p_max;
    for (std::int64_t pos : sample_distinct(place, count, successes)) {
      const auto [u, v] = decode_edge(idx, w, pos);
      // The superposition edge has uniform U <= p_max; conditionally U/p_max
      // is uniform again, so one keyed variate decides both sides.
      const double t = unit_uniform_from_key(seed, kDomainEdgeUniform,
                                             static_cast<std::uint64_t>(u),
                                             static_cast<std::uint64_t>(v));
      if (t < ratio_low) low_edges.emplace_back(u, v);
      if (t < ratio_high) high_edges.emplace_back(u, v);
    }
  });
  return CouplingPair{Environment(shape, spec_low, seed, std::move(low_edges)),
                      Environment(shape, spec_high, seed, std::move(high_edges)), seed};
}

std::string serialize(const Environment& env) {
  for (std::int64_t o : env.shape().origin)
    if (o != 0) throw std::invalid_argument("serialize: nonzero origin offsets not supported");

  std::string out;
  out.reserve(static_cast<std::size_t>(32 + 16 * env.long_edge_count()));
  char buf[128];

  out += "LRP 1 d=";
  std::snprintf(buf, sizeof buf, "%d", env.shape().dim());
  out += buf;
  out += " n=";
  for (int i = 0; i < env.shape().dim(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%d", i ? "x" : "", env.shape().sides[static_cast<std::size_t>(i)]);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, " beta=%.17g seed=%llu variant=%s\n", env.spec().beta,
                static_cast<unsigned long long>(env.seed()), env.spec().variant_token().c_str());
  out += buf;
  std::snprintf(buf, sizeof buf, "edges %lld\n", static_cast<long long>(env.long_edge_count()));
  out += buf;
  env.for_each_long_edge([&](VertexId u, VertexId v) {
    std::snprintf(buf, sizeof buf, "%d %d\n", u, v);
    out += buf;
  });
  return out;
}

EnvParseError::EnvParseError(const std::string& msg, std::int64_t line_no, std::int64_t offset)
    : std::runtime_error(msg + " (line " + std::to_string(line_no) + ", byte " +
                         std::to_string(offset) + ")"),
      line(line_no),
      byte_offset(offset) {}

namespace {

struct Cursor {
  std::string_view text;
  std::size_t pos = 0;
  std::int64_t line = 1;

  bool done() const { return pos >= text.size(); }

  std::string_view next_line() {
    const std::size_t start = pos;
    const std::size_t nl = text.find('\n', start);
    std::string_view out;
    if (nl == std::string_view::npos) {
      out = text.substr(start);
      pos = text.size();
    } else {
      out = text.substr(start, nl - start);
      pos = nl + 1;
    }
    return out;
  }
};

std::int64_t parse_int(std::string_view token, const Cursor& cur, const char* what) {
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw EnvParseError(std::string("malformed ") + what, cur.line, static_cast<std::int64_t>(cur.pos));
  return value;
}

std::uint64_t parse_u64(std::string_view token, const Cursor& cur, const char* what) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw EnvParseError(std::string("malformed ") + what, cur.line, static_cast<std::int64_t>(cur.pos));
  return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t end = s.find(sep, start);
    if (end == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

}  // namespace

Environment deserialize(std::string_view text) {
  Cursor cur{text};
  const std::int64_t header_offset = 0;
  std::string_view header = cur.next_line();
  const auto tokens = split(header, ' ');
  if (tokens.size() != 7 || tokens[0] != "LRP" || tokens[1] != "1")
    throw EnvParseError("malformed header", 1, header_offset);

  auto field = [&](std::size_t i, std::string_view key) -> std::string_view {
    const std::string_view t = tokens[i];
    if (t.substr(0, key.size()) != key)
      throw EnvParseError("malformed header: expected " + std::string(key), 1, header_offset);
    return t.substr(key.size());
  };

  const int d = static_cast<int>(parse_int(field(2, "d="), cur, "dimension"));
  if (d < 1 || d > 8) throw EnvParseError("dimension out of range", 1, header_offset);

  BoxShape shape;
  for (std::string_view part : split(field(3, "n="), 'x'))
    shape.sides.push_back(static_cast<std::int32_t>(parse_int(part, cur, "side length")));
  if (shape.dim() == 1 && d > 1) shape.sides.assign(static_cast<std::size_t>(d), shape.sides[0]);
  if (shape.dim() != d) throw EnvParseError("side list does not match dimension", 1, header_offset);
  shape.origin.assign(static_cast<std::size_t>(d), 0);

  KernelSpec spec;
  spec.dim = d;
  {
    const std::string beta_str(field(4, "beta="));
    char* end = nullptr;
    spec.beta = std::strtod(beta_str.c_str(), &end);
    if (end == beta_str.c_str() || *end != '\0')
      throw EnvParseError("malformed beta", 1, header_offset);
  }
  const std::uint64_t seed = parse_u64(field(5, "seed="), cur, "seed");
  {
    const std::string_view v = field(6, "variant=");
    if (v == "selfsim") {
      spec.variant = KernelVariant::kSelfSimilar;
    } else if (v.substr(0, 6) == "power:") {
      spec.variant = KernelVariant::kPowerLaw;
      const std::string s_str(v.substr(6));
      char* end = nullptr;
      spec.power_exponent = std::strtod(s_str.c_str(), &end);
      if (end == s_str.c_str() || *end != '\0')
        throw EnvParseError("malformed variant exponent", 1, header_offset);
    } else {
      throw EnvParseError("unknown variant", 1, header_offset);
    }
  }

  try {
    shape.validate();
    spec.validate();
  } catch (const std::exception& e) {
    throw EnvParseError(std::string("invalid header: ") + e.what(), 1, header_offset);
  }

  const std::int64_t count_line_offset = static_cast<std::int64_t>(cur.pos);
  if (cur.done()) throw EnvParseError("missing edge count line", cur.line + 1, count_line_offset);
  ++cur.line;
  std::string_view count_line = cur.next_line();
  const auto count_tokens = split(count_line, ' ');
  if (count_tokens.size() != 2 || count_tokens[0] != "edges")
    throw EnvParseError("malformed edge count line", cur.line, count_line_offset);
  const std::int64_t edge_count = parse_int(count_tokens[1], cur, "edge count");
  if (edge_count < 0) throw EnvParseError("negative edge count", cur.line, count_line_offset);

  const BoxIndexer idx(shape);
  const std::int64_t n = idx.vertex_count();
  std::vector<std::pair<VertexId, VertexId>> edges;
  edges.reserve(static_cast<std::size_t>(edge_count));
  for (std::int64_t e = 0; e < edge_count; ++e) {
    const std::int64_t offset = static_cast<std::int64_t>(cur.pos);
    if (cur.done()) throw EnvParseError("truncated edge list", cur.line + 1, offset);
    ++cur.line;
    std::string_view line = cur.next_line();
    const auto parts = split(line, ' ');
    if (parts.size() != 2) throw EnvParseError("malformed edge line", cur.line, offset);
    const std::int64_t u = parse_int(parts[0], cur, "edge endpoint");
    const std::int64_t v = parse_int(parts[1], cur, "edge endpoint");
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw EnvParseError("edge endpoint out of range", cur.line, offset);
    if (u >= v) throw EnvParseError("edge endpoints must satisfy i < j", cur.line, offset);
    edges.emplace_back(static_cast<VertexId>(u), static_cast<VertexId>(v));
  }

  try {
    return Environment(std::move(shape), spec, seed, std::move(edges));
  } catch (const std::exception& e) {
    throw EnvParseError(std::string("invalid edge list: ") + e.what(), cur.line,
                        static_cast<std::int64_t>(cur.pos));
  }
}

std::uint64_t environment_hash(const Environment& env) {
  const std::string bytes = serialize(env);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace lrp
