#include "lrp/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <string_view>

namespace lrp {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0')
    throw ConfigError("config: key '" + key + "' expects a number, got '" + value + "'");
  return v;
}

std::int64_t parse_integer(const std::string& key, const std::string& value) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError("config: key '" + key + "' expects an integer, got '" + value + "'");
  return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError("config: key '" + key + "' expects an unsigned integer, got '" + value + "'");
  return v;
}

std::vector<std::string> parse_list(const std::string& key, const std::string& value) {
  if (value.size() < 2 || value.front() != '[' || value.back() != ']')
    throw ConfigError("config: key '" + key + "' expects a bracketed list");
  std::vector<std::string> items;
  std::string body = value.substr(1, value.size() - 2);
  std::size_t start = 0;
  while (start <= body.size()) {
    const std::size_t comma = body.find(',', start);
    const std::string item =
        trim(comma == std::string::npos ? body.substr(start) : body.substr(start, comma - start));
    if (!item.empty()) items.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (items.empty()) throw ConfigError("config: key '" + key + "' has an empty list");
  return items;
}

std::vector<std::int32_t> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<std::int32_t> out;
  for (const auto& item : parse_list(key, value))
    out.push_back(static_cast<std::int32_t>(parse_integer(key, item)));
  return out;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& item : parse_list(key, value)) out.push_back(parse_double(key, item));
  return out;
}

void apply_key(ExperimentConfig& c, const std::string& key, const std::string& value,
               bool* eps_explicit) {
  if (key == "d") {
    c.kernel.dim = static_cast<int>(parse_integer(key, value));
  } else if (key == "beta") {
    c.kernel.beta = parse_double(key, value);
  } else if (key == "variant") {
    if (value == "selfsim") {
      c.kernel.variant = KernelVariant::kSelfSimilar;
      c.kernel.power_exponent = 0.0;
    } else if (value.rfind("power:", 0) == 0) {
      c.kernel.variant = KernelVariant::kPowerLaw;
      c.kernel.power_exponent = parse_double(key, value.substr(6));
    } else {
      throw ConfigError("config: key 'variant' expects selfsim or power:<s>");
    }
  } else if (key == "sizes") {
    c.sizes = parse_int_list(key, value);
  } else if (key == "replicas") {
    c.replicas = static_cast<int>(parse_integer(key, value));
  } else if (key == "seed") {
    c.master_seed = parse_unsigned(key, value);
  } else if (key == "delta") {
    c.delta = parse_double(key, value);
  } else if (key == "block_k") {
    c.block_k = static_cast<std::int32_t>(parse_integer(key, value));
  } else if (key == "eps_grid") {
    c.eps_grid = parse_double_list(key, value);
    *eps_explicit = true;
  } else if (key == "theta_hat") {
    c.theta_hat = parse_double(key, value);
  } else if (key == "exact_diameter_threshold") {
    c.exact_diameter_threshold = parse_integer(key, value);
  } else if (key == "bootstrap_rounds") {
    c.bootstrap_rounds = static_cast<int>(parse_integer(key, value));
  } else if (key == "threads") {
    c.threads = static_cast<int>(parse_integer(key, value));
  } else if (key == "lowertail_replicas") {
    c.lowertail_replicas = static_cast<int>(parse_integer(key, value));
  } else if (key == "balltail_replicas") {
    c.balltail_replicas = static_cast<int>(parse_integer(key, value));
  } else if (key == "coupling_replicas") {
    c.coupling_replicas = static_cast<int>(parse_integer(key, value));
  } else if (key == "goodblocks_replicas") {
    c.goodblocks_replicas = static_cast<int>(parse_integer(key, value));
  } else if (key == "metric_replicas") {
    c.metric_replicas = static_cast<int>(parse_integer(key, value));
  } else if (key == "beta_low") {
    c.beta_low = parse_double(key, value);
  } else if (key == "beta_high") {
    c.beta_high = parse_double(key, value);
  } else if (key == "box_count_m") {
    c.box_count_m = parse_int_list(key, value);
  } else if (key == "metric_radius_scale") {
    c.metric_radius_scale = parse_double(key, value);
  } else if (key == "eta") {
    c.eta = parse_double(key, value);
  } else if (key == "cross_section") {
    c.cross_section = static_cast<std::int32_t>(parse_integer(key, value));
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

std::string fmt_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_int_list(const std::vector<std::int32_t>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(v[i]);
  }
  return out + "]";
}

std::string fmt_double_list(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt_double(v[i]);
  }
  return out + "]";
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string canonical_config_text(const ExperimentConfig& c) {
  std::map<std::string, std::string> kv;
  kv["d"] = std::to_string(c.kernel.dim);
  kv["beta"] = fmt_double(c.kernel.beta);
  kv["variant"] = c.kernel.variant_token();
  kv["sizes"] = fmt_int_list(c.sizes);
  kv["replicas"] = std::to_string(c.replicas);
  kv["seed"] = std::to_string(c.master_seed);
  kv["delta"] = fmt_double(c.delta);
  kv["block_k"] = std::to_string(c.block_k);
  kv["eps_grid"] = fmt_double_list(c.eps_grid);
  kv["theta_hat"] = fmt_double(c.theta_hat);
  kv["exact_diameter_threshold"] = std::to_string(c.exact_diameter_threshold);
  kv["bootstrap_rounds"] = std::to_string(c.bootstrap_rounds);
  kv["threads"] = std::to_string(c.threads);
  kv["lowertail_replicas"] = std::to_string(c.lowertail_replicas);
  kv["balltail_replicas"] = std::to_string(c.balltail_replicas);
  kv["coupling_replicas"] = std::to_string(c.coupling_replicas);
  kv["goodblocks_replicas"] = std::to_string(c.goodblocks_replicas);
  kv["metric_replicas"] = std::to_string(c.metric_replicas);
  kv["beta_low"] = fmt_double(c.beta_low);
  kv["beta_high"] = fmt_double(c.beta_high);
  kv["box_count_m"] = fmt_int_list(c.box_count_m);
  kv["metric_radius_scale"] = fmt_double(c.metric_radius_scale);
  kv["eta"] = fmt_double(c.eta);
  kv["cross_section"] = std::to_string(c.cross_section);

  std::string out;
  for (const auto& [k, v] : kv) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

ParsedConfig parse_config(const std::optional<std::string>& file_text,
                          const ConfigOverrides& overrides) {
  ExperimentConfig config;
  config.eps_grid = {0.125, 0.149, 0.177, 0.21, 0.25, 0.297, 0.354, 0.42, 0.5};
  config.sizes = {64, 128, 256, 512, 1024};
  bool eps_explicit = false;

  if (file_text) {
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= file_text->size()) {
      const std::size_t nl = file_text->find('\n', pos);
      std::string line = nl == std::string::npos ? file_text->substr(pos)
                                                 : file_text->substr(pos, nl - pos);
      pos = nl == std::string::npos ? file_text->size() + 1 : nl + 1;
      ++line_no;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      const std::string stripped = trim(line);
      if (stripped.empty()) continue;
      const std::size_t eq = stripped.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config: line " + std::to_string(line_no) + " is not 'key = value'");
      apply_key(config, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)),
                &eps_explicit);
    }
  }

  if (overrides.d) config.kernel.dim = *overrides.d;
  if (overrides.beta) config.kernel.beta = *overrides.beta;
  if (overrides.seed) config.master_seed = *overrides.seed;
  if (overrides.threads) config.threads = *overrides.threads;
  if (overrides.delta) config.delta = *overrides.delta;
  if (overrides.block_k) config.block_k = *overrides.block_k;
  if (overrides.sizes) config.sizes = *overrides.sizes;
  if (overrides.replicas) config.replicas = *overrides.replicas;
  if (overrides.eps_grid) {
    config.eps_grid = *overrides.eps_grid;
    eps_explicit = true;
  }
  if (overrides.theta_hat) config.theta_hat = *overrides.theta_hat;

  try {
    config.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }

  // Only a grid the caller actually chose is held to the threshold
  // precondition here; the lower-tail run re-checks it regardless.
  if (eps_explicit && config.theta_hat > 0.0 && !config.eps_grid.empty()) {
    const double sep = static_cast<double>(config.sizes.back() - 1);
    if (config.eps_grid.front() * std::pow(sep, config.theta_hat) < 1.0)
      throw ConfigError(
          "config: eps_grid violates eps * |x|^theta_hat >= 1 at the largest size");
  }

  ParsedConfig parsed;
  parsed.config = config;
  parsed.canonical_text = canonical_config_text(config);
  parsed.config_hash = fnv1a64(parsed.canonical_text);
  return parsed;
}

}  // namespace lrp
