#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrp/experiments.hpp"

namespace lrp {

// Command-line overrides; set fields win over file values and defaults.
struct ConfigOverrides {
  std::optional<int> d;
  std::optional<double> beta;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> delta;
  std::optional<std::int32_t> block_k;
  std::optional<std::vector<std::int32_t>> sizes;
  std::optional<int> replicas;
  std::optional<std::vector<double>> eps_grid;
  std::optional<double> theta_hat;
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParsedConfig {
  ExperimentConfig config;
  std::string canonical_text;  // effective config, fixed key order
  std::uint64_t config_hash;   // FNV-1a over the canonical text
};

// Flat `key = value` format; integer lists in brackets. Unknown keys are
// rejected by name; precedence is overrides > file > defaults.
ParsedConfig parse_config(const std::optional<std::string>& file_text,
                          const ConfigOverrides& overrides);

std::string canonical_config_text(const ExperimentConfig& config);
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace lrp
