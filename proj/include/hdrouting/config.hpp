#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hdrouting/agent.hpp"
#include "hdrouting/traffic.hpp"

namespace hdr {

enum class Generator { BA, CE, ER, File };

struct NetworkSpec {
  Generator generator = Generator::BA;
  NodeId n = 1000;
  int m = 3;
  int ce_tiers = 3;
  double ce_a = 0.0;       // 0 selects the calibrated preset for ce_tiers
  double ce_lambda = 0.0;  // likewise
  double er_mean_degree = 6.0;
  std::string edge_list;
};

/// Everything a scenario run depends on. Every field has a config key; see
/// scenarios/README.md for the grammar and key list.
struct ScenarioConfig {
  std::string name = "scenario";
  NetworkSpec network;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<Strategy> strategies{Strategy::SP, Strategy::LD, Strategy::HD};
  std::vector<int> k{10};
  std::vector<double> r_over_n{0.005};
  std::vector<double> betas;  // empty: the default seven-value grid

  int episodes = 60;
  int mis_per_episode = 50;
  int mi_len = 10;
  int buffer = 40;
  int warmup = 500;
  int window = 1500;

  double rc_threshold = 0.02;
  int rc_max_points = 4;
  /// A sweep row stops after this many congested rates (0 runs the whole grid).
  int sweep_stop_after = 4;

  int census_last = 30;

  std::vector<std::string> removal_modes{"none", "random", "bc"};
  double removal_fraction = 0.02;
  int removal_at_episode = 20;
  int resilience_pre_window = 10;

  int snapshot_time = 500;

  AgentConfig agent;

  int threads = 1;
  std::string out_dir = ".";
};

/// Parses `key = value` lines. Lists are comma separated; '#' starts a comment.
/// Unknown keys, duplicates and malformed values raise ConfigError.
ScenarioConfig parse_config(std::istream& in, ScenarioConfig base = {});
ScenarioConfig load_config(const std::filesystem::path& path);

/// Sets one key from its textual value; throws ConfigError.
void set_config_value(ScenarioConfig& config, std::string_view key, std::string_view value);
std::string get_config_value(const ScenarioConfig& config, std::string_view key);
const std::vector<std::string>& config_keys();

/// Cross-field checks (files exist, K <= N/10 for generated networks, ranges).
void validate(const ScenarioConfig& config);

/// `key = value` lines for every key in a fixed order.
std::string canonical_config(const ScenarioConfig& config);
/// FNV-1a over the canonical form, excluding keys that cannot change results
/// (out_dir, threads). 16 hex digits.
std::string config_hash(const ScenarioConfig& config);

}  // namespace hdr
