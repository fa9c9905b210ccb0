#include "hdrouting/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <set>
#include <sstream>

#include "hdrouting/errors.hpp"

namespace hdr {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view value) {
  std::vector<std::string_view> out;
  if (trim(value).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = value.find(',', start);
    out.push_back(trim(value.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  for (auto item : out)
    if (item.empty()) throw ConfigError("empty list element in '" + std::string(value) + "'");
  return out;
}

template <typename T>
T parse_number(std::string_view text) {
  text = trim(text);
  T v{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw ConfigError("'" + std::string(text) + "' is not a valid number");
  return v;
}

bool parse_bool(std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("'" + std::string(text) + "' is not a boolean");
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <typename T>
std::string join(const std::vector<T>& items, const std::function<std::string(const T&)>& fmt) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += fmt(items[i]);
  }
  return out;
}

std::string generator_name(Generator g) {
  switch (g) {
    case Generator::BA: return "ba";
    case Generator::CE: return "ce";
    case Generator::ER: return "er";
    case Generator::File: return "file";
  }
  return "?";
}

struct Key {
  std::string name;
  std::function<void(ScenarioConfig&, std::string_view)> set;
  std::function<std::string(const ScenarioConfig&)> get;
  bool affects_results = true;
};

template <typename T>
Key int_key(std::string name, T ScenarioConfig::*field) {
  return {name, [field](ScenarioConfig& c, std::string_view v) { c.*field = parse_number<T>(v); },
          [field](const ScenarioConfig& c) { return std::to_string(c.*field); }};
}

Key double_key(std::string name, double ScenarioConfig::*field) {
  return {name, [field](ScenarioConfig& c, std::string_view v) { c.*field = parse_number<double>(v); },
          [field](const ScenarioConfig& c) { return format_double(c.*field); }};
}

template <typename T>
Key agent_int_key(std::string name, T AgentConfig::*field) {
  return {name, [field](ScenarioConfig& c, std::string_view v) { c.agent.*field = parse_number<T>(v); },
          [field](const ScenarioConfig& c) { return std::to_string(c.agent.*field); }};
}

Key agent_double_key(std::string name, double AgentConfig::*field) {
  return {name, [field](ScenarioConfig& c, std::string_view v) { c.agent.*field = parse_number<double>(v); },
          [field](const ScenarioConfig& c) { return format_double(c.agent.*field); }};
}

const std::vector<Key>& key_table() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k;
    k.push_back({"name", [](ScenarioConfig& c, std::string_view v) { c.name = std::string(trim(v)); },
                 [](const ScenarioConfig& c) { return c.name; }});
    k.push_back({"network",
                 [](ScenarioConfig& c, std::string_view v) {
                   v = trim(v);
                   if (v == "ba") c.network.generator = Generator::BA;
                   else if (v == "ce") c.network.generator = Generator::CE;
                   else if (v == "er") c.network.generator = Generator::ER;
                   else if (v == "file") c.network.generator = Generator::File;
                   else throw ConfigError("network must be one of ba, ce, er, file");
                 },
                 [](const ScenarioConfig& c) { return generator_name(c.network.generator); }});
    k.push_back({"n", [](ScenarioConfig& c, std::string_view v) { c.network.n = parse_number<NodeId>(v); },
                 [](const ScenarioConfig& c) { return std::to_string(c.network.n); }});
    k.push_back({"m", [](ScenarioConfig& c, std::string_view v) { c.network.m = parse_number<int>(v); },
                 [](const ScenarioConfig& c) { return std::to_string(c.network.m); }});
    k.push_back({"ce_tiers", [](ScenarioConfig& c, std::string_view v) { c.network.ce_tiers = parse_number<int>(v); },
                 [](const ScenarioConfig& c) { return std::to_string(c.network.ce_tiers); }});
    k.push_back({"ce_a", [](ScenarioConfig& c, std::string_view v) { c.network.ce_a = parse_number<double>(v); },
                 [](const ScenarioConfig& c) { return format_double(c.network.ce_a); }});
    k.push_back({"ce_lambda",
                 [](ScenarioConfig& c, std::string_view v) { c.network.ce_lambda = parse_number<double>(v); },
                 [](const ScenarioConfig& c) { return format_double(c.network.ce_lambda); }});
    k.push_back({"er_mean_degree",
                 [](ScenarioConfig& c, std::string_view v) { c.network.er_mean_degree = parse_number<double>(v); },
                 [](const ScenarioConfig& c) { return format_double(c.network.er_mean_degree); }});
    k.push_back({"edge_list", [](ScenarioConfig& c, std::string_view v) { c.network.edge_list = std::string(trim(v)); },
                 [](const ScenarioConfig& c) { return c.network.edge_list; }});
    k.push_back({"seeds",
                 [](ScenarioConfig& c, std::string_view v) {
                   c.seeds.clear();
                   for (auto item : split_list(v)) c.seeds.push_back(parse_number<std::uint64_t>(item));
                 },
                 [](const ScenarioConfig& c) {
                   return join<std::uint64_t>(c.seeds, [](const std::uint64_t& s) { return std::to_string(s); });
                 }});
    k.push_back({"strategies",
                 [](ScenarioConfig& c, std::string_view v) {
                   c.strategies.clear();
                   for (auto item : split_list(v)) {
                     try {
                       c.strategies.push_back(parse_strategy(item));
                     } catch (const InvalidParameter& e) {
                       throw ConfigError(e.what());
                     }
                   }
                 },
                 [](const ScenarioConfig& c) {
                   return join<Strategy>(c.strategies, [](const Strategy& s) { return to_string(s); });
                 }});
    k.push_back({"k",
                 [](ScenarioConfig& c, std::string_view v) {
                   c.k.clear();
                   for (auto item : split_list(v)) c.k.push_back(parse_number<int>(item));
                 },
                 [](const ScenarioConfig& c) { return join<int>(c.k, [](const int& x) { return std::to_string(x); }); }});
    k.push_back({"r_over_n",
                 [](ScenarioConfig& c, std::string_view v) {
                   c.r_over_n.clear();
                   for (auto item : split_list(v)) c.r_over_n.push_back(parse_number<double>(item));
                 },
                 [](const ScenarioConfig& c) { return join<double>(c.r_over_n, format_double); }});
    k.push_back({"betas",
                 [](ScenarioConfig& c, std::string_view v) {
                   c.betas.clear();
                   for (auto item : split_list(v)) c.betas.push_back(parse_number<double>(item));
                 },
                 [](const ScenarioConfig& c) { return join<double>(c.betas, format_double); }});
    k.push_back(int_key("episodes", &ScenarioConfig::episodes));
    k.push_back(int_key("mis_per_episode", &ScenarioConfig::mis_per_episode));
    k.push_back(int_key("mi_len", &ScenarioConfig::mi_len));
    k.push_back(int_key("buffer", &ScenarioConfig::buffer));
    k.push_back(int_key("warmup", &ScenarioConfig::warmup));
    k.push_back(int_key("window", &ScenarioConfig::window));
    k.push_back(double_key("rc_threshold", &ScenarioConfig::rc_threshold));
    k.push_back(int_key("rc_max_points", &ScenarioConfig::rc_max_points));
    k.push_back(int_key("sweep_stop_after", &ScenarioConfig::sweep_stop_after));
    k.push_back(int_key("census_last", &ScenarioConfig::census_last));
    k.push_back({"removal_modes",
                 [](ScenarioConfig& c, std::string_view v) {
                   c.removal_modes.clear();
                   for (auto item : split_list(v)) {
                     if (item != "none" && item != "random" && item != "bc")
                       throw ConfigError("removal mode must be none, random or bc");
                     c.removal_modes.emplace_back(item);
                   }
                 },
                 [](const ScenarioConfig& c) {
                   return join<std::string>(c.removal_modes, [](const std::string& s) { return s; });
                 }});
    k.push_back(double_key("removal_fraction", &ScenarioConfig::removal_fraction));
    k.push_back(int_key("removal_at_episode", &ScenarioConfig::removal_at_episode));
    k.push_back(int_key("resilience_pre_window", &ScenarioConfig::resilience_pre_window));
    k.push_back(int_key("snapshot_time", &ScenarioConfig::snapshot_time));
    k.push_back(agent_double_key("gamma", &AgentConfig::gamma));
    k.push_back(agent_double_key("lr", &AgentConfig::learning_rate));
    k.push_back(agent_int_key("replay", &AgentConfig::replay_capacity));
    k.push_back(agent_int_key("batch", &AgentConfig::batch_size));
    k.push_back(agent_double_key("eps_start", &AgentConfig::eps_start));
    k.push_back(agent_double_key("eps_end", &AgentConfig::eps_end));
    k.push_back(agent_int_key("eps_decay_episodes", &AgentConfig::eps_decay_episodes));
    k.push_back(agent_int_key("target_sync", &AgentConfig::target_sync));
    k.push_back(agent_int_key("train_start", &AgentConfig::train_start));
    k.push_back(agent_int_key("hidden1", &AgentConfig::hidden1));
    k.push_back(agent_int_key("hidden2", &AgentConfig::hidden2));
    k.push_back({"peer_queues", [](ScenarioConfig& c, std::string_view v) { c.agent.peer_queues = parse_bool(v); },
                 [](const ScenarioConfig& c) { return std::string(c.agent.peer_queues ? "true" : "false"); }});
    k.push_back({"optimizer",
                 [](ScenarioConfig& c, std::string_view v) {
                   v = trim(v);
                   if (v == "sgd") c.agent.optimizer = OptimizerKind::SGD;
                   else if (v == "adam") c.agent.optimizer = OptimizerKind::Adam;
                   else throw ConfigError("optimizer must be sgd or adam");
                 },
                 [](const ScenarioConfig& c) {
                   return std::string(c.agent.optimizer == OptimizerKind::Adam ? "adam" : "sgd");
                 }});
    Key threads = int_key("threads", &ScenarioConfig::threads);
    threads.affects_results = false;
    k.push_back(threads);
    k.push_back({"out_dir", [](ScenarioConfig& c, std::string_view v) { c.out_dir = std::string(trim(v)); },
                 [](const ScenarioConfig& c) { return c.out_dir; }, false});
    return k;
  }();
  return keys;
}

const Key& find_key(std::string_view name) {
  for (const auto& k : key_table())
    if (k.name == name) return k;
  throw ConfigError("unknown config key '" + std::string(name) + "'");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& k : key_table()) out.push_back(k.name);
    return out;
  }();
  return names;
}

void set_config_value(ScenarioConfig& config, std::string_view key, std::string_view value) {
  const Key& k = find_key(trim(key));
  try {
    k.set(config, value);
  } catch (const ConfigError& e) {
    throw ConfigError(k.name + ": " + e.what());
  }
}

std::string get_config_value(const ScenarioConfig& config, std::string_view key) { return find_key(key).get(config); }

ScenarioConfig parse_config(std::istream& in, ScenarioConfig base) {
  std::string line;
  std::size_t number = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
    const std::string key(trim(view.substr(0, eq)));
    if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(number) + ": duplicate key '" + key + "'");
    try {
      set_config_value(base, key, view.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  return base;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return parse_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void validate(const ScenarioConfig& c) {
  const auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  const auto& net = c.network;
  if (net.generator == Generator::File) {
    if (net.edge_list.empty()) fail("network = file needs edge_list");
    if (!std::filesystem::is_regular_file(net.edge_list)) fail("edge list " + net.edge_list + " does not exist");
  } else {
    if (net.n < 4) fail("n must be at least 4");
    if (net.generator == Generator::BA && (net.m < 1 || net.m >= net.n)) fail("m must lie in [1, n)");
    if (net.generator == Generator::CE && net.ce_tiers < 0) fail("ce_tiers must be >= 0");
    if (net.generator == Generator::ER && !(net.er_mean_degree > 0.0)) fail("er_mean_degree must be positive");
    for (int k : c.k)
      if (k > net.n / 10) fail("k = " + std::to_string(k) + " exceeds n/10");
  }
  if (c.seeds.empty()) fail("seeds must not be empty");
  if (c.strategies.empty()) fail("strategies must not be empty");
  if (c.k.empty()) fail("k must not be empty");
  for (int k : c.k)
    if (k < 0) fail("k entries must be >= 0");
  if (c.r_over_n.empty()) fail("r_over_n must not be empty");
  for (double r : c.r_over_n)
    if (!(r > 0.0)) fail("r_over_n entries must be positive");
  for (double b : c.betas)
    if (!(b >= 0.0)) fail("betas must be >= 0");
  if (c.episodes < 0 || c.mis_per_episode < 1 || c.mi_len < 1) fail("episode settings must be positive");
  if (c.buffer < 1) fail("buffer must be positive");
  if (c.warmup < 0 || c.window < 2) fail("warmup must be >= 0 and window >= 2");
  if (c.rc_max_points < 0 || c.sweep_stop_after < 0) fail("rc_max_points and sweep_stop_after must be >= 0");
  if (c.census_last < 1) fail("census_last must be >= 1");
  if (!(c.removal_fraction >= 0.0 && c.removal_fraction <= 1.0)) fail("removal_fraction must lie in [0, 1]");
  if (c.removal_at_episode < 0) fail("removal_at_episode must be >= 0");
  if (c.resilience_pre_window < 1) fail("resilience_pre_window must be >= 1");
  if (c.snapshot_time < 0) fail("snapshot_time must be >= 0");
  if (c.threads < 0) fail("threads must be >= 0");
  const auto& a = c.agent;
  if (!(a.gamma >= 0.0 && a.gamma < 1.0)) fail("gamma must lie in [0, 1)");
  if (!(a.learning_rate > 0.0)) fail("lr must be positive");
  if (a.replay_capacity < 1 || a.batch_size < 1 || a.target_sync < 1 || a.hidden1 < 1 || a.hidden2 < 1)
    fail("replay, batch, target_sync and hidden sizes must be positive");
  if (!(a.eps_start >= 0.0 && a.eps_start <= 1.0 && a.eps_end >= 0.0 && a.eps_end <= 1.0))
    fail("epsilon values must lie in [0, 1]");
}

std::string canonical_config(const ScenarioConfig& config) {
  std::string out;
  for (const auto& k : key_table()) out += k.name + " = " + k.get(config) + "\n";
  return out;
}

std::string config_hash(const ScenarioConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& k : key_table()) {
    if (!k.affects_results) continue;
    for (unsigned char ch : k.name + "=" + k.get(config) + "\n") {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace hdr
