#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "hdrouting/graph.hpp"
#include "hdrouting/traffic.hpp"

namespace hdr {

/// Fully connected network with rectifier hidden layers and a linear output.
/// Parameters are stored flat, layer by layer: weights (out x in, row-major)
/// followed by biases.
class QNetwork {
 public:
  QNetwork() = default;
  /// All parameters zero.
  explicit QNetwork(std::vector<int> layer_sizes);
  /// He-uniform weights, zero biases.
  QNetwork(std::vector<int> layer_sizes, Rng& rng);

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  const std::vector<int>& layer_sizes() const noexcept { return sizes_; }

  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }

  /// Throws InvalidParameter on a dimension mismatch.
  std::vector<double> forward(std::span<const double> input) const;

  /// Adds d/dtheta of sum_i output_grad[i] * Q_i(input) into `grad`; returns Q(input).
  std::vector<double> backward(std::span<const double> input, std::span<const double> output_grad,
                               std::span<double> grad) const;

  bool operator==(const QNetwork& other) const = default;

 private:
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }

  std::vector<int> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

enum class OptimizerKind { SGD, Adam };

/// DQN hyperparameters. None of these are pinned by the routing model itself.
struct AgentConfig {
  double gamma = 0.9;
  double learning_rate = 1e-3;
  std::size_t replay_capacity = 10000;
  int batch_size = 32;
  double eps_start = 1.0;
  double eps_end = 0.05;
  int eps_decay_episodes = 20;
  int target_sync = 50;
  std::size_t train_start = 10;
  int hidden1 = 64;
  int hidden2 = 64;
  bool peer_queues = false;
  OptimizerKind optimizer = OptimizerKind::Adam;
};

/// Linear decay from eps_start to eps_end over eps_decay_episodes, then flat.
double epsilon_at(const AgentConfig& config, int episode);

struct Experience {
  std::vector<double> state;
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10000);
  void push(Experience e);
  std::size_t size() const noexcept { return items_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  const Experience& operator[](std::size_t i) const { return items_[i]; }
  /// Uniform with replacement.
  std::size_t sample_index(Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Experience> items_;
};

class DqnAgent {
 public:
  DqnAgent(int state_size, int action_count, const AgentConfig& config, std::uint64_t seed);

  /// Epsilon-greedy; greedy ties go to the lowest index.
  int act(std::span<const double> state, double epsilon);
  std::vector<double> q_values(std::span<const double> state) const { return online_.forward(state); }

  void remember(Experience e) { replay_.push(std::move(e)); }
  /// One minibatch update; nullopt while the replay holds fewer than train_start items.
  std::optional<double> train_step();

  QNetwork& online() noexcept { return online_; }
  const QNetwork& online() const noexcept { return online_; }
  const QNetwork& target() const noexcept { return target_; }
  const ReplayBuffer& replay() const noexcept { return replay_; }
  const AgentConfig& config() const noexcept { return config_; }
  std::size_t updates() const noexcept { return updates_; }
  Rng& rng() noexcept { return rng_; }

 private:
  AgentConfig config_;
  int actions_;
  Rng rng_;
  QNetwork online_;
  QNetwork target_;
  ReplayBuffer replay_;
  std::size_t updates_ = 0;
  std::vector<double> grad_;
  std::vector<double> adam_m_, adam_v_;
};

/// Agent observation: own queue / B, optionally followed by the other RL nodes' queues.
std::vector<double> observe_state(const Simulator& sim, int agent, bool peer_queues);

/// One DQN agent per RL node of `sim`, with independent RNG streams.
std::vector<DqnAgent> make_agents(const Simulator& sim, const AgentConfig& config, std::uint64_t seed);

struct IntervalOutcome {
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<AgentIntervalStats> stats;
};

/// One monitor interval: every agent observes and acts, the simulator runs
/// mi_len steps, then (when `learn`) experiences are stored and trained on.
IntervalOutcome run_interval(Simulator& sim, std::vector<DqnAgent>& agents, double epsilon, bool learn,
                             bool zero_rewards = false);

struct EpisodeRecord {
  int episode = 0;
  double epsilon = 0.0;
  std::vector<double> mean_reward;               // per agent, averaged over MIs
  std::vector<std::vector<long>> action_counts;  // [agent][beta]
  std::int64_t generated = 0, delivered = 0, dropped = 0;
  std::int64_t decisions = 0, redirects = 0;
  double mean_travel_time = 0.0;
  std::vector<std::int64_t> travel_time_hist;
};

struct TrainingLog {
  std::vector<NodeId> agent_nodes;
  std::vector<double> beta_set;
  std::vector<EpisodeRecord> episodes;
};

struct TrainingOptions {
  int episodes = 60;
  int mis_per_episode = 50;
  bool learn = true;
  bool zero_rewards = false;
  /// Called after each episode (0-based index) before the next one starts.
  std::function<void(int, Simulator&)> after_episode;
};

/// Runs `episodes` episodes, each restarting traffic (weights and replay persist).
TrainingLog episode_loop(Simulator& sim, std::vector<DqnAgent>& agents, const TrainingOptions& options);

/// Normalized action frequencies per agent over the last `last_n` episodes.
std::vector<std::vector<double>> action_distribution(const TrainingLog& log, int last_n);

/// Text checkpoint with hexfloat weights; restores forward outputs bit-identically.
void save_checkpoint(std::span<const DqnAgent> agents, std::ostream& out);
std::vector<QNetwork> load_checkpoint(std::istream& in);

}  // namespace hdr
