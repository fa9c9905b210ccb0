#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "hdrouting/graph.hpp"
#include "hdrouting/routing.hpp"

namespace hdr {

enum class Strategy { SP, LD, HD };

std::string to_string(Strategy s);
Strategy parse_strategy(std::string_view text);

struct SimConfig {
  double rate = 1.0;  // R, packets per step; fractional part realized by a Bernoulli draw
  int buffer = 40;
  int mi_len = 10;
  Strategy strategy = Strategy::SP;
  std::uint64_t seed = 1;
  bool generate_before_forward = true;
  /// Record every packet's visited nodes and count revisits. Slow; for tests.
  bool track_routes = false;
};

enum class BypassState : std::uint8_t { None, Pending, Taken };

struct Packet {
  NodeId source = -1;
  NodeId destination = -1;
  NodeId at = -1;
  std::int64_t created_at = 0;
  std::int64_t arrived_at = 0;  // step in which it entered its current queue
  int sp_length = 0;
  BypassState bypass = BypassState::None;
  NodeId bypass_node = -1;
  int beta_index = -1;
  int agent = -1;  // rank of the directing RL node, -1 if none
  /// Explicit node sequence (route_table < 0) or next-hop table lookups.
  int route_table = -1;  // index into RoutingTables::bypass, kLdTable for LD
  std::vector<NodeId> route;
  std::size_t route_pos = 0;
  std::vector<NodeId> visited;

  static constexpr int kLdTable = -2;
};

struct TrafficCounters {
  std::int64_t generated = 0;
  std::int64_t delivered = 0;
  std::int64_t dropped_overflow = 0;
  std::int64_t dropped_missing_link = 0;
  std::int64_t in_transit = 0;
  std::int64_t bypass_decisions = 0;
  std::int64_t redirects_to_rl = 0;
  std::int64_t route_revisits = 0;
  std::vector<std::int64_t> travel_time_hist;  // index = T
  std::vector<std::int64_t> drop_by_node;

  std::int64_t dropped() const noexcept { return dropped_overflow + dropped_missing_link; }
  /// In-transit plus cumulative dropped packets.
  std::int64_t w() const noexcept { return in_transit + dropped(); }
  double mean_travel_time() const;
};

/// Outcome of the packets one agent directed, resolved within one monitor interval.
struct AgentIntervalStats {
  double scaled_travel_sum = 0.0;
  int delivered = 0;
  int dropped = 0;

  int resolved() const noexcept { return delivered + dropped; }
  /// Mean of T / (l(s,d) * B), each term capped at 1; 0 when nothing was delivered.
  double mean_scaled_travel_time() const noexcept { return delivered ? scaled_travel_sum / delivered : 0.0; }
  /// Dropped / resolved; 0 when nothing resolved.
  double drop_rate() const noexcept { return resolved() ? static_cast<double>(dropped) / resolved() : 0.0; }
  double reward() const noexcept { return -mean_scaled_travel_time() - drop_rate(); }
};

struct StepSummary {
  std::int64_t t = 0;
  int generated = 0;
  int delivered = 0;
  int dropped = 0;
  std::int64_t in_transit = 0;
  std::int64_t w = 0;
};

enum class RemovalMode { Random, Betweenness };
RemovalMode parse_removal_mode(std::string_view text);
std::string to_string(RemovalMode m);

/// Discrete-time packet simulator on a fixed network with FIFO queues of
/// capacity B and one forwarded packet per node per step.
class Simulator {
 public:
  Simulator(std::shared_ptr<const RoutingTables> tables, RLNodeSet rl, SimConfig config);

  /// Restarts traffic: empties queues, clears counters and time. Keeps the RNG
  /// stream, agent actions and removed links.
  void reset();

  StepSummary step();
  /// Runs mi_len steps and returns per-agent statistics for packets resolved in them.
  std::vector<AgentIntervalStats> run_mi();
  void run(std::int64_t steps);

  void set_action(int agent, int beta_index);
  int action(int agent) const { return actions_[static_cast<std::size_t>(agent)]; }
  void set_rate(double rate);
  /// Called at the end of every step; pass an empty function to detach.
  void set_step_observer(std::function<void(const StepSummary&)> observer) { observer_ = std::move(observer); }

  int queue_length(NodeId v) const { return queue_size_[static_cast<std::size_t>(v)]; }
  double normalized_queue(NodeId v) const { return static_cast<double>(queue_length(v)) / config_.buffer; }

  /// Generates one packet s -> d now (counts as generated; may overflow-drop).
  bool inject(NodeId s, NodeId d);

  /// Removes round(fraction * E) live links. Routing tables are not rebuilt;
  /// packets whose next hop crosses a removed link are dropped.
  std::vector<Edge> remove_links(double fraction, RemovalMode mode, Rng& rng);
  bool link_alive(NodeId u, NodeId v) const;
  std::span<const Edge> removed_links() const noexcept { return removed_list_; }

  const TrafficCounters& counters() const noexcept { return counters_; }
  /// W(t) for t = 0..time(); W(0) = 0.
  const std::vector<std::int64_t>& w_series() const noexcept { return w_series_; }
  std::int64_t time() const noexcept { return time_; }
  const SimConfig& config() const noexcept { return config_; }
  const RLNodeSet& rl_nodes() const noexcept { return rl_; }
  const RoutingTables& tables() const noexcept { return *tables_; }
  const Network& network() const noexcept { return *tables_->network; }

  /// Packet conservation and queue bounds; throws InvariantViolation.
  void check_invariants() const;
  /// Packet ids currently queued at v, head first.
  std::vector<int> queue_contents(NodeId v) const;
  const Packet& packet(int id) const { return pool_[static_cast<std::size_t>(id)]; }

 private:
  int allocate_packet();
  void release_packet(int id);
  bool enqueue(NodeId v, int id);
  int pop(NodeId v);
  int head(NodeId v) const;
  void generate();
  void forward();
  NodeId next_hop(const Packet& p) const;
  void advance(Packet& p, NodeId to);
  void take_bypass_decision(Packet& p);
  void drop(int id, NodeId where, bool missing_link);
  void deliver(int id);

  std::shared_ptr<const RoutingTables> tables_;
  RLNodeSet rl_;
  SimConfig config_;
  Rng rng_;

  std::vector<int> actions_;
  std::vector<AgentIntervalStats> agent_stats_;

  std::vector<Packet> pool_;
  std::vector<int> free_;
  std::vector<int> queue_slots_;  // N * B ring buffers
  std::vector<int> queue_head_;
  std::vector<int> queue_size_;
  std::vector<NodeId> active_;

  std::unordered_set<std::uint64_t> removed_;
  std::vector<Edge> removed_list_;

  TrafficCounters counters_;
  std::vector<std::int64_t> w_series_;
  std::int64_t time_ = 0;
  std::vector<NodeId> scratch_;
  std::function<void(const StepSummary&)> observer_;
};

/// Order parameter: least-squares slope of W(t) over t in [warmup, warmup + window],
/// divided by R and clamped at 0. Throws InsufficientData if the series is too short.
double order_parameter(std::span<const std::int64_t> w_series, double rate, int warmup = 500, int window = 1500);

struct RatePoint {
  double rate = 0.0;
  double eta = 0.0;
};

struct RcOptions {
  double threshold = 0.02;
  /// Fit only the lowest `max_points` congested rates (0 = all of them).
  int max_points = 0;
};

/// Extrapolates the linear trend of eta(R) over congested points to eta = 0.
/// Throws InsufficientData with fewer than 3 congested points or a slope <= 0.
double estimate_rc(std::span<const RatePoint> sweep, const RcOptions& options = {});

/// Single-delivery capacity bound N(N-1) / max raw BC.
double capacity_bound(const Network& net);

}  // namespace hdr
