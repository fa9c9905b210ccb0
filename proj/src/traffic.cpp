#include "hdrouting/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hdrouting/errors.hpp"

namespace hdr {

namespace {

std::uint64_t edge_key(NodeId u, NodeId v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) | static_cast<std::uint32_t>(v);
}

}  // namespace

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::SP: return "SP";
    case Strategy::LD: return "LD";
    case Strategy::HD: return "HD";
  }
  return "?";
}

Strategy parse_strategy(std::string_view text) {
  if (text == "SP" || text == "sp") return Strategy::SP;
  if (text == "LD" || text == "ld") return Strategy::LD;
  if (text == "HD" || text == "hd") return Strategy::HD;
  throw InvalidParameter("unknown strategy '" + std::string(text) + "'");
}

RemovalMode parse_removal_mode(std::string_view text) {
  if (text == "random") return RemovalMode::Random;
  if (text == "bc") return RemovalMode::Betweenness;
  throw InvalidParameter("unknown removal mode '" + std::string(text) + "' (expected random|bc)");
}

std::string to_string(RemovalMode m) { return m == RemovalMode::Random ? "random" : "bc"; }

double TrafficCounters::mean_travel_time() const {
  double sum = 0.0, count = 0.0;
  for (std::size_t t = 0; t < travel_time_hist.size(); ++t) {
    sum += static_cast<double>(t) * static_cast<double>(travel_time_hist[t]);
    count += static_cast<double>(travel_time_hist[t]);
  }
  return count > 0 ? sum / count : 0.0;
}

Simulator::Simulator(std::shared_ptr<const RoutingTables> tables, RLNodeSet rl, SimConfig config)
    : tables_(std::move(tables)), rl_(std::move(rl)), config_(config), rng_(config.seed) {
  if (!tables_ || !tables_->network) throw InvalidParameter("simulator needs routing tables");
  if (config_.buffer < 1) throw InvalidParameter("buffer size must be >= 1");
  if (config_.mi_len < 1) throw InvalidParameter("monitor interval must be >= 1 step");
  set_rate(config_.rate);
  if (config_.strategy != Strategy::HD && !rl_.empty())
    throw InvalidParameter("RL nodes are only meaningful for the HD strategy");
  const auto n = static_cast<std::size_t>(network().size());
  actions_.assign(static_cast<std::size_t>(rl_.size()), 0);
  agent_stats_.assign(static_cast<std::size_t>(rl_.size()), {});
  queue_slots_.assign(n * static_cast<std::size_t>(config_.buffer), -1);
  queue_head_.assign(n, 0);
  queue_size_.assign(n, 0);
  reset();
}

void Simulator::reset() {
  const auto n = static_cast<std::size_t>(network().size());
  std::fill(queue_head_.begin(), queue_head_.end(), 0);
  std::fill(queue_size_.begin(), queue_size_.end(), 0);
  free_.clear();
  for (int id = static_cast<int>(pool_.size()) - 1; id >= 0; --id) free_.push_back(id);
  counters_ = TrafficCounters{};
  counters_.drop_by_node.assign(n, 0);
  for (auto& s : agent_stats_) s = {};
  w_series_.assign(1, 0);
  time_ = 0;
}

void Simulator::set_rate(double rate) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) throw InvalidParameter("generation rate must be finite and >= 0");
  config_.rate = rate;
}

void Simulator::set_action(int agent, int beta_index) {
  if (agent < 0 || agent >= rl_.size()) throw InvalidParameter("agent index out of range");
  if (beta_index < 0 || static_cast<std::size_t>(beta_index) >= tables_->beta_set.size())
    throw InvalidParameter("beta index out of range");
  actions_[static_cast<std::size_t>(agent)] = beta_index;
}

int Simulator::allocate_packet() {
  if (free_.empty()) {
    pool_.emplace_back();
    return static_cast<int>(pool_.size()) - 1;
  }
  const int id = free_.back();
  free_.pop_back();
  return id;
}

void Simulator::release_packet(int id) {
  free_.push_back(id);
  --counters_.in_transit;
}

bool Simulator::enqueue(NodeId v, int id) {
  const auto vi = static_cast<std::size_t>(v);
  if (queue_size_[vi] >= config_.buffer) return false;
  const auto b = static_cast<std::size_t>(config_.buffer);
  const auto slot = (static_cast<std::size_t>(queue_head_[vi]) + static_cast<std::size_t>(queue_size_[vi])) % b;
  queue_slots_[vi * b + slot] = id;
  ++queue_size_[vi];
  return true;
}

int Simulator::head(NodeId v) const {
  const auto vi = static_cast<std::size_t>(v);
  return queue_slots_[vi * static_cast<std::size_t>(config_.buffer) + static_cast<std::size_t>(queue_head_[vi])];
}

int Simulator::pop(NodeId v) {
  const auto vi = static_cast<std::size_t>(v);
  const int id = head(v);
  queue_head_[vi] = (queue_head_[vi] + 1) % config_.buffer;
  --queue_size_[vi];
  return id;
}

std::vector<int> Simulator::queue_contents(NodeId v) const {
  const auto vi = static_cast<std::size_t>(v);
  std::vector<int> out;
  for (int i = 0; i < queue_size_[vi]; ++i)
    out.push_back(queue_slots_[vi * static_cast<std::size_t>(config_.buffer) +
                               static_cast<std::size_t>((queue_head_[vi] + i) % config_.buffer)]);
  return out;
}

bool Simulator::inject(NodeId s, NodeId d) {
  const NodeId n = network().size();
  if (s < 0 || d < 0 || s >= n || d >= n || s == d) throw InvalidParameter("invalid packet endpoints");
  const int id = allocate_packet();
  Packet& p = pool_[static_cast<std::size_t>(id)];
  p.source = s;
  p.destination = d;
  p.at = s;
  p.created_at = time_;
  p.arrived_at = time_;
  p.sp_length = tables_->sp.distance(s, d);
  p.bypass = BypassState::None;
  p.bypass_node = -1;
  p.beta_index = -1;
  p.agent = -1;
  p.route_pos = 0;
  p.route.clear();
  if (config_.strategy == Strategy::LD) {
    p.route_table = Packet::kLdTable;
  } else {
    p.route_table = -1;
    tables_->sp.sample_into(s, d, rng_, p.route);
    if (config_.strategy == Strategy::HD) {
      const int at = designated_bypass_index(p.route, rl_);
      if (at >= 0) {
        p.bypass = BypassState::Pending;
        p.bypass_node = p.route[static_cast<std::size_t>(at)];
      }
    }
  }
  if (config_.track_routes) p.visited.assign(1, s);
  ++counters_.generated;
  ++counters_.in_transit;
  if (!enqueue(s, id)) {
    drop(id, s, false);
    return false;
  }
  return true;
}

void Simulator::generate() {
  const double whole = std::floor(config_.rate);
  int count = static_cast<int>(whole);
  const double frac = config_.rate - whole;
  if (frac > 0.0 && std::bernoulli_distribution(frac)(rng_)) ++count;
  const NodeId n = network().size();
  std::uniform_int_distribution<NodeId> node(0, n - 1);
  for (int i = 0; i < count; ++i) {
    const NodeId s = node(rng_);
    NodeId d = node(rng_);
    while (d == s) d = node(rng_);
    inject(s, d);
  }
}

NodeId Simulator::next_hop(const Packet& p) const {
  if (p.route_table == -1) return p.route[p.route_pos + 1];
  const auto& table = p.route_table == Packet::kLdTable ? tables_->ld
                                                         : tables_->bypass[static_cast<std::size_t>(p.route_table)];
  return table.next(p.at, p.destination);
}

void Simulator::take_bypass_decision(Packet& p) {
  const int agent = rl_.rank_of(p.bypass_node);
  const int beta_index = actions_[static_cast<std::size_t>(agent)];
  p.bypass = BypassState::Taken;
  p.agent = agent;
  p.beta_index = beta_index;
  ++counters_.bypass_decisions;
  if (tables_->beta_set[static_cast<std::size_t>(beta_index)] != 0.0) {
    p.route_table = beta_index;
    tables_->bypass[static_cast<std::size_t>(beta_index)].chain_into(p.at, p.destination, scratch_);
  } else {
    scratch_.assign(p.route.begin() + static_cast<std::ptrdiff_t>(p.route_pos), p.route.end());
  }
  for (std::size_t i = 1; i + 1 < scratch_.size(); ++i) {
    const int r = rl_.rank_of(scratch_[i]);
    if (r >= 0 && r != agent) {
      ++counters_.redirects_to_rl;
      break;
    }
  }
}

void Simulator::advance(Packet& p, NodeId to) {
  if (config_.track_routes) {
    if (std::find(p.visited.begin(), p.visited.end(), to) != p.visited.end()) ++counters_.route_revisits;
    p.visited.push_back(to);
  }
  p.at = to;
  if (p.route_table == -1) ++p.route_pos;
}

void Simulator::drop(int id, NodeId where, bool missing_link) {
  const Packet& p = pool_[static_cast<std::size_t>(id)];
  if (missing_link)
    ++counters_.dropped_missing_link;
  else
    ++counters_.dropped_overflow;
  ++counters_.drop_by_node[static_cast<std::size_t>(where)];
  if (p.agent >= 0) ++agent_stats_[static_cast<std::size_t>(p.agent)].dropped;
  release_packet(id);
}

void Simulator::deliver(int id) {
  const Packet& p = pool_[static_cast<std::size_t>(id)];
  const std::int64_t travel = time_ + 1 - p.created_at;
  ++counters_.delivered;
  if (counters_.travel_time_hist.size() <= static_cast<std::size_t>(travel))
    counters_.travel_time_hist.resize(static_cast<std::size_t>(travel) + 1, 0);
  ++counters_.travel_time_hist[static_cast<std::size_t>(travel)];
  if (p.agent >= 0) {
    auto& s = agent_stats_[static_cast<std::size_t>(p.agent)];
    const double scale = static_cast<double>(p.sp_length) * config_.buffer;
    s.scaled_travel_sum += std::min(1.0, static_cast<double>(travel) / scale);
    ++s.delivered;
  }
  release_packet(id);
}

void Simulator::forward() {
  const std::int64_t now = time_ + 1;
  const NodeId n = network().size();
  active_.clear();
  for (NodeId v = 0; v < n; ++v)
    if (queue_size_[static_cast<std::size_t>(v)] > 0) active_.push_back(v);
  std::shuffle(active_.begin(), active_.end(), rng_);
  const bool check_links = !removed_.empty();
  for (NodeId v : active_) {
    // Queues are FIFO, so if the head arrived this step every packet behind it did too.
    const int id = head(v);
    Packet& p = pool_[static_cast<std::size_t>(id)];
    if (p.arrived_at >= now) continue;
    pop(v);
    if (p.bypass == BypassState::Pending && next_hop(p) == p.bypass_node) take_bypass_decision(p);
    const NodeId next = next_hop(p);
    if (check_links && removed_.count(edge_key(v, next))) {
      drop(id, v, true);
      continue;
    }
    if (next == p.destination) {
      deliver(id);
      continue;
    }
    if (!enqueue(next, id)) {
      drop(id, next, false);
      continue;
    }
    p.arrived_at = now;
    advance(p, next);
  }
}

StepSummary Simulator::step() {
  const auto generated = counters_.generated;
  const auto delivered = counters_.delivered;
  const auto dropped = counters_.dropped();
  if (config_.generate_before_forward) {
    generate();
    forward();
  } else {
    forward();
    generate();
  }
  ++time_;
  w_series_.push_back(counters_.w());
  StepSummary s;
  s.t = time_;
  s.generated = static_cast<int>(counters_.generated - generated);
  s.delivered = static_cast<int>(counters_.delivered - delivered);
  s.dropped = static_cast<int>(counters_.dropped() - dropped);
  s.in_transit = counters_.in_transit;
  s.w = counters_.w();
  if (observer_) observer_(s);
  return s;
}

void Simulator::run(std::int64_t steps) {
  for (std::int64_t i = 0; i < steps; ++i) step();
}

std::vector<AgentIntervalStats> Simulator::run_mi() {
  for (auto& s : agent_stats_) s = {};
  run(config_.mi_len);
  return agent_stats_;
}

bool Simulator::link_alive(NodeId u, NodeId v) const {
  return network().has_edge(u, v) && !removed_.count(edge_key(u, v));
}

std::vector<Edge> Simulator::remove_links(double fraction, RemovalMode mode, Rng& rng) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidParameter("removal fraction must lie in (0, 1)");
  const Network& net = network();
  std::vector<Edge> alive;
  for (const auto& e : net.edges())
    if (!removed_.count(edge_key(e.first, e.second))) alive.push_back(e);
  const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(net.edge_count())));
  std::vector<Edge> chosen;
  if (count == 0 || alive.empty()) return chosen;

  if (mode == RemovalMode::Random) {
    std::shuffle(alive.begin(), alive.end(), rng);
    chosen.assign(alive.begin(), alive.begin() + static_cast<std::ptrdiff_t>(std::min(count, alive.size())));
  } else {
    // Weighted sampling without replacement (Efraimidis-Spirakis): keep the
    // largest log(u)/w keys, w = mean endpoint BC.
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::pair<double, std::size_t>> keys;
    keys.reserve(alive.size());
    for (std::size_t i = 0; i < alive.size(); ++i) {
      const double w = 0.5 * (net.bc(alive[i].first) + net.bc(alive[i].second));
      double u = unit(rng);
      while (u <= 0.0) u = unit(rng);
      const double key = w > 0.0 ? std::log(u) / w : -std::numeric_limits<double>::infinity();
      keys.emplace_back(key, i);
    }
    const auto take = std::min(count, keys.size());
    std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(take), keys.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
    for (std::size_t i = 0; i < take; ++i) chosen.push_back(alive[keys[i].second]);
  }
  for (const auto& e : chosen) {
    removed_.insert(edge_key(e.first, e.second));
    removed_list_.push_back(e);
  }
  return chosen;
}

void Simulator::check_invariants() const {
  const auto& c = counters_;
  if (c.generated != c.delivered + c.dropped() + c.in_transit)
    throw InvariantViolation("packet conservation violated");
  std::int64_t queued = 0;
  for (int q : queue_size_) {
    if (q < 0 || q > config_.buffer) throw InvariantViolation("queue length out of bounds");
    queued += q;
  }
  if (queued != c.in_transit) throw InvariantViolation("queued packets do not match in-transit count");
}

double order_parameter(std::span<const std::int64_t> w, double rate, int warmup, int window) {
  if (!(rate > 0.0)) throw InvalidParameter("order parameter needs a positive generation rate");
  if (warmup < 0 || window < 2) throw InvalidParameter("invalid order-parameter window");
  const auto last = static_cast<std::size_t>(warmup) + static_cast<std::size_t>(window);
  if (w.size() <= last)
    throw InsufficientData("run too short for order parameter: need " + std::to_string(last) + " steps, have " +
                           std::to_string(w.empty() ? 0 : w.size() - 1));
  const double count = static_cast<double>(window + 1);
  double mean_t = 0.0, mean_w = 0.0;
  for (auto t = static_cast<std::size_t>(warmup); t <= last; ++t) {
    mean_t += static_cast<double>(t);
    mean_w += static_cast<double>(w[t]);
  }
  mean_t /= count;
  mean_w /= count;
  double sxy = 0.0, sxx = 0.0;
  for (auto t = static_cast<std::size_t>(warmup); t <= last; ++t) {
    const double dt = static_cast<double>(t) - mean_t;
    sxy += dt * (static_cast<double>(w[t]) - mean_w);
    sxx += dt * dt;
  }
  return std::max(0.0, sxy / sxx / rate);
}

double estimate_rc(std::span<const RatePoint> sweep, const RcOptions& options) {
  std::vector<RatePoint> congested;
  for (const auto& p : sweep)
    if (p.eta > options.threshold) congested.push_back(p);
  std::sort(congested.begin(), congested.end(), [](const auto& a, const auto& b) { return a.rate < b.rate; });
  if (options.max_points > 0 && congested.size() > static_cast<std::size_t>(options.max_points))
    congested.resize(static_cast<std::size_t>(options.max_points));
  if (congested.size() < 3)
    throw InsufficientData("need at least 3 points with eta > " + std::to_string(options.threshold) + ", have " +
                           std::to_string(congested.size()));
  double mx = 0.0, my = 0.0;
  for (const auto& p : congested) {
    mx += p.rate;
    my += p.eta;
  }
  mx /= static_cast<double>(congested.size());
  my /= static_cast<double>(congested.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& p : congested) {
    sxy += (p.rate - mx) * (p.eta - my);
    sxx += (p.rate - mx) * (p.rate - mx);
  }
  if (sxx == 0.0 || !(sxy / sxx > 0.0)) throw InsufficientData("eta(R) trend has nonpositive slope");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  return -intercept / slope;
}

double capacity_bound(const Network& net) {
  const double n = net.size();
  const double max_raw = *std::max_element(net.raw_bc().begin(), net.raw_bc().end());
  if (!(max_raw > 0.0)) throw InvalidParameter("capacity bound undefined: no node has positive betweenness");
  return n * (n - 1.0) / max_raw;
}

}  // namespace hdr
