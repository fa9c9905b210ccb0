#include "hdrouting/routing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <tuple>

#include "hdrouting/errors.hpp"
#include "parallel.hpp"

namespace hdr {

const std::vector<double>& default_beta_set() {
  static const std::vector<double> set{0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 2.0};
  return set;
}

NextHopTable::NextHopTable(NodeId n, std::vector<NodeId> next_by_destination)
    : n_(n), next_(std::move(next_by_destination)) {
  if (next_.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
    throw InvalidParameter("next-hop matrix has wrong size");
}

void NextHopTable::chain_into(NodeId from, NodeId to, std::vector<NodeId>& out) const {
  out.clear();
  out.push_back(from);
  NodeId at = from;
  while (at != to) {
    at = next(at, to);
    if (at < 0 || static_cast<NodeId>(out.size()) > n_)
      throw InvariantViolation("next-hop chain does not reach its destination");
    out.push_back(at);
  }
}

std::vector<NodeId> NextHopTable::chain(NodeId from, NodeId to) const {
  std::vector<NodeId> out;
  chain_into(from, to, out);
  return out;
}

std::vector<double> bypass_weights(const Network& net, double beta, BypassWeight source) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidParameter("beta must be finite and >= 0");
  std::vector<double> w(static_cast<std::size_t>(net.size()));
  for (NodeId v = 0; v < net.size(); ++v) {
    const double base = source == BypassWeight::Betweenness ? net.bc(v) : static_cast<double>(net.degree(v));
    w[static_cast<std::size_t>(v)] = std::pow(base, beta);
  }
  return w;
}

NextHopTable build_weighted_table(const Network& net, std::span<const double> node_weight, int threads) {
  const NodeId n = net.size();
  if (node_weight.size() != static_cast<std::size_t>(n)) throw InvalidParameter("node weight vector has wrong size");
  for (double w : node_weight)
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidParameter("node weights must be finite and nonnegative");

  std::vector<NodeId> next(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), -1);
  detail::parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t di) {
    const auto d = static_cast<NodeId>(di);
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> cost(static_cast<std::size_t>(n), kInf);
    std::vector<int> hops(static_cast<std::size_t>(n), std::numeric_limits<int>::max());
    NodeId* row = next.data() + di * static_cast<std::size_t>(n);
    using Key = std::tuple<double, int, NodeId>;
    std::priority_queue<Key, std::vector<Key>, std::greater<>> heap;
    cost[di] = 0.0;
    hops[di] = 0;
    heap.emplace(0.0, 0, d);
    while (!heap.empty()) {
      const auto [c, h, u] = heap.top();
      heap.pop();
      const auto ui = static_cast<std::size_t>(u);
      if (c != cost[ui] || h != hops[ui]) continue;
      const double through = c + node_weight[ui];
      for (NodeId x : net.neighbors(u)) {
        if (x == d) continue;
        const auto xi = static_cast<std::size_t>(x);
        const int nh = h + 1;
        const bool better = std::tie(through, nh) < std::tie(cost[xi], hops[xi]);
        if (better || (through == cost[xi] && nh == hops[xi] && u < row[xi])) {
          cost[xi] = through;
          hops[xi] = nh;
          row[xi] = u;
          if (better) heap.emplace(through, nh, x);
        }
      }
    }
  });
  return NextHopTable(n, std::move(next));
}

NextHopTable build_ld_table(const Network& net, int threads) {
  const auto w = bypass_weights(net, 1.0, BypassWeight::Degree);
  return build_weighted_table(net, w, threads);
}

ShortestPathIndex::ShortestPathIndex(std::shared_ptr<const Network> net) : net_(std::move(net)) {
  if (!net_) throw InvalidParameter("null network");
  n_ = net_->size();
  if (n_ > std::numeric_limits<std::uint16_t>::max())
    throw InvalidParameter("network too large for the all-pairs shortest-path index");
  const auto n = static_cast<std::size_t>(n_);
  dist_.assign(n * n, std::numeric_limits<std::uint16_t>::max());
  sigma_.assign(n * n, 0.0);
  std::vector<NodeId> queue(n);
  for (std::size_t r = 0; r < n; ++r) {
    auto* dist = dist_.data() + r * n;
    auto* sigma = sigma_.data() + r * n;
    dist[r] = 0;
    sigma[r] = 1.0;
    std::size_t head = 0, tail = 0;
    queue[tail++] = static_cast<NodeId>(r);
    while (head < tail) {
      const NodeId u = queue[head++];
      const auto ui = static_cast<std::size_t>(u);
      for (NodeId v : net_->neighbors(u)) {
        const auto vi = static_cast<std::size_t>(v);
        if (dist[vi] == std::numeric_limits<std::uint16_t>::max()) {
          dist[vi] = static_cast<std::uint16_t>(dist[ui] + 1);
          queue[tail++] = v;
        }
        if (dist[vi] == dist[ui] + 1) sigma[vi] += sigma[ui];
      }
    }
  }
}

void ShortestPathIndex::sample_into(NodeId s, NodeId d, Rng& rng, std::vector<NodeId>& out) const {
  out.clear();
  out.push_back(s);
  const std::uint16_t* dist = dist_.data() + static_cast<std::size_t>(d) * static_cast<std::size_t>(n_);
  const double* sigma = sigma_.data() + static_cast<std::size_t>(d) * static_cast<std::size_t>(n_);
  NodeId u = s;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Stepping to v with probability sigma(v,d)/sigma(u,d) makes every shortest path equally likely.
  while (u != d) {
    const int want = dist[u] - 1;
    const double target = unit(rng) * sigma[u];
    double acc = 0.0;
    NodeId pick = -1;
    for (NodeId v : net_->neighbors(u)) {
      if (dist[v] != want) continue;
      pick = v;
      acc += sigma[v];
      if (acc > target) break;
    }
    if (pick < 0) throw InvariantViolation("shortest-path index is inconsistent");
    out.push_back(pick);
    u = pick;
  }
}

std::vector<NodeId> ShortestPathIndex::sample(NodeId s, NodeId d, Rng& rng) const {
  std::vector<NodeId> out;
  sample_into(s, d, rng, out);
  return out;
}

std::shared_ptr<const RoutingTables> build_routing_tables(std::shared_ptr<const Network> net,
                                                          const RoutingOptions& options) {
  if (!net) throw InvalidParameter("null network");
  if (options.beta_set.empty()) throw InvalidParameter("beta set must not be empty");
  auto tables = std::make_shared<RoutingTables>();
  tables->network = net;
  tables->beta_set = options.beta_set;
  for (double beta : options.beta_set) {
    const auto w = bypass_weights(*net, beta, options.weight);
    tables->bypass.push_back(build_weighted_table(*net, w, options.threads));
  }
  tables->ld = build_ld_table(*net, options.threads);
  tables->sp = ShortestPathIndex(net);
  return tables;
}

RLNodeSet::RLNodeSet(std::vector<NodeId> nodes, NodeId network_size) : nodes_(std::move(nodes)) {
  rank_.assign(static_cast<std::size_t>(network_size), -1);
  for (std::size_t r = 0; r < nodes_.size(); ++r) {
    const NodeId v = nodes_[r];
    if (v < 0 || v >= network_size) throw InvalidParameter("RL node id out of range");
    if (rank_[static_cast<std::size_t>(v)] >= 0) throw InvalidParameter("duplicate RL node");
    rank_[static_cast<std::size_t>(v)] = static_cast<int>(r);
  }
}

RLNodeSet select_rl_nodes(const Network& net, int k) {
  const NodeId n = net.size();
  if (k < 0 || k > n / 10)
    throw InvalidParameter("K must satisfy 0 <= K <= N/10 (K=" + std::to_string(k) + ", N=" + std::to_string(n) + ")");
  std::vector<NodeId> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), NodeId{0});
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return net.bc(a) > net.bc(b); });
  order.resize(static_cast<std::size_t>(k));
  return RLNodeSet(std::move(order), n);
}

int designated_bypass_index(std::span<const NodeId> path, const RLNodeSet& rl) {
  if (rl.empty() || path.size() < 3) return -1;
  int best = -1;
  int best_rank = std::numeric_limits<int>::max();
  for (std::size_t i = 1; i + 1 < path.size(); ++i) {
    const int r = rl.rank_of(path[i]);
    if (r >= 0 && r < best_rank) {
      best_rank = r;
      best = static_cast<int>(i);
    }
  }
  return best;
}

BypassDegeneracy bypass_degeneracy(const RoutingTables& tables, const RLNodeSet& rl, std::size_t per_node, Rng& rng,
                                   std::size_t max_attempts) {
  const Network& net = *tables.network;
  const NodeId n = net.size();
  const auto k = static_cast<std::size_t>(rl.size());
  const auto nb = tables.beta_set.size();
  if (max_attempts == 0) max_attempts = 1000 * std::max<std::size_t>(per_node, 1) * std::max<std::size_t>(k, 1);

  BypassDegeneracy out;
  out.nodes = rl.nodes();
  out.beta_set = tables.beta_set;
  out.mean_bc.assign(k, std::vector<double>(nb, 0.0));
  out.mean_hops.assign(k, std::vector<double>(nb, 0.0));
  out.sample_count.assign(k, 0);
  if (k == 0 || n < 3) return out;

  std::uniform_int_distribution<NodeId> node(0, n - 1);
  std::vector<NodeId> sp, bypass;
  std::size_t complete = 0;
  for (std::size_t attempt = 0; attempt < max_attempts && complete < k; ++attempt) {
    const NodeId s = node(rng);
    NodeId d = node(rng);
    while (d == s) d = node(rng);
    tables.sp.sample_into(s, d, rng, sp);
    const int at = designated_bypass_index(sp, rl);
    if (at < 0) continue;
    const auto r = static_cast<std::size_t>(rl.rank_of(sp[static_cast<std::size_t>(at)]));
    if (out.sample_count[r] >= per_node) continue;
    const NodeId x = sp[static_cast<std::size_t>(at) - 1];
    for (std::size_t b = 0; b < nb; ++b) {
      if (tables.beta_set[b] == 0.0) {
        bypass.assign(sp.begin() + at - 1, sp.end());
      } else {
        tables.bypass[b].chain_into(x, d, bypass);
      }
      double sum = 0.0;
      for (NodeId v : bypass) sum += net.bc(v);
      out.mean_bc[r][b] += sum / static_cast<double>(bypass.size());
      out.mean_hops[r][b] += static_cast<double>(bypass.size() - 1);
    }
    if (++out.sample_count[r] == per_node) ++complete;
  }
  for (std::size_t r = 0; r < k; ++r) {
    const auto c = out.sample_count[r];
    if (c < 10)
      out.warnings.push_back("RL node " + std::to_string(out.nodes[r]) + " intercepted only " + std::to_string(c) +
                             " sampled pairs");
    if (c == 0) continue;
    for (std::size_t b = 0; b < nb; ++b) {
      out.mean_bc[r][b] /= static_cast<double>(c);
      out.mean_hops[r][b] /= static_cast<double>(c);
    }
  }
  return out;
}

void write_next_hop_csv(const NextHopTable& table, std::ostream& out) {
  out << "from,to,next\n";
  for (NodeId x = 0; x < table.size(); ++x)
    for (NodeId d = 0; d < table.size(); ++d)
      if (x != d) out << x << ',' << d << ',' << table.next(x, d) << '\n';
}

}  // namespace hdr
