#include "hdrouting/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <ostream>
#include <queue>

#include "hdrouting/errors.hpp"

namespace hdr {

namespace {

bool is_connected(const std::vector<std::vector<NodeId>>& adj) {
  if (adj.empty()) return false;
  std::vector<char> seen(adj.size(), 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    for (NodeId v : adj[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++reached;
        stack.push_back(v);
      }
    }
  }
  return reached == adj.size();
}

}  // namespace

Network::Network(std::vector<std::vector<NodeId>> adjacency, std::vector<std::int64_t> original_ids)
    : adjacency_(std::move(adjacency)), original_ids_(std::move(original_ids)) {
  const auto n = adjacency_.size();
  if (n == 0) throw InvalidParameter("network must have at least one node");
  if (original_ids_.empty()) {
    original_ids_.resize(n);
    std::iota(original_ids_.begin(), original_ids_.end(), std::int64_t{0});
  } else if (original_ids_.size() != n) {
    throw InvalidParameter("original id map size does not match node count");
  }
  std::size_t endpoint_count = 0;
  for (std::size_t u = 0; u < n; ++u) {
    auto& list = adjacency_[u];
    std::sort(list.begin(), list.end());
    if (std::adjacent_find(list.begin(), list.end()) != list.end())
      throw InvalidParameter("duplicate edge at node " + std::to_string(u));
    for (NodeId v : list) {
      if (v < 0 || static_cast<std::size_t>(v) >= n)
        throw InvalidParameter("neighbor id out of range at node " + std::to_string(u));
      if (static_cast<std::size_t>(v) == u) throw InvalidParameter("self-loop at node " + std::to_string(u));
    }
    endpoint_count += list.size();
  }
  for (std::size_t u = 0; u < n; ++u) {
    for (NodeId v : adjacency_[u]) {
      const auto& back = adjacency_[static_cast<std::size_t>(v)];
      if (!std::binary_search(back.begin(), back.end(), static_cast<NodeId>(u)))
        throw InvalidParameter("adjacency is not symmetric");
    }
  }
  if (!is_connected(adjacency_)) throw InvalidParameter("network is not connected");
  edge_count_ = endpoint_count / 2;
  betweenness_ = hdr::betweenness(adjacency_);
}

Network Network::from_edges(NodeId n, std::span<const Edge> edges, std::vector<std::int64_t> original_ids) {
  if (n <= 0) throw InvalidParameter("empty graph");
  if (!original_ids.empty() && original_ids.size() != static_cast<std::size_t>(n))
    throw InvalidParameter("original id map size does not match node count");
  std::vector<std::vector<NodeId>> adj(static_cast<std::size_t>(n));
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) throw InvalidParameter("edge endpoint out of range");
    if (u == v) continue;
    adj[static_cast<std::size_t>(u)].push_back(v);
    adj[static_cast<std::size_t>(v)].push_back(u);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }

  // Largest connected component; on equal sizes the first found (smallest id) wins.
  std::vector<int> component(static_cast<std::size_t>(n), -1);
  int best = -1;
  std::size_t best_size = 0;
  int label = 0;
  for (NodeId root = 0; root < n; ++root) {
    if (component[static_cast<std::size_t>(root)] >= 0) continue;
    std::size_t size = 0;
    std::vector<NodeId> stack{root};
    component[static_cast<std::size_t>(root)] = label;
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      ++size;
      for (NodeId v : adj[static_cast<std::size_t>(u)]) {
        if (component[static_cast<std::size_t>(v)] < 0) {
          component[static_cast<std::size_t>(v)] = label;
          stack.push_back(v);
        }
      }
    }
    if (size > best_size) {
      best_size = size;
      best = label;
    }
    ++label;
  }

  std::vector<NodeId> relabel(static_cast<std::size_t>(n), -1);
  std::vector<std::int64_t> kept_ids;
  NodeId next = 0;
  for (NodeId v = 0; v < n; ++v) {
    if (component[static_cast<std::size_t>(v)] != best) continue;
    relabel[static_cast<std::size_t>(v)] = next++;
    kept_ids.push_back(original_ids.empty() ? v : original_ids[static_cast<std::size_t>(v)]);
  }
  std::vector<std::vector<NodeId>> reduced(static_cast<std::size_t>(next));
  for (NodeId v = 0; v < n; ++v) {
    const NodeId nv = relabel[static_cast<std::size_t>(v)];
    if (nv < 0) continue;
    auto& out = reduced[static_cast<std::size_t>(nv)];
    for (NodeId w : adj[static_cast<std::size_t>(v)]) out.push_back(relabel[static_cast<std::size_t>(w)]);
  }
  return Network(std::move(reduced), std::move(kept_ids));
}

bool Network::has_edge(NodeId u, NodeId v) const {
  const auto& list = adjacency_[static_cast<std::size_t>(u)];
  return std::binary_search(list.begin(), list.end(), v);
}

std::vector<Edge> Network::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (NodeId u = 0; u < size(); ++u)
    for (NodeId v : neighbors(u))
      if (u < v) out.emplace_back(u, v);
  return out;
}

std::vector<int> Network::degrees() const {
  std::vector<int> out(adjacency_.size());
  for (std::size_t v = 0; v < adjacency_.size(); ++v) out[v] = static_cast<int>(adjacency_[v].size());
  return out;
}

Betweenness betweenness(const std::vector<std::vector<NodeId>>& adj) {
  const std::size_t n = adj.size();
  Betweenness result;
  result.raw.assign(n, 0.0);
  result.normalized.assign(n, 0.0);

  std::vector<double> sigma(n), delta(n);
  std::vector<int> dist(n);
  std::vector<NodeId> order;
  order.reserve(n);
  std::vector<NodeId> queue(n);

  for (std::size_t s = 0; s < n; ++s) {
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    order.clear();
    sigma[s] = 1.0;
    dist[s] = 0;
    std::size_t head = 0, tail = 0;
    queue[tail++] = static_cast<NodeId>(s);
    while (head < tail) {
      const NodeId u = queue[head++];
      order.push_back(u);
      for (NodeId v : adj[static_cast<std::size_t>(u)]) {
        auto vi = static_cast<std::size_t>(v);
        if (dist[vi] < 0) {
          dist[vi] = dist[static_cast<std::size_t>(u)] + 1;
          queue[tail++] = v;
        }
        if (dist[vi] == dist[static_cast<std::size_t>(u)] + 1) sigma[vi] += sigma[static_cast<std::size_t>(u)];
      }
    }
    // Dependencies in reverse BFS order; predecessors are the neighbors one hop closer.
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto w = static_cast<std::size_t>(*it);
      for (NodeId v : adj[w]) {
        const auto vi = static_cast<std::size_t>(v);
        if (dist[vi] == dist[w] - 1) delta[vi] += sigma[vi] / sigma[w] * (1.0 + delta[w]);
      }
      if (w != s) result.raw[w] += delta[w];
    }
  }
  if (n > 2) {
    const double scale = 1.0 / (static_cast<double>(n - 1) * static_cast<double>(n - 2));
    for (std::size_t v = 0; v < n; ++v) result.normalized[v] = result.raw[v] * scale;
  }
  return result;
}

std::vector<int> bfs_distances(const Network& net, NodeId source) {
  std::vector<int> dist(static_cast<std::size_t>(net.size()), -1);
  std::vector<NodeId> queue;
  queue.reserve(dist.size());
  dist[static_cast<std::size_t>(source)] = 0;
  queue.push_back(source);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId u = queue[head];
    for (NodeId v : net.neighbors(u)) {
      if (dist[static_cast<std::size_t>(v)] < 0) {
        dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

DegreeStats degree_stats(std::span<const int> degrees, double mean_sp_length) {
  DegreeStats stats;
  if (degrees.empty()) return stats;
  double sum = 0.0, sum_sq = 0.0;
  for (int k : degrees) {
    sum += k;
    sum_sq += static_cast<double>(k) * k;
  }
  const double n = static_cast<double>(degrees.size());
  const double mean = sum / n;
  const double second = sum_sq / n;
  stats.mean_degree = mean;
  stats.mean_sp_length = mean_sp_length;
  if (mean > 0.0) {
    stats.heterogeneity = second / (mean * mean);
    stats.rsd = std::sqrt(std::max(0.0, second - mean * mean)) / mean;
  }
  return stats;
}

DegreeStats degree_stats(const Network& net) {
  const NodeId n = net.size();
  double total = 0.0;
  for (NodeId s = 0; s < n; ++s) {
    for (int d : bfs_distances(net, s)) total += d;
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1);
  const auto degrees = net.degrees();
  return degree_stats(degrees, pairs > 0 ? total / pairs : 0.0);
}

}  // namespace hdr
