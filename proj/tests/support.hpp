#pragma once

// Brute-force reference computations shared by the unit and acceptance tests.
// They enumerate paths explicitly and share no code with the library.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <queue>
#include <random>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "hdrouting/graph.hpp"

namespace hdr::testing {

using Adjacency = std::vector<std::vector<NodeId>>;

inline Adjacency adjacency_from_edges(NodeId n, const std::vector<Edge>& edges) {
  Adjacency adj(static_cast<std::size_t>(n));
  for (auto [u, v] : edges) {
    adj[static_cast<std::size_t>(u)].push_back(v);
    adj[static_cast<std::size_t>(v)].push_back(u);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return adj;
}

inline Network network_from_edges(NodeId n, const std::vector<Edge>& edges) {
  return Network(adjacency_from_edges(n, edges));
}

/// Random connected simple graph: a random labelled tree plus extra random edges.
inline Network random_connected_graph(NodeId n, int extra_edges, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::set<Edge> edges;
  for (NodeId v = 1; v < n; ++v) {
    const NodeId u = std::uniform_int_distribution<NodeId>(0, v - 1)(rng);
    edges.insert({u, v});
  }
  std::uniform_int_distribution<NodeId> pick(0, n - 1);
  for (int tries = 0, added = 0; added < extra_edges && tries < 100 * (extra_edges + 1); ++tries) {
    NodeId u = pick(rng), v = pick(rng);
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    if (edges.insert({u, v}).second) ++added;
  }
  return network_from_edges(n, std::vector<Edge>(edges.begin(), edges.end()));
}

inline std::vector<int> bfs(const Adjacency& adj, NodeId s) {
  std::vector<int> dist(adj.size(), -1);
  std::queue<NodeId> q;
  dist[static_cast<std::size_t>(s)] = 0;
  q.push(s);
  while (!q.empty()) {
    const NodeId u = q.front();
    q.pop();
    for (NodeId v : adj[static_cast<std::size_t>(u)])
      if (dist[static_cast<std::size_t>(v)] < 0) {
        dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
        q.push(v);
      }
  }
  return dist;
}

/// Every shortest s -> d path, listed explicitly.
inline std::vector<std::vector<NodeId>> all_shortest_paths(const Adjacency& adj, NodeId s, NodeId d) {
  const auto to_d = bfs(adj, d);
  std::vector<std::vector<NodeId>> out;
  std::vector<NodeId> path{s};
  auto extend = [&](auto&& self, NodeId u) -> void {
    if (u == d) {
      out.push_back(path);
      return;
    }
    for (NodeId v : adj[static_cast<std::size_t>(u)])
      if (to_d[static_cast<std::size_t>(v)] == to_d[static_cast<std::size_t>(u)] - 1) {
        path.push_back(v);
        self(self, v);
        path.pop_back();
      }
  };
  extend(extend, s);
  return out;
}

/// Raw betweenness over ordered pairs by explicit path enumeration.
inline std::vector<double> enumerated_betweenness(const Adjacency& adj) {
  const auto n = static_cast<NodeId>(adj.size());
  std::vector<double> bc(adj.size(), 0.0);
  for (NodeId s = 0; s < n; ++s)
    for (NodeId d = 0; d < n; ++d) {
      if (s == d) continue;
      const auto paths = all_shortest_paths(adj, s, d);
      for (const auto& p : paths)
        for (std::size_t i = 1; i + 1 < p.size(); ++i) bc[static_cast<std::size_t>(p[i])] += 1.0 / paths.size();
    }
  return bc;
}

/// Minimum over all simple s -> d paths of the sum of w(v) for every node after s.
inline double brute_force_min_cost(const Adjacency& adj, std::span<const double> w, NodeId s, NodeId d) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<char> on_path(adj.size(), 0);
  auto dfs = [&](auto&& self, NodeId u, double cost) -> void {
    if (u == d) {
      best = std::min(best, cost);
      return;
    }
    on_path[static_cast<std::size_t>(u)] = 1;
    for (NodeId v : adj[static_cast<std::size_t>(u)])
      if (!on_path[static_cast<std::size_t>(v)]) self(self, v, cost + w[static_cast<std::size_t>(v)]);
    on_path[static_cast<std::size_t>(u)] = 0;
  };
  dfs(dfs, s, 0.0);
  return best;
}

inline double path_cost(std::span<const NodeId> path, std::span<const double> w) {
  double c = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) c += w[static_cast<std::size_t>(path[i])];
  return c;
}

inline Adjacency adjacency_of(const Network& net) {
  Adjacency adj(static_cast<std::size_t>(net.size()));
  for (NodeId v = 0; v < net.size(); ++v) {
    const auto nb = net.neighbors(v);
    adj[static_cast<std::size_t>(v)].assign(nb.begin(), nb.end());
  }
  return adj;
}

}  // namespace hdr::testing
