#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hdrouting/graph.hpp"

namespace hdr {

/// {0, 0.2, 0.4, 0.6, 0.8, 1.0, 2.0}
const std::vector<double>& default_beta_set();

/// Destination-rooted next-hop matrix. `next(x, d)` is the neighbor of x on
/// the chosen x -> d path, or -1 when x == d.
class NextHopTable {
 public:
  NextHopTable() = default;
  NextHopTable(NodeId n, std::vector<NodeId> next_by_destination);

  NodeId size() const noexcept { return n_; }
  NodeId next(NodeId from, NodeId to) const {
    return next_[static_cast<std::size_t>(to) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(from)];
  }
  /// Node sequence from..to inclusive. Throws InvariantViolation if the chain
  /// does not reach `to` within N-1 hops.
  std::vector<NodeId> chain(NodeId from, NodeId to) const;
  void chain_into(NodeId from, NodeId to, std::vector<NodeId>& out) const;

 private:
  NodeId n_ = 0;
  std::vector<NodeId> next_;
};

enum class BypassWeight { Betweenness, Degree };

/// w(v) = b(v)^beta, or k(v)^beta for the degree variant. 0^0 is 1.
std::vector<double> bypass_weights(const Network& net, double beta, BypassWeight source = BypassWeight::Betweenness);

/// For every destination, a node-weighted shortest-path tree where entering v
/// costs w(v). Ties: fewer hops, then smaller next-hop id.
NextHopTable build_weighted_table(const Network& net, std::span<const double> node_weight, int threads = 1);

/// Least-degree routing: w(v) = k(v).
NextHopTable build_ld_table(const Network& net, int threads = 1);

/// All-pairs hop distances and shortest-path counts, for uniform SP sampling.
class ShortestPathIndex {
 public:
  ShortestPathIndex() = default;
  explicit ShortestPathIndex(std::shared_ptr<const Network> net);

  int distance(NodeId s, NodeId d) const { return dist_[index(d, s)]; }
  double path_count(NodeId s, NodeId d) const { return sigma_[index(d, s)]; }

  /// A shortest s -> d path drawn uniformly among all shortest paths.
  std::vector<NodeId> sample(NodeId s, NodeId d, Rng& rng) const;
  void sample_into(NodeId s, NodeId d, Rng& rng, std::vector<NodeId>& out) const;

 private:
  std::size_t index(NodeId row, NodeId col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(col);
  }

  std::shared_ptr<const Network> net_;
  NodeId n_ = 0;
  std::vector<std::uint16_t> dist_;
  std::vector<double> sigma_;
};

struct RoutingOptions {
  std::vector<double> beta_set = default_beta_set();
  BypassWeight weight = BypassWeight::Betweenness;
  int threads = 1;
};

/// Everything the simulator reads: one bypass table per beta, the static LD
/// table and the SP sampling index. Immutable once built.
struct RoutingTables {
  std::shared_ptr<const Network> network;
  std::vector<double> beta_set;
  std::vector<NextHopTable> bypass;
  NextHopTable ld;
  ShortestPathIndex sp;
};

std::shared_ptr<const RoutingTables> build_routing_tables(std::shared_ptr<const Network> net,
                                                          const RoutingOptions& options = {});

/// The K highest-BC nodes, ordered by (BC desc, id asc). K = 0 means no agents.
class RLNodeSet {
 public:
  RLNodeSet() = default;
  RLNodeSet(std::vector<NodeId> nodes, NodeId network_size);

  int size() const noexcept { return static_cast<int>(nodes_.size()); }
  bool empty() const noexcept { return nodes_.empty(); }
  const std::vector<NodeId>& nodes() const noexcept { return nodes_; }
  NodeId node(int rank) const { return nodes_[static_cast<std::size_t>(rank)]; }
  /// Rank of v in the set (0 = highest BC) or -1.
  int rank_of(NodeId v) const { return rank_.empty() ? -1 : rank_[static_cast<std::size_t>(v)]; }

 private:
  std::vector<NodeId> nodes_;
  std::vector<int> rank_;
};

/// Throws InvalidParameter unless 0 <= K <= N/10.
RLNodeSet select_rl_nodes(const Network& net, int k);

/// Position in `path` of the RL node a packet will bypass: the highest-BC RL
/// node strictly between source and destination. -1 if there is none.
int designated_bypass_index(std::span<const NodeId> path, const RLNodeSet& rl);

struct BypassDegeneracy {
  std::vector<NodeId> nodes;
  std::vector<double> beta_set;
  /// mean_bc[k][b]: average over sampled pairs of the mean normalized BC of the
  /// nodes on the beta-bypass from the decision point to the destination.
  std::vector<std::vector<double>> mean_bc;
  std::vector<std::vector<double>> mean_hops;
  std::vector<std::size_t> sample_count;
  std::vector<std::string> warnings;
};

/// Samples random (s, d) pairs until every RL node has intercepted `per_node`
/// pairs or `max_attempts` pairs were drawn. Nodes with fewer than 10 samples
/// get a warning.
BypassDegeneracy bypass_degeneracy(const RoutingTables& tables, const RLNodeSet& rl, std::size_t per_node,
                                   Rng& rng, std::size_t max_attempts = 0);

/// CSV dump `from,to,next` for every ordered pair with from != to.
void write_next_hop_csv(const NextHopTable& table, std::ostream& out);

}  // namespace hdr
