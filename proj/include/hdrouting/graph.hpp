#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace hdr {

using NodeId = std::int32_t;
using Rng = std::mt19937_64;
using Edge = std::pair<NodeId, NodeId>;

/// Betweenness of every node. `raw` counts ordered (s, d) pairs; `normalized`
/// is raw / [(N-1)(N-2)], i.e. the unordered count scaled by 2/[(N-1)(N-2)].
struct Betweenness {
  std::vector<double> raw;
  std::vector<double> normalized;
};

/// Immutable, connected, undirected simple graph with cached degree and
/// betweenness. Node ids are dense 0..N-1; `original_ids()` maps them back to
/// whatever ids the source used (identity for generated graphs).
class Network {
 public:
  /// Validates symmetry, simplicity and connectivity. Adjacency lists are
  /// sorted in place. Throws InvalidParameter on any violation.
  explicit Network(std::vector<std::vector<NodeId>> adjacency,
                   std::vector<std::int64_t> original_ids = {});

  /// Builds from an arbitrary edge list on nodes 0..n-1: drops self-loops and
  /// duplicates, then keeps the largest connected component (ties: the one
  /// containing the smallest id) and relabels densely in ascending id order.
  static Network from_edges(NodeId n, std::span<const Edge> edges,
                            std::vector<std::int64_t> original_ids = {});

  NodeId size() const noexcept { return static_cast<NodeId>(adjacency_.size()); }
  std::size_t edge_count() const noexcept { return edge_count_; }
  std::span<const NodeId> neighbors(NodeId v) const { return adjacency_[static_cast<std::size_t>(v)]; }
  int degree(NodeId v) const { return static_cast<int>(adjacency_[static_cast<std::size_t>(v)].size()); }
  bool has_edge(NodeId u, NodeId v) const;

  double bc(NodeId v) const { return betweenness_.normalized[static_cast<std::size_t>(v)]; }
  const std::vector<double>& bc() const noexcept { return betweenness_.normalized; }
  const std::vector<double>& raw_bc() const noexcept { return betweenness_.raw; }
  std::span<const std::int64_t> original_ids() const noexcept { return original_ids_; }

  /// Edges with u < v, sorted.
  std::vector<Edge> edges() const;
  std::vector<int> degrees() const;

 private:
  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<std::int64_t> original_ids_;
  std::size_t edge_count_ = 0;
  Betweenness betweenness_;
};

enum class DegreeModel { BA, CE, ER };

/// Parameters of a synthetic degree distribution. For CE-J the density is
/// phi(k) ~ sum_{j=0..J} a^-(j+1) * lambda^(j+1) * exp(-lambda^(j+1) k), i.e. a
/// mixture of exponentials with rates lambda^(j+1) and weights a^-(j+1).
struct DegreeDistributionSpec {
  DegreeModel model = DegreeModel::BA;
  int m = 3;
  int tiers = 3;  // J
  double weight_base = 2.0;  // a
  double rate_base = 0.5;    // lambda
  double mean_degree = 6.0;
};

/// Calibrated (a, lambda) for CE-J at N = 1000; see scripts/calibrate_ce.py.
DegreeDistributionSpec ce_preset(int tiers);

struct DegreeStats {
  double mean_degree = 0.0;
  double mean_sp_length = 0.0;
  double rsd = 0.0;
  double heterogeneity = 0.0;  // <k^2>/<k>^2
};

/// Barabasi-Albert growth from a complete graph on m+1 nodes.
Network generate_ba(NodeId n, int m, std::uint64_t seed);
/// Configuration model on a CE-J degree sequence, cleaned and reduced to the LCC.
Network generate_ce(NodeId n, const DegreeDistributionSpec& spec, std::uint64_t seed);
/// G(n, p) with p = mean_degree / (n - 1), reduced to the LCC.
Network generate_er(NodeId n, double mean_degree, std::uint64_t seed);

/// Whitespace-separated integer pairs, '#' comments. Arbitrary ids are
/// remapped densely; the LCC is kept.
Network load_edge_list(const std::filesystem::path& path);
Network read_edge_list(std::istream& in);
void write_edge_list(const Network& net, std::ostream& out);

/// Degree sequence sampled from the CE density, rounded to max(1, round(k)),
/// sum forced even. Exposed for calibration and tests.
std::vector<int> sample_ce_degrees(NodeId n, const DegreeDistributionSpec& spec, Rng& rng);

/// Brandes accumulation over all sources.
Betweenness betweenness(const std::vector<std::vector<NodeId>>& adjacency);

DegreeStats degree_stats(const Network& net);
DegreeStats degree_stats(std::span<const int> degrees, double mean_sp_length);

/// BFS hop distances from `source`; -1 for unreachable nodes.
std::vector<int> bfs_distances(const Network& net, NodeId source);

}  // namespace hdr
