#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "hdrouting/errors.hpp"
#include "hdrouting/graph.hpp"

namespace hdr {

Network generate_ba(NodeId n, int m, std::uint64_t seed) {
  if (m < 1) throw InvalidParameter("BA attachment count m must be >= 1");
  if (n <= m) throw InvalidParameter("BA requires n > m");
  Rng rng(seed);
  std::vector<Edge> edges;
  // Every edge endpoint appears once here, so a uniform pick is degree-proportional.
  std::vector<NodeId> endpoints;
  edges.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(m));
  endpoints.reserve(2 * edges.capacity());
  for (NodeId u = 0; u <= m; ++u) {
    for (NodeId v = u + 1; v <= m; ++v) {
      edges.emplace_back(u, v);
      endpoints.push_back(u);
      endpoints.push_back(v);
    }
  }
  std::vector<NodeId> targets;
  for (NodeId v = m + 1; v < n; ++v) {
    targets.clear();
    while (static_cast<int>(targets.size()) < m) {
      std::uniform_int_distribution<std::size_t> pick(0, endpoints.size() - 1);
      const NodeId t = endpoints[pick(rng)];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (NodeId t : targets) {
      edges.emplace_back(t, v);
      endpoints.push_back(t);
      endpoints.push_back(v);
    }
  }
  return Network::from_edges(n, edges);
}

std::vector<int> sample_ce_degrees(NodeId n, const DegreeDistributionSpec& spec, Rng& rng) {
  if (n < 2) throw InvalidParameter("CE requires n >= 2");
  if (spec.tiers < 0) throw InvalidParameter("CE tier count J must be >= 0");
  if (!(spec.weight_base > 0.0) || !(spec.rate_base > 0.0) || !std::isfinite(spec.weight_base) ||
      !std::isfinite(spec.rate_base))
    throw InvalidParameter("CE bases a and lambda must be finite and positive");
  std::vector<double> weights, rates;
  for (int j = 0; j <= spec.tiers; ++j) {
    const double w = std::pow(spec.weight_base, -(j + 1));
    const double r = std::pow(spec.rate_base, j + 1);
    if (!std::isfinite(w) || !(w > 0.0) || !std::isfinite(r) || !(r > 0.0))
      throw InvalidParameter("CE weights are not normalizable for the given (a, lambda, J)");
    weights.push_back(w);
    rates.push_back(r);
  }
  std::discrete_distribution<int> tier(weights.begin(), weights.end());
  std::vector<int> degrees(static_cast<std::size_t>(n));
  // The density is restricted to its support k in [1, n-1] by rejection.
  const double top = static_cast<double>(n - 1);
  for (auto& k : degrees) {
    double x = 0.0;
    do {
      const int j = tier(rng);
      x = std::exponential_distribution<double>(rates[static_cast<std::size_t>(j)])(rng);
    } while (x < 1.0 || x > top);
    k = static_cast<int>(std::lround(x));
  }
  const long total = std::accumulate(degrees.begin(), degrees.end(), 0L);
  if (total % 2 != 0) {
    std::uniform_int_distribution<NodeId> pick(0, n - 1);
    ++degrees[static_cast<std::size_t>(pick(rng))];
  }
  return degrees;
}

Network generate_ce(NodeId n, const DegreeDistributionSpec& spec, std::uint64_t seed) {
  if (spec.model != DegreeModel::CE) throw InvalidParameter("generate_ce requires a CE spec");
  Rng rng(seed);
  const auto degrees = sample_ce_degrees(n, spec, rng);
  std::vector<NodeId> stubs;
  for (NodeId v = 0; v < n; ++v) stubs.insert(stubs.end(), static_cast<std::size_t>(degrees[static_cast<std::size_t>(v)]), v);
  std::shuffle(stubs.begin(), stubs.end(), rng);
  std::vector<Edge> edges;
  edges.reserve(stubs.size() / 2);
  for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) edges.emplace_back(stubs[i], stubs[i + 1]);
  return Network::from_edges(n, edges);
}

Network generate_er(NodeId n, double mean_degree, std::uint64_t seed) {
  if (n < 2) throw InvalidParameter("ER requires n >= 2");
  if (!(mean_degree > 0.0)) throw InvalidParameter("ER mean degree must be positive");
  const double p = std::min(1.0, mean_degree / static_cast<double>(n - 1));
  Rng rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (coin(rng)) edges.emplace_back(u, v);
  if (edges.empty()) throw InvalidParameter("ER draw produced no edges; increase mean_degree");
  return Network::from_edges(n, edges);
}

DegreeDistributionSpec ce_preset(int tiers) {
  DegreeDistributionSpec spec;
  spec.model = DegreeModel::CE;
  spec.tiers = tiers;
  switch (tiers) {
    case 0:
      spec.weight_base = 2.0;
      spec.rate_base = 0.2;  // 1 + Exp(mean 5): mean degree ~6
      break;
    case 3:
      spec.weight_base = 100.0;
      spec.rate_base = 0.22;
      break;
    case 7:
      spec.weight_base = 25.0;
      spec.rate_base = 0.24;
      break;
    default:
      spec.weight_base = 100.0;
      spec.rate_base = 0.22;
      break;
  }
  return spec;
}

Network read_edge_list(std::istream& in) {
  std::unordered_map<std::int64_t, NodeId> index;
  std::vector<std::int64_t> original;
  std::vector<Edge> edges;
  auto intern = [&](std::int64_t id) {
    auto [it, inserted] = index.try_emplace(id, static_cast<NodeId>(original.size()));
    if (inserted) original.push_back(id);
    return it->second;
  };
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::int64_t u = 0, v = 0;
    std::string extra;
    if (!(fields >> u >> v)) throw ParseError("expected two integer node ids", line_no);
    if (fields >> extra) throw ParseError("unexpected trailing token '" + extra + "'", line_no);
    const NodeId a = intern(u);
    const NodeId b = intern(v);
    edges.emplace_back(a, b);
  }
  if (edges.empty()) throw ParseError("edge list contains no edges", 0);
  const auto n = static_cast<NodeId>(original.size());
  return Network::from_edges(n, edges, std::move(original));
}

Network load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open edge list '" + path.string() + "'", 0);
  return read_edge_list(in);
}

void write_edge_list(const Network& net, std::ostream& out) {
  const auto ids = net.original_ids();
  for (auto [u, v] : net.edges())
    out << ids[static_cast<std::size_t>(u)] << ' ' << ids[static_cast<std::size_t>(v)] << '\n';
}

}  // namespace hdr
