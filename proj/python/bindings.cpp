#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "hdrouting/agent.hpp"
#include "hdrouting/config.hpp"
#include "hdrouting/errors.hpp"
#include "hdrouting/experiment.hpp"
#include "hdrouting/graph.hpp"
#include "hdrouting/routing.hpp"
#include "hdrouting/traffic.hpp"

namespace py = pybind11;
using namespace hdr;

namespace {

// pybind11 holders must be non-const; the objects are never mutated.
using NetworkPtr = std::shared_ptr<Network>;
using TablesPtr = std::shared_ptr<RoutingTables>;

NetworkPtr share(Network net) { return std::make_shared<Network>(std::move(net)); }

py::dict stats_dict(const DegreeStats& s) {
  py::dict d;
  d["mean_degree"] = s.mean_degree;
  d["mean_sp_length"] = s.mean_sp_length;
  d["rsd"] = s.rsd;
  d["heterogeneity"] = s.heterogeneity;
  return d;
}

py::dict counters_dict(const TrafficCounters& c) {
  py::dict d;
  d["generated"] = c.generated;
  d["delivered"] = c.delivered;
  d["dropped_overflow"] = c.dropped_overflow;
  d["dropped_missing_link"] = c.dropped_missing_link;
  d["in_transit"] = c.in_transit;
  d["bypass_decisions"] = c.bypass_decisions;
  d["route_revisits"] = c.route_revisits;
  d["mean_travel_time"] = c.delivered ? c.mean_travel_time() : 0.0;
  return d;
}

ScenarioConfig make_config(const std::optional<std::string>& path, const std::map<std::string, std::string>& overrides) {
  ScenarioConfig c = path ? load_config(*path) : ScenarioConfig{};
  for (const auto& [key, value] : overrides) set_config_value(c, key, value);
  validate(c);
  return c;
}

py::object optional_value(const std::optional<double>& v) { return v ? py::cast(*v) : py::none(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Packet-level traffic simulator with hub-bypass routing agents";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<InvalidParameter>(m, "InvalidParameter", base.ptr());
  py::register_exception<InsufficientData>(m, "InsufficientData", base.ptr());
  py::register_exception<InvariantViolation>(m, "InvariantViolation", base.ptr());

  // Graph ------------------------------------------------------------------
  py::class_<Network, NetworkPtr>(m, "Network")
      .def_static(
          "from_edges",
          [](NodeId n, const std::vector<Edge>& edges) { return share(Network::from_edges(n, edges)); },
          py::arg("n"), py::arg("edges"), "Largest connected component of the given edge list, relabeled densely.")
      .def_property_readonly("size", &Network::size)
      .def_property_readonly("edge_count", &Network::edge_count)
      .def("edges", &Network::edges)
      .def("degrees", &Network::degrees)
      .def("neighbors", [](const Network& n, NodeId v) {
        const auto s = n.neighbors(v);
        return std::vector<NodeId>(s.begin(), s.end());
      })
      .def("has_edge", &Network::has_edge)
      .def("bc", py::overload_cast<>(&Network::bc, py::const_), "Normalized betweenness of every node.")
      .def("raw_bc", &Network::raw_bc, "Betweenness counted over ordered pairs.")
      .def("stats", [](const Network& n) { return stats_dict(degree_stats(n)); })
      .def("__len__", &Network::size);

  m.def("generate_ba", [](NodeId n, int mm, std::uint64_t seed) { return share(generate_ba(n, mm, seed)); },
        py::arg("n"), py::arg("m") = 3, py::arg("seed") = 1);
  m.def(
      "generate_ce",
      [](NodeId n, int tiers, double a, double lambda, std::uint64_t seed) {
        auto spec = ce_preset(tiers);
        if (a > 0) spec.weight_base = a;
        if (lambda > 0) spec.rate_base = lambda;
        return share(generate_ce(n, spec, seed));
      },
      py::arg("n"), py::arg("tiers") = 3, py::arg("a") = 0.0, py::arg("lam") = 0.0, py::arg("seed") = 1,
      "Configuration-model network; a and lam of 0 select the calibrated preset.");
  m.def("generate_er", [](NodeId n, double k, std::uint64_t seed) { return share(generate_er(n, k, seed)); },
        py::arg("n"), py::arg("mean_degree") = 6.0, py::arg("seed") = 1);
  m.def("load_edge_list", [](const std::string& path) { return share(load_edge_list(path)); });
  m.def("write_edge_list", [](const Network& net) {
    std::ostringstream out;
    write_edge_list(net, out);
    return out.str();
  });
  m.def("betweenness", [](const std::vector<std::vector<NodeId>>& adj) {
    const auto b = betweenness(adj);
    return py::make_tuple(b.raw, b.normalized);
  }, "Returns (raw, normalized) betweenness for an adjacency list.");

  // Routing ----------------------------------------------------------------
  m.def("default_beta_set", &default_beta_set);
  m.def("bypass_weights", [](const Network& n, double beta) { return bypass_weights(n, beta); });

  py::class_<RoutingTables, TablesPtr>(m, "RoutingTables")
      .def_property_readonly("network", [](const RoutingTables& t) { return std::const_pointer_cast<Network>(t.network); })
      .def_property_readonly("beta_set", [](const RoutingTables& t) { return t.beta_set; })
      .def("chain", [](const RoutingTables& t, int beta_index, NodeId s, NodeId d) {
        return t.bypass.at(static_cast<std::size_t>(beta_index)).chain(s, d);
      }, py::arg("beta_index"), py::arg("source"), py::arg("destination"))
      .def("ld_chain", [](const RoutingTables& t, NodeId s, NodeId d) { return t.ld.chain(s, d); })
      .def("sp_distance", [](const RoutingTables& t, NodeId s, NodeId d) { return t.sp.distance(s, d); })
      .def("sp_path_count", [](const RoutingTables& t, NodeId s, NodeId d) { return t.sp.path_count(s, d); })
      .def("next_hop_csv", [](const RoutingTables& t, int beta_index) {
        std::ostringstream out;
        write_next_hop_csv(t.bypass.at(static_cast<std::size_t>(beta_index)), out);
        return out.str();
      });

  m.def(
      "build_routing_tables",
      [](NetworkPtr net, std::optional<std::vector<double>> betas, int threads) {
        RoutingOptions o;
        if (betas) o.beta_set = *betas;
        o.threads = threads;
        py::gil_scoped_release release;
        return std::const_pointer_cast<RoutingTables>(build_routing_tables(std::move(net), o));
      },
      py::arg("network"), py::arg("betas") = py::none(), py::arg("threads") = 1);
  m.def("select_rl_nodes", [](const Network& n, int k) { return select_rl_nodes(n, k).nodes(); });

  // Traffic ----------------------------------------------------------------
  py::class_<Simulator>(m, "Simulator")
      .def(py::init([](TablesPtr tables, const std::string& strategy, double rate, int k, std::uint64_t seed,
                       int buffer, int mi_len) {
             SimConfig c;
             c.strategy = parse_strategy(strategy);
             c.rate = rate;
             c.seed = seed;
             c.buffer = buffer;
             c.mi_len = mi_len;
             auto rl = select_rl_nodes(*tables->network, k);
             return Simulator(std::move(tables), std::move(rl), c);
           }),
           py::arg("tables"), py::arg("strategy") = "SP", py::arg("rate") = 1.0, py::arg("k") = 0,
           py::arg("seed") = 1, py::arg("buffer") = 40, py::arg("mi_len") = 10)
      .def("run", &Simulator::run, py::arg("steps"), py::call_guard<py::gil_scoped_release>())
      .def("step", [](Simulator& s) { return s.step().w; })
      .def("run_mi", [](Simulator& s) {
        std::vector<double> rewards;
        for (const auto& a : s.run_mi()) rewards.push_back(a.reward());
        return rewards;
      }, "Runs one monitor interval and returns the reward of every agent.")
      .def("reset", &Simulator::reset)
      .def("set_action", &Simulator::set_action)
      .def("set_rate", &Simulator::set_rate)
      .def("inject", &Simulator::inject)
      .def("queue_length", &Simulator::queue_length)
      .def("remove_links", [](Simulator& s, double fraction, const std::string& mode, std::uint64_t seed) {
        Rng rng(seed);
        return s.remove_links(fraction, parse_removal_mode(mode), rng);
      }, py::arg("fraction"), py::arg("mode") = "random", py::arg("seed") = 1)
      .def("check_invariants", &Simulator::check_invariants)
      .def_property_readonly("time", &Simulator::time)
      .def_property_readonly("rl_nodes", [](const Simulator& s) { return s.rl_nodes().nodes(); })
      .def_property_readonly("w_series", [](const Simulator& s) { return s.w_series(); })
      .def_property_readonly("counters", [](const Simulator& s) { return counters_dict(s.counters()); });

  m.def("order_parameter", [](const std::vector<std::int64_t>& w, double rate, int warmup, int window) {
    return order_parameter(w, rate, warmup, window);
  }, py::arg("w_series"), py::arg("rate"), py::arg("warmup") = 500, py::arg("window") = 1500);
  m.def("estimate_rc", [](const std::vector<std::pair<double, double>>& sweep, double threshold, int max_points) {
    std::vector<RatePoint> points;
    for (const auto& [r, e] : sweep) points.push_back({r, e});
    return estimate_rc(points, {threshold, max_points});
  }, py::arg("sweep"), py::arg("threshold") = 0.02, py::arg("max_points") = 0,
        "R_c from (rate, eta) pairs.");
  m.def("capacity_bound", &capacity_bound);

  // Experiments ------------------------------------------------------------
  py::class_<ScenarioConfig>(m, "Config")
      .def(py::init([](std::optional<std::string> path, std::map<std::string, std::string> overrides) {
             return make_config(path, overrides);
           }),
           py::arg("path") = py::none(), py::arg("overrides") = std::map<std::string, std::string>{})
      .def_static("parse", [](const std::string& text) {
        std::istringstream in(text);
        return parse_config(in);
      })
      .def("__getitem__", [](const ScenarioConfig& c, const std::string& k) { return get_config_value(c, k); })
      .def("__setitem__", [](ScenarioConfig& c, const std::string& k, const std::string& v) {
        set_config_value(c, k, v);
      })
      .def("validate", [](const ScenarioConfig& c) { validate(c); })
      .def("canonical", [](const ScenarioConfig& c) { return canonical_config(c); })
      .def("hash", [](const ScenarioConfig& c) { return config_hash(c); })
      .def_static("keys", &config_keys);

  m.def("run_capacity_sweep", [](const ScenarioConfig& c) {
    SweepResult r;
    {
      py::gil_scoped_release release;
      r = run_capacity_sweep(c);
    }
    py::list sweep, capacity;
    for (const auto& row : r.rows)
      sweep.append(py::dict(py::arg("strategy") = to_string(row.strategy), py::arg("k") = row.k,
                            py::arg("r_over_n") = row.r_over_n, py::arg("seed") = row.seed, py::arg("eta") = row.eta));
    for (const auto& row : r.capacity)
      capacity.append(py::dict(py::arg("strategy") = to_string(row.strategy), py::arg("k") = row.k,
                               py::arg("seed") = row.seed, py::arg("rc") = optional_value(row.rc),
                               py::arg("delta_rc") = optional_value(row.delta_rc),
                               py::arg("capacity_bound") = row.capacity_bound));
    return py::make_tuple(sweep, capacity);
  }, "Returns (sweep rows, capacity rows) as lists of dicts.");

  m.def("run_action_census", [](const ScenarioConfig& c) {
    CensusResult r;
    {
      py::gil_scoped_release release;
      r = run_action_census(c);
    }
    py::list rows;
    for (const auto& row : r.rows)
      rows.append(py::dict(py::arg("seed") = row.seed, py::arg("k") = row.k, py::arg("rank") = row.rank,
                           py::arg("node") = row.node, py::arg("r_over_n") = row.r_over_n, py::arg("freq") = row.freq));
    return py::make_tuple(r.beta_set, rows);
  }, "Returns (beta grid, rows).");

  m.def("run_resilience", [](const ScenarioConfig& c) {
    ResilienceResult r;
    {
      py::gil_scoped_release release;
      r = run_resilience(c);
    }
    py::list series;
    for (const auto& s : r.series)
      series.append(py::dict(py::arg("mode") = s.mode, py::arg("seed") = s.seed, py::arg("reward") = s.reward,
                             py::arg("reward_ma3") = s.reward_ma3, py::arg("pre_freq") = s.pre_freq,
                             py::arg("post_freq") = s.post_freq, py::arg("removed") = s.removed));
    return py::make_tuple(r.beta_set, series);
  }, "Returns (beta grid, per-mode and per-seed series).");

  m.def("run_distribution_report", [](const ScenarioConfig& c) {
    ReportResult r;
    {
      py::gil_scoped_release release;
      r = run_distribution_report(c);
    }
    py::list entries;
    for (const auto& e : r.entries)
      entries.append(py::dict(py::arg("label") = e.label, py::arg("r_over_n") = e.r_over_n,
                              py::arg("mean_travel_time") = e.mean_travel_time(),
                              py::arg("travel_hist") = e.travel_hist, py::arg("loss_by_bin") = e.loss_by_bin,
                              py::arg("generated") = e.generated, py::arg("delivered") = e.delivered,
                              py::arg("dropped") = e.dropped));
    return py::make_tuple(r.bin_edges, entries);
  }, "Returns (normalized BC bin edges, entries).");

  m.def("run_training", [](const ScenarioConfig& c) {
    RunOutcome r;
    {
      py::gil_scoped_release release;
      r = run_training(c);
    }
    py::list episodes;
    for (const auto& e : r.log.episodes)
      episodes.append(py::dict(py::arg("episode") = e.episode, py::arg("epsilon") = e.epsilon,
                               py::arg("mean_reward") = e.mean_reward, py::arg("delivered") = e.delivered,
                               py::arg("dropped") = e.dropped, py::arg("mean_travel_time") = e.mean_travel_time));
    return py::dict(py::arg("eta") = r.eta, py::arg("rate") = r.rate, py::arg("agents") = r.rl.nodes(),
                    py::arg("counters") = counters_dict(r.counters), py::arg("episodes") = episodes);
  }, "Trains at the first seed, K and rate, then measures; returns a summary dict.");

  m.def("js_divergence", [](const std::vector<double>& p, const std::vector<double>& q) { return js_divergence(p, q); });
}
