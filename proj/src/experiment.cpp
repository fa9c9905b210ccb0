#include "hdrouting/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <thread>

#include "hdrouting/errors.hpp"
#include "hdrouting/random.hpp"
#include "parallel.hpp"

namespace hdr {

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

int worker_count(const ScenarioConfig& config) {
  if (config.threads > 0) return config.threads;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void write_file(const ScenarioConfig& config, const std::string& name,
                const std::function<void(std::ostream&)>& writer) {
  if (config.out_dir.empty()) return;
  std::filesystem::create_directories(config.out_dir);
  const auto path = std::filesystem::path(config.out_dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  writer(out);
  if (!out) throw Error("write failed for " + path.string());
}

std::string strategy_label(Strategy s, int k) {
  return s == Strategy::HD ? "HD-K" + std::to_string(k) : to_string(s);
}

std::vector<double> distribution_over(const TrainingLog& log, int rank, int first, int last) {
  std::vector<double> freq(log.beta_set.size(), 0.0);
  double total = 0.0;
  for (int e = std::max(first, 0); e < last && e < static_cast<int>(log.episodes.size()); ++e)
    for (std::size_t b = 0; b < freq.size(); ++b) {
      const auto c = static_cast<double>(log.episodes[static_cast<std::size_t>(e)].action_counts[static_cast<std::size_t>(rank)][b]);
      freq[b] += c;
      total += c;
    }
  if (total > 0.0)
    for (double& f : freq) f /= total;
  return freq;
}

double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

double sd_of(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean_of(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size() - 1));
}

}  // namespace

Network build_network(const NetworkSpec& spec, std::uint64_t seed) {
  switch (spec.generator) {
    case Generator::BA: return generate_ba(spec.n, spec.m, seed);
    case Generator::CE: {
      auto dist = ce_preset(spec.ce_tiers);
      if (spec.ce_a > 0.0) dist.weight_base = spec.ce_a;
      if (spec.ce_lambda > 0.0) dist.rate_base = spec.ce_lambda;
      return generate_ce(spec.n, dist, seed);
    }
    case Generator::ER: return generate_er(spec.n, spec.er_mean_degree, seed);
    case Generator::File: return load_edge_list(spec.edge_list);
  }
  throw InvalidParameter("unknown generator");
}

std::string network_label(const NetworkSpec& spec) {
  switch (spec.generator) {
    case Generator::BA: return "BA";
    case Generator::CE: return "CE-" + std::to_string(spec.ce_tiers);
    case Generator::ER: return "ER";
    case Generator::File: return std::filesystem::path(spec.edge_list).stem().string();
  }
  return "?";
}

std::shared_ptr<const RoutingTables> build_tables(const ScenarioConfig& config, std::uint64_t seed) {
  auto net = std::make_shared<const Network>(build_network(config.network, seed));
  if (config.network.generator == Generator::File)
    for (int k : config.k)
      if (k > net->size() / 10)
        throw ConfigError("k = " + std::to_string(k) + " exceeds N/10 for " + config.network.edge_list);
  RoutingOptions options;
  if (!config.betas.empty()) options.beta_set = config.betas;
  options.threads = worker_count(config);
  return build_routing_tables(std::move(net), options);
}

std::string csv_preamble(const ScenarioConfig& config, std::string_view kind) {
  std::string seeds;
  for (std::size_t i = 0; i < config.seeds.size(); ++i) seeds += (i ? "," : "") + std::to_string(config.seeds[i]);
  return "# hdrouting " + std::string(kind) + " name=" + config.name + " config=" + config_hash(config) +
         " seeds=" + seeds + "\n";
}

std::uint64_t traffic_seed(std::uint64_t network_seed, double r_over_n) {
  const auto rate_key = static_cast<std::uint64_t>(std::llround(r_over_n * 1e9));
  return derive_seed(derive_seed(network_seed, 0x74726166ULL), rate_key);
}

std::uint64_t agent_seed(std::uint64_t network_seed, double r_over_n, int k) {
  return derive_seed(traffic_seed(network_seed, r_over_n), 0x6167656e74ULL + static_cast<std::uint64_t>(k));
}

RunOutcome run_single(const std::shared_ptr<const RoutingTables>& tables, const ScenarioConfig& config,
                      const RunSpec& spec) {
  RunOutcome out;
  const Network& net = *tables->network;
  out.rate = spec.r_over_n * net.size();
  SimConfig sc;
  sc.rate = out.rate;
  sc.buffer = config.buffer;
  sc.mi_len = config.mi_len;
  sc.strategy = spec.strategy;
  sc.seed = traffic_seed(spec.network_seed, spec.r_over_n);
  out.rl = spec.strategy == Strategy::HD ? select_rl_nodes(net, spec.k) : RLNodeSet{};
  Simulator sim(tables, out.rl, sc);
  out.agents = make_agents(sim, config.agent, agent_seed(spec.network_seed, spec.r_over_n, spec.k));

  Rng removal_rng(derive_seed(sc.seed, 0x72656d6fULL));
  const bool removal = spec.removal_mode.has_value() && spec.removal_after_episode > 0;
  auto remove = [&](Simulator& s) { out.removed = s.remove_links(config.removal_fraction, *spec.removal_mode, removal_rng); };

  if (!out.agents.empty()) {
    TrainingOptions options;
    options.episodes = config.episodes;
    options.mis_per_episode = config.mis_per_episode;
    if (removal)
      options.after_episode = [&](int e, Simulator& s) {
        if (e + 1 == spec.removal_after_episode) remove(s);
      };
    out.log = episode_loop(sim, out.agents, options);
  } else if (removal) {
    remove(sim);
  }
  if (!spec.measure) {
    out.counters = sim.counters();
    return out;
  }

  sim.reset();
  const std::int64_t steps = static_cast<std::int64_t>(config.warmup) + config.window;
  bool captured = false;
  sim.set_step_observer([&](const StepSummary& s) {
    if (s.t == config.snapshot_time) {
      out.drops_at_snapshot = sim.counters().drop_by_node;
      captured = true;
    }
    if (spec.record_timeseries) {
      const auto& c = sim.counters();
      out.timeseries.push_back({s.t, s.w, s.in_transit, c.delivered, c.dropped()});
    }
  });
  if (out.agents.empty()) {
    sim.run(steps);
  } else {
    const double eps = epsilon_at(config.agent, config.episodes);
    while (sim.time() < steps) run_interval(sim, out.agents, eps, true);
  }
  sim.set_step_observer({});
  if (!captured) out.drops_at_snapshot = config.snapshot_time == 0
                                             ? std::vector<std::int64_t>(static_cast<std::size_t>(net.size()), 0)
                                             : sim.counters().drop_by_node;
  out.eta = order_parameter(sim.w_series(), out.rate, config.warmup, config.window);
  out.counters = sim.counters();
  return out;
}

// Capacity sweep ------------------------------------------------------------

SweepResult run_capacity_sweep(const ScenarioConfig& config) {
  validate(config);
  std::vector<std::shared_ptr<const RoutingTables>> tables;
  for (auto seed : config.seeds) tables.push_back(build_tables(config, seed));

  struct Task {
    std::size_t seed_index;
    Strategy strategy;
    int k;
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < config.seeds.size(); ++s)
    for (auto strategy : config.strategies) {
      if (strategy == Strategy::HD) {
        for (int k : config.k) tasks.push_back({s, strategy, k});
      } else {
        tasks.push_back({s, strategy, 0});
      }
    }
  std::vector<double> rates = config.r_over_n;
  std::sort(rates.begin(), rates.end());
  rates.erase(std::unique(rates.begin(), rates.end()), rates.end());

  std::vector<std::vector<SweepRow>> rows(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  detail::parallel_for(tasks.size(), worker_count(config), [&](std::size_t i) {
    const auto& task = tasks[i];
    try {
      int congested = 0;
      for (double r : rates) {
        RunSpec spec;
        spec.strategy = task.strategy;
        spec.k = task.k;
        spec.r_over_n = r;
        spec.network_seed = config.seeds[task.seed_index];
        const auto outcome = run_single(tables[task.seed_index], config, spec);
        rows[i].push_back({task.strategy, task.k, r, spec.network_seed, outcome.eta});
        if (outcome.eta > config.rc_threshold) ++congested;
        if (config.sweep_stop_after > 0 && congested >= config.sweep_stop_after) break;
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });

  SweepResult result;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    result.rows.insert(result.rows.end(), rows[i].begin(), rows[i].end());
    const auto& task = tasks[i];
    CapacityRow cap;
    cap.strategy = task.strategy;
    cap.k = task.k;
    cap.seed = config.seeds[task.seed_index];
    cap.capacity_bound = capacity_bound(*tables[task.seed_index]->network);
    std::vector<RatePoint> points;
    const double n = tables[task.seed_index]->network->size();
    for (const auto& row : rows[i]) {
      points.push_back({row.r_over_n * n, row.eta});
      if (row.eta > config.rc_threshold) ++cap.congested_points;
    }
    try {
      cap.rc = estimate_rc(points, {config.rc_threshold, config.rc_max_points});
    } catch (const InsufficientData&) {
    }
    result.capacity.push_back(cap);
  }
  for (auto& cap : result.capacity) {
    if (!cap.rc) continue;
    for (const auto& base : result.capacity)
      if (base.strategy == Strategy::SP && base.seed == cap.seed && base.rc)
        cap.delta_rc = (*cap.rc - *base.rc) / *base.rc;
  }

  write_file(config, "sweep.csv", [&](std::ostream& out) { write_sweep_csv(config, result, out); });
  write_file(config, "rc.csv", [&](std::ostream& out) { write_capacity_csv(config, result, out); });
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return result;
}

void write_sweep_csv(const ScenarioConfig& config, const SweepResult& result, std::ostream& out) {
  out << csv_preamble(config, "sweep") << "strategy,K,R_over_N,seed,eta,R_c,dR_c\n";
  for (const auto& row : result.rows) {
    const CapacityRow* cap = nullptr;
    for (const auto& c : result.capacity)
      if (c.strategy == row.strategy && c.k == row.k && c.seed == row.seed) cap = &c;
    out << to_string(row.strategy) << ',' << row.k << ',' << fmt(row.r_over_n) << ',' << row.seed << ','
        << fmt(row.eta) << ',' << (cap && cap->rc ? fmt(*cap->rc) : "") << ','
        << (cap && cap->delta_rc ? fmt(*cap->delta_rc) : "") << '\n';
  }
}

void write_capacity_csv(const ScenarioConfig& config, const SweepResult& result, std::ostream& out) {
  out << csv_preamble(config, "capacity") << "strategy,K,seed,R_c,dR_c,capacity_bound,congested_points\n";
  for (const auto& c : result.capacity)
    out << to_string(c.strategy) << ',' << c.k << ',' << c.seed << ',' << (c.rc ? fmt(*c.rc) : "") << ','
        << (c.delta_rc ? fmt(*c.delta_rc) : "") << ',' << fmt(c.capacity_bound) << ',' << c.congested_points << '\n';
}

std::vector<CapacitySummary> summarize_capacity(const SweepResult& result) {
  std::vector<CapacitySummary> out;
  for (const auto& c : result.capacity) {
    const bool seen = std::any_of(out.begin(), out.end(), [&](const CapacitySummary& s) {
      return s.strategy == c.strategy && s.k == c.k;
    });
    if (seen) continue;
    std::vector<double> rc, delta;
    for (const auto& d : result.capacity) {
      if (d.strategy != c.strategy || d.k != c.k) continue;
      if (d.rc) rc.push_back(*d.rc);
      if (d.delta_rc) delta.push_back(*d.delta_rc);
    }
    out.push_back({c.strategy, c.k, mean_of(rc), sd_of(rc), mean_of(delta), sd_of(delta), static_cast<int>(rc.size())});
  }
  return out;
}

// Action census -------------------------------------------------------------

CensusResult run_action_census(const ScenarioConfig& config) {
  validate(config);
  struct Cell {
    std::size_t seed_index;
    int k;
    double r;
  };
  std::vector<Cell> cells;
  for (std::size_t s = 0; s < config.seeds.size(); ++s)
    for (int k : config.k) {
      if (k == 0) continue;
      for (double r : config.r_over_n) cells.push_back({s, k, r});
    }
  std::vector<std::shared_ptr<const RoutingTables>> tables;
  for (auto seed : config.seeds) tables.push_back(build_tables(config, seed));

  std::vector<std::vector<ActionRow>> rows(cells.size());
  detail::parallel_for(cells.size(), worker_count(config), [&](std::size_t i) {
    const auto& cell = cells[i];
    RunSpec spec;
    spec.strategy = Strategy::HD;
    spec.k = cell.k;
    spec.r_over_n = cell.r;
    spec.network_seed = config.seeds[cell.seed_index];
    spec.measure = false;
    const auto outcome = run_single(tables[cell.seed_index], config, spec);
    const int episodes = static_cast<int>(outcome.log.episodes.size());
    for (int rank = 0; rank < outcome.rl.size(); ++rank)
      rows[i].push_back({spec.network_seed, cell.k, rank, outcome.rl.node(rank), cell.r,
                         distribution_over(outcome.log, rank, episodes - config.census_last, episodes)});
  });

  CensusResult result;
  result.beta_set = tables.front()->beta_set;
  for (auto& r : rows) result.rows.insert(result.rows.end(), r.begin(), r.end());
  write_file(config, "actions.csv", [&](std::ostream& out) { write_actions_csv(config, result, out); });
  return result;
}

void write_actions_csv(const ScenarioConfig& config, const CensusResult& result, std::ostream& out) {
  out << csv_preamble(config, "actions") << "seed,K,rank,node,R_over_N,beta,freq\n";
  for (const auto& row : result.rows)
    for (std::size_t b = 0; b < row.freq.size(); ++b)
      out << row.seed << ',' << row.k << ',' << row.rank << ',' << row.node << ',' << fmt(row.r_over_n) << ','
          << fmt(result.beta_set[b]) << ',' << fmt(row.freq[b]) << '\n';
}

std::vector<double> mean_distribution(const CensusResult& result, int k, double r_over_n, int rank) {
  std::vector<double> mean(result.beta_set.size(), 0.0);
  int count = 0;
  for (const auto& row : result.rows) {
    if (row.k != k || row.rank != rank || row.r_over_n != r_over_n) continue;
    for (std::size_t b = 0; b < mean.size(); ++b) mean[b] += row.freq[b];
    ++count;
  }
  if (count == 0) throw InvalidParameter("no census rows for the requested cell");
  for (double& m : mean) m /= count;
  return mean;
}

// Resilience ----------------------------------------------------------------

ResilienceResult run_resilience(const ScenarioConfig& config) {
  validate(config);
  const int k = config.k.front();
  if (k < 1) throw ConfigError("resilience needs k >= 1");
  if (config.removal_at_episode > config.episodes) throw ConfigError("removal_at_episode exceeds episodes");
  const double r = config.r_over_n.front();
  struct Cell {
    std::size_t seed_index;
    std::string mode;
  };
  std::vector<Cell> cells;
  for (std::size_t s = 0; s < config.seeds.size(); ++s)
    for (const auto& mode : config.removal_modes) cells.push_back({s, mode});
  std::vector<std::shared_ptr<const RoutingTables>> tables;
  for (auto seed : config.seeds) tables.push_back(build_tables(config, seed));

  std::vector<ResilienceSeries> series(cells.size());
  detail::parallel_for(cells.size(), worker_count(config), [&](std::size_t i) {
    const auto& cell = cells[i];
    RunSpec spec;
    spec.strategy = Strategy::HD;
    spec.k = k;
    spec.r_over_n = r;
    spec.network_seed = config.seeds[cell.seed_index];
    spec.measure = false;
    if (cell.mode != "none") {
      spec.removal_mode = parse_removal_mode(cell.mode);
      spec.removal_after_episode = config.removal_at_episode;
    }
    const auto outcome = run_single(tables[cell.seed_index], config, spec);
    auto& s = series[i];
    s.mode = cell.mode;
    s.seed = spec.network_seed;
    s.top_node = outcome.rl.node(0);
    s.removed = outcome.removed;
    for (const auto& e : outcome.log.episodes) {
      s.reward.push_back(mean_of(e.mean_reward));
      s.epsilon.push_back(e.epsilon);
      s.dropped.push_back(e.dropped);
    }
    s.reward_ma3 = trailing_mean(s.reward, 3);
    const int at = config.removal_at_episode;
    const int total = static_cast<int>(outcome.log.episodes.size());
    s.pre_freq = distribution_over(outcome.log, 0, at - config.resilience_pre_window, at);
    s.post_freq = distribution_over(outcome.log, 0, std::max(at, total - config.census_last), total);
  });

  ResilienceResult result;
  result.beta_set = tables.front()->beta_set;
  result.series = std::move(series);
  write_file(config, "resilience.csv", [&](std::ostream& out) { write_resilience_csv(config, result, out); });
  write_file(config, "resilience_actions.csv",
             [&](std::ostream& out) { write_resilience_actions_csv(config, result, out); });
  return result;
}

void write_resilience_csv(const ScenarioConfig& config, const ResilienceResult& result, std::ostream& out) {
  out << csv_preamble(config, "resilience") << "mode,seed,episode,reward,reward_ma3,epsilon,dropped\n";
  for (const auto& s : result.series)
    for (std::size_t e = 0; e < s.reward.size(); ++e)
      out << s.mode << ',' << s.seed << ',' << e + 1 << ',' << fmt(s.reward[e]) << ',' << fmt(s.reward_ma3[e]) << ','
          << fmt(s.epsilon[e]) << ',' << s.dropped[e] << '\n';
}

void write_resilience_actions_csv(const ScenarioConfig& config, const ResilienceResult& result, std::ostream& out) {
  out << csv_preamble(config, "resilience-actions") << "mode,seed,node,phase,beta,freq\n";
  for (const auto& s : result.series) {
    for (std::size_t b = 0; b < s.pre_freq.size(); ++b)
      out << s.mode << ',' << s.seed << ',' << s.top_node << ",pre," << fmt(result.beta_set[b]) << ','
          << fmt(s.pre_freq[b]) << '\n';
    for (std::size_t b = 0; b < s.post_freq.size(); ++b)
      out << s.mode << ',' << s.seed << ',' << s.top_node << ",post," << fmt(result.beta_set[b]) << ','
          << fmt(s.post_freq[b]) << '\n';
  }
}

// Travel time and loss report ------------------------------------------------

double ReportEntry::mean_travel_time() const {
  double sum = 0.0;
  std::int64_t count = 0;
  for (std::size_t t = 0; t < travel_hist.size(); ++t) {
    sum += static_cast<double>(t) * static_cast<double>(travel_hist[t]);
    count += travel_hist[t];
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

std::vector<double> bc_bin_edges() {
  std::vector<double> edges{0.0};
  for (int i = 0; i <= 24; ++i) edges.push_back(std::pow(10.0, -6.0 + i / 4.0));
  edges.back() = 1.0;
  return edges;
}

ReportResult run_distribution_report(const ScenarioConfig& config) {
  validate(config);
  ReportResult result;
  result.bin_edges = bc_bin_edges();
  auto add = [&](Strategy strategy, int k, double r) {
    ReportEntry e;
    e.label = strategy_label(strategy, k);
    e.strategy = strategy;
    e.k = k;
    e.r_over_n = r;
    result.entries.push_back(std::move(e));
  };
  for (double r : config.r_over_n)
    for (auto strategy : config.strategies) {
      if (strategy == Strategy::HD) {
        for (int k : config.k)
          if (k > 0) add(strategy, k, r);
      } else {
        add(strategy, 0, r);
      }
    }
  std::vector<std::shared_ptr<const RoutingTables>> tables;
  for (auto seed : config.seeds) tables.push_back(build_tables(config, seed));

  const std::size_t nseeds = config.seeds.size();
  const std::size_t bins = result.bin_edges.size() - 1;
  std::vector<RunOutcome> outcomes(result.entries.size() * nseeds);
  detail::parallel_for(outcomes.size(), worker_count(config), [&](std::size_t i) {
    const auto& entry = result.entries[i / nseeds];
    RunSpec spec;
    spec.strategy = entry.strategy;
    spec.k = entry.k;
    spec.r_over_n = entry.r_over_n;
    spec.network_seed = config.seeds[i % nseeds];
    outcomes[i] = run_single(tables[i % nseeds], config, spec);
    outcomes[i].agents.clear();
    outcomes[i].log = {};
  });
  for (std::size_t e = 0; e < result.entries.size(); ++e) {
    auto& entry = result.entries[e];
    entry.loss_by_bin.assign(bins, 0);
    for (std::size_t s = 0; s < nseeds; ++s) {
      const auto& o = outcomes[e * nseeds + s];
      const auto& net = *tables[s]->network;
      entry.rate = o.rate;
      const auto& hist = o.counters.travel_time_hist;
      if (entry.travel_hist.size() < hist.size()) entry.travel_hist.resize(hist.size(), 0);
      for (std::size_t t = 0; t < hist.size(); ++t) entry.travel_hist[t] += hist[t];
      entry.generated += o.counters.generated;
      entry.delivered += o.counters.delivered;
      entry.dropped += o.counters.dropped();
      for (NodeId v = 0; v < net.size(); ++v) {
        const double b = net.bc(v);
        auto bin = static_cast<std::size_t>(
            std::upper_bound(result.bin_edges.begin(), result.bin_edges.end(), b) - result.bin_edges.begin());
        bin = std::min(bin == 0 ? 0 : bin - 1, bins - 1);
        entry.loss_by_bin[bin] += o.drops_at_snapshot[static_cast<std::size_t>(v)];
      }
    }
  }
  write_file(config, "traveltime.csv", [&](std::ostream& out) { write_traveltime_csv(config, result, out); });
  write_file(config, "loss_by_bc.csv", [&](std::ostream& out) { write_loss_csv(config, result, out); });
  write_file(config, "report_summary.csv",
             [&](std::ostream& out) { write_report_summary_csv(config, result, out); });
  return result;
}

void write_traveltime_csv(const ScenarioConfig& config, const ReportResult& result, std::ostream& out) {
  out << csv_preamble(config, "traveltime") << "strategy,R,T,count\n";
  for (const auto& e : result.entries)
    for (std::size_t t = 0; t < e.travel_hist.size(); ++t)
      if (e.travel_hist[t] > 0) out << e.label << ',' << fmt(e.rate) << ',' << t << ',' << e.travel_hist[t] << '\n';
}

void write_loss_csv(const ScenarioConfig& config, const ReportResult& result, std::ostream& out) {
  out << csv_preamble(config, "loss-by-bc") << "strategy,R,bc_bin_low,bc_bin_high,cum_dropped\n";
  for (const auto& e : result.entries)
    for (std::size_t b = 0; b < e.loss_by_bin.size(); ++b)
      out << e.label << ',' << fmt(e.rate) << ',' << fmt(result.bin_edges[b]) << ',' << fmt(result.bin_edges[b + 1])
          << ',' << e.loss_by_bin[b] << '\n';
}

void write_report_summary_csv(const ScenarioConfig& config, const ReportResult& result, std::ostream& out) {
  out << csv_preamble(config, "report") << "strategy,R_over_N,R,generated,delivered,dropped,mean_T\n";
  for (const auto& e : result.entries)
    out << e.label << ',' << fmt(e.r_over_n) << ',' << fmt(e.rate) << ',' << e.generated << ',' << e.delivered << ','
        << e.dropped << ',' << fmt(e.mean_travel_time()) << '\n';
}

// Single training run --------------------------------------------------------

RunOutcome run_training(const ScenarioConfig& config) {
  validate(config);
  const auto tables = build_tables(config, config.seeds.front());
  RunSpec spec;
  spec.strategy = std::find(config.strategies.begin(), config.strategies.end(), Strategy::HD) != config.strategies.end()
                      ? Strategy::HD
                      : config.strategies.front();
  spec.k = spec.strategy == Strategy::HD ? config.k.front() : 0;
  spec.r_over_n = config.r_over_n.front();
  spec.network_seed = config.seeds.front();
  spec.record_timeseries = true;
  auto outcome = run_single(tables, config, spec);

  write_file(config, "episodes.csv", [&](std::ostream& out) {
    out << csv_preamble(config, "episodes") << "episode,epsilon,rank,node,reward,generated,delivered,dropped\n";
    for (const auto& e : outcome.log.episodes)
      for (int rank = 0; rank < outcome.rl.size(); ++rank)
        out << e.episode + 1 << ',' << fmt(e.epsilon) << ',' << rank << ',' << outcome.rl.node(rank) << ','
            << fmt(e.mean_reward[static_cast<std::size_t>(rank)]) << ',' << e.generated << ',' << e.delivered << ','
            << e.dropped << '\n';
  });
  CensusResult census;
  census.beta_set = tables->beta_set;
  const int episodes = static_cast<int>(outcome.log.episodes.size());
  for (int rank = 0; rank < outcome.rl.size(); ++rank)
    census.rows.push_back({spec.network_seed, spec.k, rank, outcome.rl.node(rank), spec.r_over_n,
                           distribution_over(outcome.log, rank, episodes - config.census_last, episodes)});
  write_file(config, "actions.csv", [&](std::ostream& out) { write_actions_csv(config, census, out); });
  write_file(config, "timeseries.csv", [&](std::ostream& out) {
    out << csv_preamble(config, "timeseries") << "t,W,in_transit,delivered,dropped\n";
    for (const auto& p : outcome.timeseries)
      out << p.t << ',' << p.w << ',' << p.in_transit << ',' << p.delivered << ',' << p.dropped << '\n';
  });
  if (!outcome.agents.empty())
    write_file(config, "agents.ckpt",
               [&](std::ostream& out) { save_checkpoint(std::span<const DqnAgent>(outcome.agents), out); });
  return outcome;
}

// Small statistics helpers -------------------------------------------------

double js_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw InvalidParameter("distributions differ in length");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) d += 0.5 * p[i] * std::log2(p[i] / m);
    if (q[i] > 0.0) d += 0.5 * q[i] * std::log2(q[i] / m);
  }
  return d;
}

int modal_index(std::span<const double> p) {
  if (p.empty()) throw InvalidParameter("empty distribution");
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

std::vector<double> trailing_mean(std::span<const double> x, int window) {
  if (window < 1) throw InvalidParameter("window must be >= 1");
  std::vector<double> out(x.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sum += x[i];
    if (i >= static_cast<std::size_t>(window)) sum -= x[i - static_cast<std::size_t>(window)];
    out[i] = sum / static_cast<double>(std::min<std::size_t>(i + 1, static_cast<std::size_t>(window)));
  }
  return out;
}

}  // namespace hdr
