#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hdrouting/agent.hpp"
#include "hdrouting/config.hpp"
#include "hdrouting/graph.hpp"
#include "hdrouting/routing.hpp"
#include "hdrouting/traffic.hpp"

namespace hdr {

/// Network instance for one seed of the scenario.
Network build_network(const NetworkSpec& spec, std::uint64_t seed);
/// Short label such as "BA", "CE-3" or the edge-list file stem.
std::string network_label(const NetworkSpec& spec);

std::shared_ptr<const RoutingTables> build_tables(const ScenarioConfig& config, std::uint64_t seed);

/// Comment line placed at the top of every CSV the experiments write.
std::string csv_preamble(const ScenarioConfig& config, std::string_view kind);

/// Traffic and agent seeds for one cell. They depend only on the network seed,
/// the rate and (for agents) K, never on the position of the cell in the grid.
std::uint64_t traffic_seed(std::uint64_t network_seed, double r_over_n);
std::uint64_t agent_seed(std::uint64_t network_seed, double r_over_n, int k);

struct RunSpec {
  Strategy strategy = Strategy::SP;
  int k = 0;
  double r_over_n = 0.001;
  std::uint64_t network_seed = 1;
  /// Applied to the simulator after this many training episodes (1-based); 0 = never.
  int removal_after_episode = 0;
  std::optional<RemovalMode> removal_mode;
  bool record_timeseries = false;
  /// Skip the post-training measurement run (eta, counters and snapshot stay empty).
  bool measure = true;
};

struct TimePoint {
  std::int64_t t = 0;
  std::int64_t w = 0;
  std::int64_t in_transit = 0;
  std::int64_t delivered = 0;  // cumulative
  std::int64_t dropped = 0;    // cumulative
};

struct RunOutcome {
  TrainingLog log;  // empty unless HD with K > 0
  std::vector<DqnAgent> agents;
  RLNodeSet rl;
  double rate = 0.0;
  double eta = 0.0;
  /// Counters at the end of the measurement run.
  TrafficCounters counters;
  /// drop_by_node at t = snapshot_time of the measurement run (or its end, if shorter).
  std::vector<std::int64_t> drops_at_snapshot;
  std::vector<TimePoint> timeseries;
  std::vector<Edge> removed;
};

/// Trains agents (HD, K > 0) for config.episodes episodes, then restarts
/// traffic and measures for warmup + window steps with the trained policy at
/// the epsilon floor, learning online. SP, LD and HD with K = 0 skip training.
RunOutcome run_single(const std::shared_ptr<const RoutingTables>& tables, const ScenarioConfig& config,
                      const RunSpec& spec);

// Capacity sweep ------------------------------------------------------------

struct SweepRow {
  Strategy strategy = Strategy::SP;
  int k = 0;
  double r_over_n = 0.0;
  std::uint64_t seed = 0;
  double eta = 0.0;
};

struct CapacityRow {
  Strategy strategy = Strategy::SP;
  int k = 0;
  std::uint64_t seed = 0;
  std::optional<double> rc;        // in packets per step
  std::optional<double> delta_rc;  // (R_c - R_c(SP)) / R_c(SP), same network and seed
  double capacity_bound = 0.0;
  int congested_points = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<CapacityRow> capacity;
};

/// Writes sweep.csv and rc.csv into config.out_dir (when not empty). A row of
/// the grid (seed, strategy, K) runs its rates in ascending order and stops
/// after sweep_stop_after congested points.
SweepResult run_capacity_sweep(const ScenarioConfig& config);

void write_sweep_csv(const ScenarioConfig& config, const SweepResult& result, std::ostream& out);
void write_capacity_csv(const ScenarioConfig& config, const SweepResult& result, std::ostream& out);

struct CapacitySummary {
  Strategy strategy = Strategy::SP;
  int k = 0;
  double rc_mean = 0.0, rc_sd = 0.0;
  double delta_mean = 0.0, delta_sd = 0.0;
  int seeds = 0;  // seeds with an R_c estimate
};
std::vector<CapacitySummary> summarize_capacity(const SweepResult& result);

// Action census -------------------------------------------------------------

struct ActionRow {
  std::uint64_t seed = 0;
  int k = 0;
  int rank = 0;
  NodeId node = 0;
  double r_over_n = 0.0;
  std::vector<double> freq;  // over the beta grid
};

struct CensusResult {
  std::vector<double> beta_set;
  std::vector<ActionRow> rows;
};

/// Writes actions.csv. Frequencies cover the last census_last episodes.
CensusResult run_action_census(const ScenarioConfig& config);
void write_actions_csv(const ScenarioConfig& config, const CensusResult& result, std::ostream& out);

/// Seed-averaged P(beta) of the agent with the given BC rank at (K, R/N).
std::vector<double> mean_distribution(const CensusResult& result, int k, double r_over_n, int rank);

// Resilience ----------------------------------------------------------------

struct ResilienceSeries {
  std::string mode;  // none, random or bc
  std::uint64_t seed = 0;
  std::vector<double> reward;      // per episode, averaged over agents
  std::vector<double> reward_ma3;  // trailing 3-episode mean
  std::vector<double> epsilon;
  std::vector<std::int64_t> dropped;
  std::vector<double> pre_freq;   // top agent, resilience_pre_window episodes before removal
  std::vector<double> post_freq;  // top agent, last census_last episodes after removal
  NodeId top_node = -1;
  std::vector<Edge> removed;
};

struct ResilienceResult {
  std::vector<double> beta_set;
  std::vector<ResilienceSeries> series;
};

/// Uses the first entries of k and r_over_n. Writes resilience.csv and
/// resilience_actions.csv.
ResilienceResult run_resilience(const ScenarioConfig& config);
void write_resilience_csv(const ScenarioConfig& config, const ResilienceResult& result, std::ostream& out);
void write_resilience_actions_csv(const ScenarioConfig& config, const ResilienceResult& result, std::ostream& out);

// Travel time and loss report ------------------------------------------------

struct ReportEntry {
  std::string label;  // SP, LD or HD-K<k>
  Strategy strategy = Strategy::SP;
  int k = 0;
  double r_over_n = 0.0;
  double rate = 0.0;
  std::vector<std::int64_t> travel_hist;  // summed over seeds
  std::vector<std::int64_t> loss_by_bin;  // summed over seeds
  std::int64_t generated = 0, delivered = 0, dropped = 0;
  double mean_travel_time() const;
};

struct ReportResult {
  std::vector<double> bin_edges;  // normalized BC; first bin starts at 0
  std::vector<ReportEntry> entries;
};

/// For each R/N: SP and LD (if listed) plus HD for every K > 0 in k. Writes
/// traveltime.csv, loss_by_bc.csv and report_summary.csv.
ReportResult run_distribution_report(const ScenarioConfig& config);
void write_traveltime_csv(const ScenarioConfig& config, const ReportResult& result, std::ostream& out);
void write_loss_csv(const ScenarioConfig& config, const ReportResult& result, std::ostream& out);
void write_report_summary_csv(const ScenarioConfig& config, const ReportResult& result, std::ostream& out);

/// Fixed log-spaced normalized-BC bin edges: 0, then 1e-6 .. 1 in quarter decades.
std::vector<double> bc_bin_edges();

// Single training run --------------------------------------------------------

/// One run at the first seed, first K and first R/N; HD if listed, otherwise
/// the first strategy. Writes episodes.csv, actions.csv, timeseries.csv and, for HD,
/// agents.ckpt.
RunOutcome run_training(const ScenarioConfig& config);

// Small statistics helpers -------------------------------------------------

/// Jensen-Shannon divergence in bits (0 .. 1).
double js_divergence(std::span<const double> p, std::span<const double> q);
/// Index of the largest entry; ties go to the smaller index.
int modal_index(std::span<const double> p);
std::vector<double> trailing_mean(std::span<const double> x, int window);

}  // namespace hdr
