// hdroute: command line front end for the routing experiments.
//
//   hdroute stats --config scenarios/table1_ba.conf
//   hdroute sweep --config scenarios/capacity_ba.conf --out-dir out/sweep
//   hdroute routes export --beta 1.0 --out routes.csv
//
// Every config key can be given as --key value; see scenarios/README.md.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "hdrouting/config.hpp"
#include "hdrouting/errors.hpp"
#include "hdrouting/experiment.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
};

void add_common(CLI::App* app, CommonOptions& common) {
  app->add_option("--config", common.config_path, "Scenario config file (key = value lines)");
  app->add_option("--seed", common.seed, "Single network seed (replaces the seeds list)");
  for (const auto& key : hdr::config_keys()) {
    std::string names = "--" + key;
    if (key.find('_') != std::string::npos) {
      std::string dashed = key;
      for (char& c : dashed)
        if (c == '_') c = '-';
      names += ",--" + dashed;
    }
    common.options[key] = app->add_option(names, common.values[key], "Override config key '" + key + "'");
  }
}

hdr::ScenarioConfig resolve(const CommonOptions& common) {
  hdr::ScenarioConfig config = common.config_path.empty() ? hdr::ScenarioConfig{} : hdr::load_config(common.config_path);
  for (const auto& [key, option] : common.options)
    if (option->count() > 0) hdr::set_config_value(config, key, common.values.at(key));
  if (common.seed) config.seeds = {*common.seed};
  hdr::validate(config);
  return config;
}

void print_capacity(const hdr::SweepResult& result) {
  std::printf("strategy,K,R_c_mean,R_c_sd,dR_c_mean,dR_c_sd,seeds\n");
  for (const auto& s : hdr::summarize_capacity(result))
    std::printf("%s,%d,%.4f,%.4f,%.4f,%.4f,%d\n", hdr::to_string(s.strategy).c_str(), s.k, s.rc_mean, s.rc_sd,
                s.delta_mean, s.delta_sd, s.seeds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Packet routing simulator with hierarchical bypass agents"};
  app.require_subcommand(1);

  CommonOptions gen_opts, stats_opts, bc_opts, routes_opts, train_opts, sweep_opts, census_opts, res_opts, report_opts;

  auto* gen = app.add_subcommand("gen-graph", "Generate the configured network(s) and write edge lists");
  add_common(gen, gen_opts);
  std::string gen_out;
  gen->add_option("--out", gen_out, "Edge list file (first seed only)");

  auto* stats = app.add_subcommand("stats", "Degree statistics: name,N,mean_degree,mean_sp_len,rsd,H");
  add_common(stats, stats_opts);

  auto* bc = app.add_subcommand("bc", "Betweenness of every node of the first seed's network");
  add_common(bc, bc_opts);
  std::string bc_out;
  bc->add_option("--out", bc_out, "CSV file (default: stdout)");

  auto* routes = app.add_subcommand("routes", "Routing table utilities");
  routes->require_subcommand(1);
  auto* routes_export = routes->add_subcommand("export", "Write the next-hop table for one beta");
  add_common(routes_export, routes_opts);
  double beta = 0.0;
  std::string routes_out;
  routes_export->add_option("--beta", beta, "Bypass exponent")->required();
  routes_export->add_option("--out", routes_out, "CSV file with columns from,to,next")->required();

  auto* train = app.add_subcommand("train", "Train agents at one rate and write episodes, actions, timeseries");
  add_common(train, train_opts);
  auto* sweep = app.add_subcommand("sweep", "Capacity sweep over strategies, K and R/N");
  add_common(sweep, sweep_opts);
  auto* census = app.add_subcommand("census", "Action frequency census P(beta)");
  add_common(census, census_opts);
  auto* resilience = app.add_subcommand("resilience", "Link removal experiment");
  add_common(resilience, res_opts);
  auto* report = app.add_subcommand("report", "Travel time distributions and loss by BC");
  add_common(report, report_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      const auto config = resolve(gen_opts);
      const std::size_t count = gen_out.empty() ? config.seeds.size() : 1;
      for (std::size_t i = 0; i < count; ++i) {
        const auto net = hdr::build_network(config.network, config.seeds[i]);
        std::string path = gen_out;
        if (path.empty()) {
          std::filesystem::create_directories(config.out_dir);
          path = (std::filesystem::path(config.out_dir) /
                  (hdr::network_label(config.network) + "_s" + std::to_string(config.seeds[i]) + ".txt"))
                     .string();
        }
        std::ofstream out(path);
        if (!out) throw hdr::Error("cannot write " + path);
        out << "# " << hdr::network_label(config.network) << " seed=" << config.seeds[i] << " N=" << net.size()
            << " E=" << net.edge_count() << '\n';
        hdr::write_edge_list(net, out);
        std::printf("%s N=%d E=%zu\n", path.c_str(), net.size(), net.edge_count());
      }
    } else if (stats->parsed()) {
      const auto config = resolve(stats_opts);
      std::cout << hdr::csv_preamble(config, "stats") << "name,N,mean_degree,mean_sp_len,rsd,H\n";
      for (auto seed : config.seeds) {
        const auto net = hdr::build_network(config.network, seed);
        const auto s = hdr::degree_stats(net);
        std::printf("%s-s%llu,%d,%.4f,%.4f,%.4f,%.4f\n", hdr::network_label(config.network).c_str(),
                    static_cast<unsigned long long>(seed), net.size(), s.mean_degree, s.mean_sp_length, s.rsd,
                    s.heterogeneity);
      }
    } else if (bc->parsed()) {
      const auto config = resolve(bc_opts);
      const auto net = hdr::build_network(config.network, config.seeds.front());
      std::ofstream file;
      if (!bc_out.empty()) {
        file.open(bc_out);
        if (!file) throw hdr::Error("cannot write " + bc_out);
      }
      std::ostream& out = bc_out.empty() ? std::cout : file;
      out << hdr::csv_preamble(config, "bc") << "node,original_id,degree,bc,bc_raw\n";
      for (hdr::NodeId v = 0; v < net.size(); ++v)
        out << v << ',' << net.original_ids()[static_cast<std::size_t>(v)] << ',' << net.degree(v) << ','
            << net.bc(v) << ',' << net.raw_bc()[static_cast<std::size_t>(v)] << '\n';
    } else if (routes_export->parsed()) {
      const auto config = resolve(routes_opts);
      if (!(beta >= 0.0)) throw hdr::ConfigError("--beta must be >= 0");
      const auto net = hdr::build_network(config.network, config.seeds.front());
      const auto weights = hdr::bypass_weights(net, beta);
      const auto table = hdr::build_weighted_table(net, weights, config.threads > 0 ? config.threads : 1);
      std::ofstream out(routes_out);
      if (!out) throw hdr::Error("cannot write " + routes_out);
      std::ostringstream kind;
      kind << "routes beta=" << beta;
      out << hdr::csv_preamble(config, kind.str());
      hdr::write_next_hop_csv(table, out);
    } else if (train->parsed()) {
      const auto config = resolve(train_opts);
      const auto outcome = hdr::run_training(config);
      std::printf("rate=%.4g eta=%.5f delivered=%lld dropped=%lld mean_T=%.3f\n", outcome.rate, outcome.eta,
                  static_cast<long long>(outcome.counters.delivered),
                  static_cast<long long>(outcome.counters.dropped()), outcome.counters.mean_travel_time());
    } else if (sweep->parsed()) {
      const auto config = resolve(sweep_opts);
      print_capacity(hdr::run_capacity_sweep(config));
    } else if (census->parsed()) {
      const auto config = resolve(census_opts);
      const auto result = hdr::run_action_census(config);
      std::printf("rows=%zu written to %s/actions.csv\n", result.rows.size(), config.out_dir.c_str());
    } else if (resilience->parsed()) {
      const auto config = resolve(res_opts);
      const auto result = hdr::run_resilience(config);
      for (const auto& s : result.series)
        std::printf("mode=%s seed=%llu removed=%zu final_reward_ma3=%.4f\n", s.mode.c_str(),
                    static_cast<unsigned long long>(s.seed), s.removed.size(),
                    s.reward_ma3.empty() ? 0.0 : s.reward_ma3.back());
    } else if (report->parsed()) {
      const auto config = resolve(report_opts);
      const auto result = hdr::run_distribution_report(config);
      for (const auto& e : result.entries)
        std::printf("%s R=%.4g mean_T=%.3f delivered=%lld dropped=%lld\n", e.label.c_str(), e.rate,
                    e.mean_travel_time(), static_cast<long long>(e.delivered), static_cast<long long>(e.dropped));
    }
  } catch (const hdr::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const hdr::ParseError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
