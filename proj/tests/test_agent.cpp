#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "hdrouting/agent.hpp"
#include "hdrouting/errors.hpp"

using namespace hdr;

namespace {

// Constant Q-values: zero weights, output biases set to `q`.
QNetwork constant_network(const std::vector<double>& q) {
  QNetwork net({1, 4, 4, static_cast<int>(q.size())});
  auto p = net.parameters();
  std::copy(q.begin(), q.end(), p.end() - static_cast<std::ptrdiff_t>(q.size()));
  return net;
}

AgentConfig bandit_config() {
  AgentConfig c;
  c.gamma = 0.0;
  c.train_start = 1;
  return c;
}

std::shared_ptr<const RoutingTables> small_ba_tables() {
  return build_routing_tables(std::make_shared<const Network>(generate_ba(200, 2, 1)));
}

}  // namespace

TEST(QNetwork, ZeroWeightsGiveZeroOutput) {
  const QNetwork net({3, 16, 16, 7});
  const std::vector<double> x{0.1, 0.7, 0.3};
  EXPECT_EQ(net.forward(x), std::vector<double>(7, 0.0));
  EXPECT_EQ(net.output_size(), 7);
}

TEST(QNetwork, UnitChainPassesPositiveInput) {
  QNetwork net({1, 1, 1, 1});
  // Layout per layer: weight then bias.
  auto p = net.parameters();
  ASSERT_EQ(p.size(), 6u);
  p[0] = p[2] = p[4] = 1.0;
  const std::vector<double> x{0.5};
  EXPECT_DOUBLE_EQ(net.forward(x)[0], 0.5);
  const std::vector<double> negative{-0.5};
  EXPECT_DOUBLE_EQ(net.forward(negative)[0], 0.0);
}

TEST(QNetwork, DimensionMismatchThrows) {
  const QNetwork net({2, 4, 4, 7});
  const std::vector<double> x{0.1};
  EXPECT_THROW(net.forward(x), InvalidParameter);
}

TEST(QNetwork, GradientMatchesFiniteDifferences) {
  Rng rng(42);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    QNetwork net({3, 8, 8, 7}, rng);
    for (double& b : net.parameters()) b += 0.05 * unit(rng);
    std::vector<double> x{unit(rng), unit(rng), unit(rng)};
    std::vector<double> g(7);
    for (double& v : g) v = unit(rng);
    auto objective = [&](const QNetwork& q) {
      const auto out = q.forward(x);
      double s = 0.0;
      for (std::size_t i = 0; i < 7; ++i) s += g[i] * out[i];
      return s;
    };
    std::vector<double> grad(net.parameters().size(), 0.0);
    net.backward(x, g, grad);
    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) {
      QNetwork plus = net, minus = net;
      plus.parameters()[i] += h;
      minus.parameters()[i] -= h;
      const double numeric = (objective(plus) - objective(minus)) / (2.0 * h);
      const double scale = std::max({std::abs(numeric), std::abs(grad[i]), 1e-7});
      worst = std::max(worst, std::abs(numeric - grad[i]) / scale);
    }
    EXPECT_LT(worst, 1e-4) << "trial " << trial;
  }
}

TEST(QNetwork, HeUniformInitIsBoundedAndBiasFree) {
  Rng rng(3);
  const QNetwork net({1, 64, 64, 7}, rng);
  const auto p = net.parameters();
  // First layer: 64 weights with fan-in 1, bound sqrt(6).
  for (std::size_t i = 0; i < 64; ++i) EXPECT_LE(std::abs(p[i]), std::sqrt(6.0));
  for (std::size_t i = 64; i < 128; ++i) EXPECT_EQ(p[i], 0.0);
}

TEST(DqnAgent, GreedyPicksArgmaxAndLowestTie) {
  DqnAgent agent(1, 7, AgentConfig{}, 1);
  agent.online() = constant_network({0, 1, 0, 0, 0, 0, 0});
  const std::vector<double> s{0.4};
  for (int i = 0; i < 100; ++i) EXPECT_EQ(agent.act(s, 0.0), 1);
  agent.online() = constant_network({0, 2, 0, 2, 0, 0, 0});
  EXPECT_EQ(agent.act(s, 0.0), 1);
  agent.online() = constant_network(std::vector<double>(7, 0.0));
  EXPECT_EQ(agent.act(s, 0.0), 0);
}

TEST(DqnAgent, FullExplorationIsUniform) {
  DqnAgent agent(1, 7, AgentConfig{}, 2);
  const std::vector<double> s{0.4};
  std::vector<int> counts(7, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[static_cast<std::size_t>(agent.act(s, 1.0))];
  for (int c : counts) EXPECT_NEAR(c / static_cast<double>(draws), 1.0 / 7.0, 0.02);
}

TEST(DqnAgent, HalfExplorationMixture) {
  DqnAgent agent(1, 7, AgentConfig{}, 3);
  agent.online() = constant_network({0, 0, 0, 0, 5, 0, 0});
  const std::vector<double> s{0.4};
  int best = 0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) best += agent.act(s, 0.5) == 4;
  EXPECT_NEAR(best / static_cast<double>(draws), 0.5 + 0.5 / 7.0, 0.02);
}

TEST(DqnAgent, RegressesRepeatedRewardWithoutDiscount) {
  for (OptimizerKind kind : {OptimizerKind::Adam, OptimizerKind::SGD}) {
    AgentConfig c = bandit_config();
    c.optimizer = kind;
    if (kind == OptimizerKind::SGD) c.learning_rate = 0.05;
    DqnAgent agent(1, 7, c, 4);
    agent.remember({{0.3}, 2, -0.7, {0.3}});
    for (int i = 0; i < 2000; ++i) agent.train_step();
    const std::vector<double> s{0.3};
    EXPECT_NEAR(agent.q_values(s)[2], -0.7, 1e-2);
  }
}

TEST(DqnAgent, ContextualBanditFindsBestAction) {
  DqnAgent agent(1, 7, bandit_config(), 5);
  for (double s : {0.2, 0.8})
    for (int a = 0; a < 7; ++a) agent.remember({{s}, a, a == 2 ? -0.1 : -1.0, {s}});
  for (int i = 0; i < 3000; ++i) agent.train_step();
  for (double s : {0.2, 0.8}) {
    const std::vector<double> state{s};
    EXPECT_EQ(agent.act(state, 0.0), 2) << "state " << s;
  }
}

TEST(DqnAgent, LossIsNonnegativeAndWaitsForReplay) {
  AgentConfig c;
  c.train_start = 5;
  DqnAgent agent(1, 7, c, 6);
  Rng rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 4; ++i) agent.remember({{unit(rng)}, i, -unit(rng), {unit(rng)}});
  EXPECT_FALSE(agent.train_step().has_value());
  for (int i = 0; i < 200; ++i) {
    agent.remember({{unit(rng)}, i % 7, -unit(rng), {unit(rng)}});
    const auto loss = agent.train_step();
    ASSERT_TRUE(loss.has_value());
    EXPECT_GE(*loss, 0.0);
  }
}

TEST(DqnAgent, TargetNetworkSyncsOnSchedule) {
  AgentConfig c = bandit_config();
  c.target_sync = 5;
  DqnAgent agent(1, 7, c, 7);
  agent.remember({{0.5}, 0, -1.0, {0.5}});
  for (int i = 0; i < 4; ++i) agent.train_step();
  EXPECT_FALSE(agent.target() == agent.online());
  agent.train_step();
  EXPECT_TRUE(agent.target() == agent.online());
}

TEST(ReplayBuffer, SamplingIsUniform) {
  ReplayBuffer buffer(5);
  for (int i = 0; i < 5; ++i) buffer.push({{0.0}, i, 0.0, {0.0}});
  Rng rng(8);
  std::vector<int> counts(5, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[buffer.sample_index(rng)];
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - draws / 5.0) * (c - draws / 5.0) / (draws / 5.0);
  EXPECT_LT(chi2, 13.28);  // chi-square, 4 degrees of freedom, p = 0.01
}

TEST(ReplayBuffer, OverwritesOldestWhenFull) {
  ReplayBuffer buffer(3);
  for (int i = 0; i < 5; ++i) buffer.push({{0.0}, i, 0.0, {0.0}});
  ASSERT_EQ(buffer.size(), 3u);
  std::vector<int> kept;
  for (std::size_t i = 0; i < buffer.size(); ++i) kept.push_back(buffer[i].action);
  std::sort(kept.begin(), kept.end());
  EXPECT_EQ(kept, (std::vector<int>{2, 3, 4}));
  EXPECT_THROW(ReplayBuffer(0), InvalidParameter);
}

TEST(EpsilonSchedule, LinearThenFlat) {
  const AgentConfig c;
  EXPECT_DOUBLE_EQ(epsilon_at(c, 0), 1.0);
  EXPECT_DOUBLE_EQ(epsilon_at(c, 10), 0.525);
  EXPECT_DOUBLE_EQ(epsilon_at(c, 20), 0.05);
  EXPECT_DOUBLE_EQ(epsilon_at(c, 59), 0.05);
  for (int e = 1; e < 60; ++e) EXPECT_LE(epsilon_at(c, e), epsilon_at(c, e - 1));
  EXPECT_GT(epsilon_at(c, 19), 0.05);
}

TEST(Checkpoint, RoundTripIsBitIdentical) {
  const auto tables = small_ba_tables();
  SimConfig sc;
  sc.strategy = Strategy::HD;
  sc.rate = 2.0;
  Simulator sim(tables, select_rl_nodes(*tables->network, 3), sc);
  auto agents = make_agents(sim, AgentConfig{}, 9);
  for (int i = 0; i < 30; ++i) run_interval(sim, agents, 0.5, true);
  std::stringstream buf;
  save_checkpoint(agents, buf);
  const auto nets = load_checkpoint(buf);
  ASSERT_EQ(nets.size(), agents.size());
  Rng rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t a = 0; a < nets.size(); ++a) {
    EXPECT_TRUE(nets[a] == agents[a].online());
    for (int i = 0; i < 20; ++i) {
      const std::vector<double> x{unit(rng)};
      EXPECT_EQ(nets[a].forward(x), agents[a].online().forward(x));
    }
  }
}

TEST(Checkpoint, RejectsForeignOrFutureFiles) {
  std::istringstream junk("hello world\n");
  EXPECT_THROW(load_checkpoint(junk), ParseError);
  std::stringstream buf;
  std::vector<DqnAgent> none;
  save_checkpoint(none, buf);
  std::string text = buf.str();
  const auto v = text.find(" v");
  ASSERT_NE(v, std::string::npos);
  text.replace(v, 3, " v9");
  std::istringstream future(text);
  EXPECT_THROW(load_checkpoint(future), ParseError);
  std::stringstream truncated;
  DqnAgent one(1, 7, AgentConfig{}, 1);
  save_checkpoint(std::span<const DqnAgent>(&one, 1), truncated);
  std::istringstream cut(truncated.str().substr(0, truncated.str().size() / 2));
  EXPECT_THROW(load_checkpoint(cut), ParseError);
}

TEST(Agents, IndependentStreamsAndOrderFree) {
  const auto tables = small_ba_tables();
  SimConfig sc;
  sc.strategy = Strategy::HD;
  Simulator sim(tables, select_rl_nodes(*tables->network, 2), sc);
  const auto agents = make_agents(sim, AgentConfig{}, 1);
  ASSERT_EQ(agents.size(), 2u);
  EXPECT_FALSE(agents[0].online() == agents[1].online());

  // Updating agent B first or second leaves agent A's trajectory unchanged.
  auto train = [](bool a_first) {
    DqnAgent a(1, 7, AgentConfig{}, 10), b(1, 7, AgentConfig{}, 11);
    for (int i = 0; i < 50; ++i) {
      const double s = (i % 10) / 10.0;
      Experience e{{s}, i % 7, -s, {s}};
      a.remember(e);
      b.remember(e);
      if (a_first) {
        a.train_step();
        b.train_step();
      } else {
        b.train_step();
        a.train_step();
      }
    }
    return a.online();
  };
  EXPECT_TRUE(train(true) == train(false));
}

TEST(Agents, ObservationIsNormalizedQueue) {
  const auto tables = small_ba_tables();
  SimConfig sc;
  sc.strategy = Strategy::HD;
  sc.rate = 20.0;
  Simulator sim(tables, select_rl_nodes(*tables->network, 4), sc);
  sim.run(50);
  for (int k = 0; k < 4; ++k) {
    const auto own = observe_state(sim, k, false);
    ASSERT_EQ(own.size(), 1u);
    EXPECT_DOUBLE_EQ(own[0], sim.queue_length(sim.rl_nodes().node(k)) / 40.0);
    const auto all = observe_state(sim, k, true);
    ASSERT_EQ(all.size(), 4u);
    for (double v : all) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Agents, RewardsStayInBounds) {
  const auto tables = small_ba_tables();
  SimConfig sc;
  sc.strategy = Strategy::HD;
  sc.rate = 15.0;
  Simulator sim(tables, select_rl_nodes(*tables->network, 5), sc);
  auto agents = make_agents(sim, AgentConfig{}, 2);
  for (int mi = 0; mi < 100; ++mi) {
    const auto out = run_interval(sim, agents, 0.5, true);
    for (double r : out.rewards) {
      EXPECT_GE(r, -2.0);
      EXPECT_LE(r, 0.0);
    }
  }
  for (const auto& a : agents)
    for (std::size_t i = 0; i < a.replay().size(); ++i) {
      EXPECT_GE(a.replay()[i].reward, -2.0);
      EXPECT_LE(a.replay()[i].reward, 0.0);
    }
}

TEST(Agents, ZeroRewardsUnderFullExplorationStayUniform) {
  const auto tables = small_ba_tables();
  SimConfig sc;
  sc.strategy = Strategy::HD;
  sc.rate = 2.0;
  Simulator sim(tables, select_rl_nodes(*tables->network, 5), sc);
  AgentConfig c;
  c.eps_start = c.eps_end = 1.0;
  auto agents = make_agents(sim, c, 3);
  TrainingOptions options;
  options.episodes = 10;
  options.zero_rewards = true;
  const auto log = episode_loop(sim, agents, options);
  const auto dist = action_distribution(log, 10);
  ASSERT_EQ(dist.size(), 5u);
  for (std::size_t b = 0; b < 7; ++b) {
    double pooled = 0.0;
    for (const auto& row : dist) pooled += row[b] / 5.0;
    EXPECT_NEAR(pooled, 1.0 / 7.0, 0.03);
  }
  for (const auto& rec : log.episodes)
    for (double r : rec.mean_reward) EXPECT_EQ(r, 0.0);
}

TEST(ActionDistribution, SingleEpisodeAlwaysBetaZero) {
  TrainingLog log;
  log.agent_nodes = {0};
  log.beta_set = default_beta_set();
  EpisodeRecord rec;
  rec.action_counts = {{50, 0, 0, 0, 0, 0, 0}};
  log.episodes.push_back(rec);
  const auto dist = action_distribution(log, 1);
  ASSERT_EQ(dist.size(), 1u);
  EXPECT_DOUBLE_EQ(dist[0][0], 1.0);
  for (std::size_t b = 1; b < 7; ++b) EXPECT_DOUBLE_EQ(dist[0][b], 0.0);
}

TEST(ActionDistribution, UsesOnlyTheLastEpisodes) {
  TrainingLog log;
  log.agent_nodes = {0};
  log.beta_set = default_beta_set();
  for (int e = 0; e < 3; ++e) {
    EpisodeRecord rec;
    rec.action_counts = {std::vector<long>(7, 0)};
    rec.action_counts[0][static_cast<std::size_t>(e)] = 10;
    log.episodes.push_back(rec);
  }
  const auto dist = action_distribution(log, 2);
  EXPECT_DOUBLE_EQ(dist[0][0], 0.0);
  EXPECT_DOUBLE_EQ(dist[0][1], 0.5);
  EXPECT_DOUBLE_EQ(dist[0][2], 0.5);
}
