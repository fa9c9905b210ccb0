#include "hdrouting/agent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "hdrouting/errors.hpp"
#include "hdrouting/random.hpp"

namespace hdr {

double epsilon_at(const AgentConfig& config, int episode) {
  if (config.eps_decay_episodes <= 0 || episode >= config.eps_decay_episodes) return config.eps_end;
  const double frac = static_cast<double>(std::max(episode, 0)) / config.eps_decay_episodes;
  return config.eps_start + (config.eps_end - config.eps_start) * frac;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw InvalidParameter("replay capacity must be positive");
}

void ReplayBuffer::push(Experience e) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(e));
  } else {
    items_[next_] = std::move(e);
  }
  next_ = (next_ + 1) % capacity_;
}

std::size_t ReplayBuffer::sample_index(Rng& rng) const {
  if (items_.empty()) throw InvalidParameter("cannot sample an empty replay buffer");
  return std::uniform_int_distribution<std::size_t>(0, items_.size() - 1)(rng);
}

DqnAgent::DqnAgent(int state_size, int action_count, const AgentConfig& config, std::uint64_t seed)
    : config_(config), actions_(action_count), rng_(seed), replay_(config.replay_capacity) {
  if (!(config_.gamma >= 0.0 && config_.gamma < 1.0)) throw InvalidParameter("gamma must lie in [0, 1)");
  if (!(config_.learning_rate > 0.0)) throw InvalidParameter("learning rate must be positive");
  if (config_.batch_size < 1 || config_.target_sync < 1) throw InvalidParameter("batch size and target sync must be >= 1");
  if (!(config_.eps_start >= 0.0 && config_.eps_start <= 1.0 && config_.eps_end >= 0.0 && config_.eps_end <= 1.0))
    throw InvalidParameter("epsilon values must lie in [0, 1]");
  online_ = QNetwork({state_size, config_.hidden1, config_.hidden2, action_count}, rng_);
  target_ = online_;
  grad_.assign(online_.parameters().size(), 0.0);
  if (config_.optimizer == OptimizerKind::Adam) {
    adam_m_.assign(grad_.size(), 0.0);
    adam_v_.assign(grad_.size(), 0.0);
  }
}

int DqnAgent::act(std::span<const double> state, double epsilon) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng_) < epsilon) return std::uniform_int_distribution<int>(0, actions_ - 1)(rng_);
  const auto q = online_.forward(state);
  return static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
}

std::optional<double> DqnAgent::train_step() {
  if (replay_.size() < std::max<std::size_t>(config_.train_start, 1)) return std::nullopt;
  std::fill(grad_.begin(), grad_.end(), 0.0);
  const int batch = config_.batch_size;
  std::vector<double> out_grad(static_cast<std::size_t>(actions_), 0.0);
  double loss = 0.0;
  for (int i = 0; i < batch; ++i) {
    const Experience& e = replay_[replay_.sample_index(rng_)];
    double target = e.reward;
    if (config_.gamma > 0.0) {
      const auto next_q = target_.forward(e.next_state);
      target += config_.gamma * *std::max_element(next_q.begin(), next_q.end());
    }
    // Gradient of the mean squared error w.r.t. Q(s, a) only.
    const double q = online_.forward(e.state)[static_cast<std::size_t>(e.action)];
    const double err = q - target;
    loss += err * err;
    std::fill(out_grad.begin(), out_grad.end(), 0.0);
    out_grad[static_cast<std::size_t>(e.action)] = 2.0 * err / batch;
    online_.backward(e.state, out_grad, grad_);
  }
  auto params = online_.parameters();
  const double lr = config_.learning_rate;
  if (config_.optimizer == OptimizerKind::SGD) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad_[i];
  } else {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double t = static_cast<double>(updates_ + 1);
    const double c1 = 1.0 - std::pow(b1, t), c2 = 1.0 - std::pow(b2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
      adam_m_[i] = b1 * adam_m_[i] + (1.0 - b1) * grad_[i];
      adam_v_[i] = b2 * adam_v_[i] + (1.0 - b2) * grad_[i] * grad_[i];
      params[i] -= lr * (adam_m_[i] / c1) / (std::sqrt(adam_v_[i] / c2) + eps);
    }
  }
  ++updates_;
  if (updates_ % static_cast<std::size_t>(config_.target_sync) == 0) target_ = online_;
  return loss / batch;
}

std::vector<double> observe_state(const Simulator& sim, int agent, bool peer_queues) {
  const auto& rl = sim.rl_nodes();
  std::vector<double> state{sim.normalized_queue(rl.node(agent))};
  if (peer_queues) {
    for (int k = 0; k < rl.size(); ++k)
      if (k != agent) state.push_back(sim.normalized_queue(rl.node(k)));
  }
  return state;
}

std::vector<DqnAgent> make_agents(const Simulator& sim, const AgentConfig& config, std::uint64_t seed) {
  std::vector<DqnAgent> agents;
  const int k = sim.rl_nodes().size();
  const int state_size = config.peer_queues ? std::max(k, 1) : 1;
  const int actions = static_cast<int>(sim.tables().beta_set.size());
  for (int i = 0; i < k; ++i) {
    agents.emplace_back(state_size, actions, config, derive_seed(seed, static_cast<std::uint64_t>(i)));
  }
  return agents;
}

IntervalOutcome run_interval(Simulator& sim, std::vector<DqnAgent>& agents, double epsilon, bool learn,
                             bool zero_rewards) {
  const auto k = agents.size();
  if (static_cast<int>(k) != sim.rl_nodes().size()) throw InvalidParameter("one agent per RL node required");
  IntervalOutcome out;
  out.actions.resize(k);
  out.rewards.resize(k);
  std::vector<std::vector<double>> states(k);
  for (std::size_t i = 0; i < k; ++i) {
    const bool peers = agents[i].config().peer_queues;
    states[i] = observe_state(sim, static_cast<int>(i), peers);
    out.actions[i] = agents[i].act(states[i], epsilon);
    sim.set_action(static_cast<int>(i), out.actions[i]);
  }
  out.stats = sim.run_mi();
  for (std::size_t i = 0; i < k; ++i) {
    out.rewards[i] = zero_rewards ? 0.0 : out.stats[i].reward();
    if (!learn) continue;
    auto next = observe_state(sim, static_cast<int>(i), agents[i].config().peer_queues);
    agents[i].remember({std::move(states[i]), out.actions[i], out.rewards[i], std::move(next)});
    agents[i].train_step();
  }
  return out;
}

TrainingLog episode_loop(Simulator& sim, std::vector<DqnAgent>& agents, const TrainingOptions& options) {
  if (options.episodes < 0 || options.mis_per_episode < 1) throw InvalidParameter("invalid episode settings");
  TrainingLog log;
  log.agent_nodes = sim.rl_nodes().nodes();
  log.beta_set = sim.tables().beta_set;
  const auto k = agents.size();
  const auto nb = log.beta_set.size();
  const AgentConfig schedule = agents.empty() ? AgentConfig{} : agents.front().config();
  for (int e = 0; e < options.episodes; ++e) {
    sim.reset();
    EpisodeRecord rec;
    rec.episode = e;
    rec.epsilon = epsilon_at(schedule, e);
    rec.mean_reward.assign(k, 0.0);
    rec.action_counts.assign(k, std::vector<long>(nb, 0));
    for (int mi = 0; mi < options.mis_per_episode; ++mi) {
      const auto outcome = run_interval(sim, agents, rec.epsilon, options.learn, options.zero_rewards);
      for (std::size_t i = 0; i < k; ++i) {
        rec.mean_reward[i] += outcome.rewards[i];
        ++rec.action_counts[i][static_cast<std::size_t>(outcome.actions[i])];
      }
    }
    for (auto& r : rec.mean_reward) r /= options.mis_per_episode;
    const auto& c = sim.counters();
    rec.generated = c.generated;
    rec.delivered = c.delivered;
    rec.dropped = c.dropped();
    rec.decisions = c.bypass_decisions;
    rec.redirects = c.redirects_to_rl;
    rec.mean_travel_time = c.mean_travel_time();
    rec.travel_time_hist = c.travel_time_hist;
    log.episodes.push_back(std::move(rec));
    if (options.after_episode) options.after_episode(e, sim);
  }
  return log;
}

std::vector<std::vector<double>> action_distribution(const TrainingLog& log, int last_n) {
  if (last_n < 1 || static_cast<std::size_t>(last_n) > log.episodes.size())
    throw InvalidParameter("log covers " + std::to_string(log.episodes.size()) + " episodes, asked for the last " +
                           std::to_string(last_n));
  const auto k = log.agent_nodes.size();
  const auto nb = log.beta_set.size();
  std::vector<std::vector<double>> dist(k, std::vector<double>(nb, 0.0));
  for (auto e = log.episodes.size() - static_cast<std::size_t>(last_n); e < log.episodes.size(); ++e)
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t b = 0; b < nb; ++b) dist[i][b] += static_cast<double>(log.episodes[e].action_counts[i][b]);
  for (auto& row : dist) {
    double total = 0.0;
    for (double v : row) total += v;
    if (total > 0.0)
      for (double& v : row) v /= total;
  }
  return dist;
}

namespace {
constexpr const char* kCheckpointMagic = "hdrouting-qnet";
constexpr int kCheckpointVersion = 1;
}  // namespace

void save_checkpoint(std::span<const DqnAgent> agents, std::ostream& out) {
  out << kCheckpointMagic << " v" << kCheckpointVersion << '\n';
  out << "agents " << agents.size() << '\n';
  for (const auto& agent : agents) {
    const auto& net = agent.online();
    out << "layers " << net.layer_sizes().size();
    for (int s : net.layer_sizes()) out << ' ' << s;
    out << '\n' << std::hexfloat;
    const auto params = net.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) out << params[i] << (i + 1 == params.size() ? '\n' : ' ');
    out << std::defaultfloat;
  }
}

std::vector<QNetwork> load_checkpoint(std::istream& in) {
  std::string magic, version, word;
  if (!(in >> magic >> version) || magic != kCheckpointMagic)
    throw ParseError("not a Q-network checkpoint", 1);
  if (version != "v" + std::to_string(kCheckpointVersion))
    throw ParseError("unsupported checkpoint version '" + version + "'", 1);
  std::size_t count = 0;
  if (!(in >> word >> count) || word != "agents") throw ParseError("missing agent count", 2);
  std::vector<QNetwork> nets;
  for (std::size_t a = 0; a < count; ++a) {
    std::size_t layers = 0;
    if (!(in >> word >> layers) || word != "layers") throw ParseError("missing layer header for agent " + std::to_string(a), 0);
    std::vector<int> sizes(layers);
    for (auto& s : sizes)
      if (!(in >> s)) throw ParseError("bad layer size", 0);
    QNetwork net(sizes);
    for (double& p : net.parameters()) {
      // operator>> does not parse hexfloat reliably across libraries; strtod does.
      if (!(in >> word)) throw ParseError("truncated weights for agent " + std::to_string(a), 0);
      char* end = nullptr;
      p = std::strtod(word.c_str(), &end);
      if (end == word.c_str() || *end != '\0') throw ParseError("bad weight value '" + word + "'", 0);
    }
    nets.push_back(std::move(net));
  }
  return nets;
}

}  // namespace hdr
