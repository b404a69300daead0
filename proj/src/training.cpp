#include "folio/training.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <random>

#include "folio/error.hpp"

namespace folio {

namespace {

std::size_t pick_start(const PortfolioEnv& env, std::size_t length,
                       std::mt19937_64& rng) {
  const std::size_t lo = env.min_start();
  if (env.last_day() <= lo) {
    throw DataError("training series too short for window " +
                    std::to_string(env.config().window_size));
  }
  if (length == 0 || env.last_day() < lo + length) return lo;
  std::uniform_int_distribution<std::size_t> dist(lo, env.last_day() - length);
  return dist(rng);
}

double annealed_sigma(const TrainConfig& c, std::size_t episode) {
  if (c.episodes <= 1) return c.noise_sigma;
  const double f = static_cast<double>(episode) / static_cast<double>(c.episodes - 1);
  return c.noise_sigma + (c.noise_sigma_final - c.noise_sigma) * f;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

PortfolioWeights initial_portfolio(const std::string& name, std::size_t assets) {
  if (name == "cash") return PortfolioWeights::cash_only(assets);
  if (name == "uniform") return PortfolioWeights::uniform(assets);
  throw ConfigError("initial_weights must be 'cash' or 'uniform', got '" + name + "'");
}

std::vector<EpisodeLog> train_ddpg(DdpgAgent& agent, PortfolioEnv& env,
                                   const TrainConfig& config,
                                   const EpisodeCallback& on_episode) {
  const auto& ac = agent.config();
  ReplayBuffer replay(ac.replay_capacity, ac.seed ^ 0x7265706cULL);
  std::mt19937_64 start_rng(config.seed ^ 0x73746172ULL);
  auto* gdpg = dynamic_cast<GdpgAgent*>(&agent);
  const auto w0 = initial_portfolio(config.initial_weights, env.series().num_assets());
  const std::size_t warmup = std::max(config.warmup_steps, ac.batch_size);

  std::vector<EpisodeLog> logs;
  for (std::size_t ep = 0; ep < config.episodes; ++ep) {
    agent.set_noise_sigma(annealed_sigma(config, ep));
    auto state = env.reset(pick_start(env, config.episode_length, start_rng), w0);
    EpisodeLog log;
    log.episode = ep;
    if (gdpg != nullptr) log.model_loss = 0.0;
    std::size_t updates = 0;
    double reward_sum = 0.0;
    while (!env.done() &&
           (config.episode_length == 0 || log.steps < config.episode_length)) {
      auto step = env.step(agent.act(state, true));
      reward_sum += step.reward;
      state = step.next_state;
      replay.push(std::move(step));
      ++log.steps;
      if (replay.size() < warmup) continue;
      for (std::size_t u = 0; u < config.updates_per_step; ++u) {
        const auto batch = replay.sample(ac.batch_size);
        const auto s = agent.learn(batch);
        log.critic_loss += s.critic_loss;
        log.actor_grad_norm += s.actor_grad_norm;
        if (log.model_loss) *log.model_loss += s.model_loss;
        ++updates;
      }
    }
    if (log.steps > 0) log.mean_reward = reward_sum / static_cast<double>(log.steps);
    if (updates > 0) {
      const double u = static_cast<double>(updates);
      log.critic_loss /= u;
      log.actor_grad_norm /= u;
      if (log.model_loss) *log.model_loss /= u;
    }
    logs.push_back(log);
    if (on_episode) on_episode(log);
  }
  return logs;
}

std::vector<EpisodeLog> train_ppo(PpoAgent& agent, PortfolioEnv& env,
                                  const TrainConfig& config,
                                  const EpisodeCallback& on_episode) {
  std::mt19937_64 start_rng(config.seed ^ 0x73746172ULL);
  const auto w0 = initial_portfolio(config.initial_weights, env.series().num_assets());
  std::vector<EpisodeLog> logs;
  for (std::size_t ep = 0; ep < config.episodes; ++ep) {
    auto state = env.reset(pick_start(env, config.episode_length, start_rng), w0);
    std::vector<PpoSample> traj;
    double reward_sum = 0.0;
    while (!env.done() &&
           (config.episode_length == 0 || traj.size() < config.episode_length)) {
      auto smp = agent.sample(state);
      auto step = env.step(smp.step.action);
      reward_sum += step.reward;
      state = step.next_state;
      smp.step = std::move(step);
      traj.push_back(std::move(smp));
    }
    // The episode horizon is treated as terminal.
    traj.back().step.done = true;
    const auto stats = agent.update(traj, agent.config().ppo_epochs);
    EpisodeLog log;
    log.episode = ep;
    log.steps = traj.size();
    log.mean_reward = reward_sum / static_cast<double>(traj.size());
    log.actor_grad_norm = stats.policy_grad_norm;
    log.critic_loss = stats.value_loss;
    logs.push_back(log);
    if (on_episode) on_episode(log);
  }
  return logs;
}

EvaluationResult evaluate_policy(Policy& policy, PortfolioEnv& env,
                                 std::size_t start, std::size_t length,
                                 const PortfolioWeights& initial) {
  auto state = env.reset(start, initial);
  EvaluationResult r;
  r.mean_weights.assign(initial.size(), 0.0);
  while (!env.done() && (length == 0 || r.steps < length)) {
    const auto a = policy.decide(state, env.series());
    for (std::size_t j = 0; j < a.size(); ++j) r.mean_weights[j] += a[j];
    state = env.step(a).next_state;
    ++r.steps;
  }
  if (r.steps > 0) {
    for (auto& w : r.mean_weights) w /= static_cast<double>(r.steps);
  }
  r.final_wealth = env.wealth();
  return r;
}

void write_training_log(std::ostream& out, const std::vector<EpisodeLog>& logs) {
  const bool model = !logs.empty() && logs.front().model_loss.has_value();
  out << "episode,steps,mean_reward,actor_grad_norm,critic_loss";
  if (model) out << ",model_loss";
  out << "\n";
  for (const auto& l : logs) {
    out << l.episode << ',' << l.steps << ',' << fmt(l.mean_reward) << ','
        << fmt(l.actor_grad_norm) << ',' << fmt(l.critic_loss);
    if (model) out << ',' << fmt(l.model_loss.value_or(0.0));
    out << "\n";
  }
}

}  // namespace folio
