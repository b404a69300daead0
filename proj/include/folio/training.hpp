#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "folio/agents.hpp"
#include "folio/portfolio_env.hpp"

namespace folio {

struct TrainConfig {
  std::size_t episodes = 50;
  /// Steps per episode; 0 runs every episode through the last day.
  std::size_t episode_length = 0;
  /// Exploration noise is annealed linearly from `noise_sigma` on the first
  /// episode to `noise_sigma_final` on the last.
  double noise_sigma = 0.1;
  double noise_sigma_final = 0.0;
  std::size_t updates_per_step = 1;
  /// Replay size required before learning starts (at least one batch).
  std::size_t warmup_steps = 0;
  /// "cash" or "uniform".
  std::string initial_weights = "cash";
  std::uint64_t seed = 0;
};

/// One row of the training log.
struct EpisodeLog {
  std::size_t episode = 0;
  std::size_t steps = 0;
  double mean_reward = 0.0;
  double actor_grad_norm = 0.0;
  /// TD loss for DDPG/GDPG, value loss for PPO.
  double critic_loss = 0.0;
  std::optional<double> model_loss;
};

using EpisodeCallback = std::function<void(const EpisodeLog&)>;

PortfolioWeights initial_portfolio(const std::string& name, std::size_t assets);

/// Trains DDPG or GDPG (dispatching on the dynamic type) from replay.
std::vector<EpisodeLog> train_ddpg(DdpgAgent& agent, PortfolioEnv& env,
                                   const TrainConfig& config,
                                   const EpisodeCallback& on_episode = {});

/// On-policy PPO: one trajectory per episode, `ppo_epochs` passes over it.
std::vector<EpisodeLog> train_ppo(PpoAgent& agent, PortfolioEnv& env,
                                  const TrainConfig& config,
                                  const EpisodeCallback& on_episode = {});

struct EvaluationResult {
  std::size_t steps = 0;
  double final_wealth = 1.0;
  /// Mean over steps of each action component.
  std::vector<double> mean_weights;
};

/// Deterministic rollout of `policy` from `start` for `length` steps (0 means
/// through the last day).
EvaluationResult evaluate_policy(Policy& policy, PortfolioEnv& env,
                                 std::size_t start, std::size_t length,
                                 const PortfolioWeights& initial);

/// `episode,steps,mean_reward,actor_grad_norm,critic_loss[,model_loss]`.
void write_training_log(std::ostream& out, const std::vector<EpisodeLog>& logs);

}  // namespace folio
