#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "folio/market_data.hpp"
#include "folio/models.hpp"
#include "folio/nn.hpp"
#include "folio/portfolio_env.hpp"

namespace folio {

/// Anything that maps an observation to a portfolio at a decision close.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  /// Deterministic action used for evaluation and backtests.
  virtual PortfolioWeights decide(const StateTensor& s,
                                  const PriceSeries& series) = 0;
};

struct AgentConfig {
  double gamma = 0.99;
  double tau = 0.01;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double model_lr = 1e-3;
  /// Standard deviation of the Gaussian noise added to actor logits.
  double noise_sigma = 0.1;
  std::size_t batch_size = 64;
  std::size_t replay_capacity = 100000;
  /// Rewards are multiplied by this before entering any loss.
  double reward_scale = 1.0;
  bool use_prev_weights = true;
  NetworkSizes sizes;
  std::uint64_t seed = 0;

  double gdpg_alpha = 0.5;
  bool gdpg_dual_ascent = false;
  double gdpg_alpha_lr = 1e-3;

  double ppo_clip = 0.2;
  std::size_t ppo_epochs = 4;
  double ppo_policy_lr = 3e-4;
  double ppo_value_lr = 1e-3;
  double ppo_init_log_std = -0.5;
  bool ppo_use_prev_weights = false;
  bool ppo_include_current_reward = false;
};

/// Mean TD loss and the actor step size of one learning iteration.
struct UpdateStats {
  double critic_loss = 0.0;
  double actor_grad_norm = 0.0;
  double model_loss = 0.0;
};

class DdpgAgent : public Policy {
 public:
  DdpgAgent(const ModelShape& shape, const AgentConfig& config);

  std::string name() const override { return "ddpg"; }
  PortfolioWeights decide(const StateTensor& s, const PriceSeries&) override {
    return act(s, false);
  }

  /// softmax(actor logits + N(0, sigma^2)) when exploring, else
  /// softmax(actor logits).
  PortfolioWeights act(const StateTensor& s, bool explore);

  /// One Adam step on the squared TD error against
  /// r + gamma * Q'(s', mu'(s')); returns the mean squared error.
  double critic_update(std::span<const EpisodeStep> batch);
  /// Gradient of -(1/N) sum Q(s, mu(s)) with respect to the actor
  /// parameters, flattened; does not step.
  std::vector<double> actor_gradient(std::span<const EpisodeStep> batch);
  /// Steps the actor along actor_gradient; returns its Euclidean norm.
  double actor_update(std::span<const EpisodeStep> batch);
  void update_targets();

  /// Critic then actor then targets.
  virtual UpdateStats learn(std::span<const EpisodeStep> batch);

  virtual void save(const std::filesystem::path& dir) const;
  virtual void load(const std::filesystem::path& dir);

  double noise_sigma() const { return sigma_; }
  void set_noise_sigma(double sigma) { sigma_ = sigma; }
  const AgentConfig& config() const { return config_; }
  const ModelShape& shape() const { return shape_; }

  ActorModel actor;
  CriticModel critic;
  ActorModel target_actor;
  CriticModel target_critic;

 protected:
  /// Per-sample TD targets r + gamma * Q'(s', mu'(s')) (masked on done).
  std::vector<double> td_targets(std::span<const EpisodeStep> batch);
  /// Accumulates the actor gradient of
  /// -(1/N) sum [w_q Q(s, mu(s)) + w_star Q*(s, mu(s), y_hat(s))];
  /// a zero weight skips that critic entirely.
  std::vector<double> mixed_actor_gradient(std::span<const EpisodeStep> batch,
                                           double w_q, double w_star);
  double apply_actor_gradient(const std::vector<double>& grad);
  double fit_critic(CriticModel& critic, nn::Adam& opt,
                    std::span<const EpisodeStep> batch,
                    const std::vector<double>& targets, bool with_prediction);

  ModelShape shape_;
  AgentConfig config_;
  nn::Adam actor_opt_;
  nn::Adam critic_opt_;
  std::mt19937_64 noise_rng_;
  double sigma_;

  // Only populated by GdpgAgent.
  TransitionModel* model_ = nullptr;
  CriticModel* aug_critic_ = nullptr;
};

/// DDPG plus a learned next-price model and an augmented critic Q* that
/// also sees the model's prediction. The actor follows
/// (1 - alpha) * grad Q* + alpha * grad Q.
class GdpgAgent : public DdpgAgent {
 public:
  GdpgAgent(const ModelShape& shape, const AgentConfig& config);
  GdpgAgent(const GdpgAgent&) = delete;
  GdpgAgent& operator=(const GdpgAgent&) = delete;

  std::string name() const override { return "gdpg"; }

  std::vector<double> gdpg_actor_gradient(std::span<const EpisodeStep> batch,
                                          double alpha);
  std::vector<double> gdpg_actor_gradient(std::span<const EpisodeStep> batch) {
    return gdpg_actor_gradient(batch, alpha_);
  }
  double gdpg_actor_update(std::span<const EpisodeStep> batch);
  /// Squared error of predicted against realized next close relatives,
  /// averaged over assets and non-terminal samples.
  double transition_model_update(std::span<const EpisodeStep> batch);
  double augmented_critic_update(std::span<const EpisodeStep> batch);
  /// alpha <- clamp(alpha - lr * (J - J*), 0, 1) with J and J* the batch
  /// means of Q and Q* at the actor's action.
  double dual_ascent_step(std::span<const EpisodeStep> batch);

  UpdateStats learn(std::span<const EpisodeStep> batch) override;
  void save(const std::filesystem::path& dir) const override;
  void load(const std::filesystem::path& dir) override;

  double alpha() const { return alpha_; }
  void set_alpha(double a);

  TransitionModel transition;
  CriticModel augmented_critic;
  CriticModel target_augmented_critic;

 private:
  nn::Adam model_opt_;
  nn::Adam aug_critic_opt_;
  double alpha_;
};

/// min(r * A, clip(r, 1 - eps, 1 + eps) * A).
double clipped_surrogate(double ratio, double advantage, double eps);

/// G_t = sum_{t' > t} gamma^(t' - t) r_t', or from t' = t on when
/// `include_current`.
std::vector<double> discounted_returns(std::span<const double> rewards,
                                       double gamma, bool include_current);

struct PpoSample {
  EpisodeStep step;
  /// Sampled logits; the action is softmax(z).
  std::vector<double> z;
  double old_log_prob = 0.0;
};

struct PpoUpdateStats {
  double surrogate = 0.0;
  double value_loss = 0.0;
  double policy_grad_norm = 0.0;
  std::size_t skipped = 0;
};

class PpoAgent : public Policy {
 public:
  PpoAgent(const ModelShape& shape, const AgentConfig& config);

  std::string name() const override { return "ppo"; }
  PortfolioWeights decide(const StateTensor& s, const PriceSeries&) override {
    return act(s, false);
  }

  PortfolioWeights act(const StateTensor& s, bool explore);
  /// Draws z ~ N(mean(s), diag(exp(2 log_std))) and records log pi(z | s).
  PpoSample sample(const StateTensor& s);
  double log_prob(const StateTensor& s, std::span<const double> z);

  PpoUpdateStats update(std::vector<PpoSample>& trajectory, std::size_t epochs);

  void save(const std::filesystem::path& dir) const;
  void load(const std::filesystem::path& dir);

  const AgentConfig& config() const { return config_; }

  ActorModel policy;
  nn::Tensor log_std;
  CriticModel value;

 private:
  std::vector<nn::Tensor*> policy_parameters();

  ModelShape shape_;
  AgentConfig config_;
  nn::Adam policy_opt_;
  nn::Adam value_opt_;
  std::mt19937_64 rng_;
};

}  // namespace folio
