#include "folio/agents.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "folio/error.hpp"

namespace folio {

namespace {

constexpr std::uint64_t kPpoStream = 0x5050'4f00ULL;
constexpr std::uint64_t kModelStream = 0x4744'5047ULL;

void require_batch(std::span<const EpisodeStep> batch, const char* what) {
  if (batch.empty()) throw std::invalid_argument(std::string(what) + ": empty batch");
}

void require_finite(double v, const std::string& what) {
  if (!std::isfinite(v)) throw NumericalError(what + " is not finite");
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> with_prediction(std::span<const double> action,
                                    std::span<const double> y_hat) {
  std::vector<double> aux(action.begin(), action.end());
  aux.insert(aux.end(), y_hat.begin(), y_hat.end());
  return aux;
}

void write_agent_json(const std::filesystem::path& dir, const std::string& name,
                      const ModelShape& shape, nlohmann::json extra) {
  extra["agent"] = name;
  extra["assets"] = shape.assets;
  extra["features"] = shape.features;
  extra["window"] = shape.window;
  std::ofstream out(dir / "agent.json");
  out << extra.dump(2) << "\n";
  if (!out) throw DataError("cannot write " + (dir / "agent.json").string());
}

nlohmann::json read_agent_json(const std::filesystem::path& dir,
                               const std::string& name, const ModelShape& shape) {
  std::ifstream in(dir / "agent.json");
  if (!in) throw DataError("missing " + (dir / "agent.json").string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed agent.json: " + std::string(e.what()));
  }
  if (j.value("agent", "") != name) {
    throw DataError("checkpoint holds agent '" + j.value("agent", "") +
                    "', expected '" + name + "'");
  }
  ModelShape saved{j.value("assets", std::size_t{0}),
                   j.value("features", std::size_t{0}),
                   j.value("window", std::size_t{0})};
  if (saved != shape) {
    throw DataError("checkpoint observation shape does not match the data");
  }
  return j;
}

double gaussian_log_prob(std::span<const double> mean,
                         std::span<const double> log_std,
                         std::span<const double> z) {
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double lp = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double u = (z[j] - mean[j]) / std::exp(log_std[j]);
    lp += -0.5 * u * u - log_std[j] - half_log_2pi;
  }
  return lp;
}

}  // namespace

// ---------------------------------------------------------------- DDPG

DdpgAgent::DdpgAgent(const ModelShape& shape, const AgentConfig& config)
    : actor(shape, config.sizes, config.use_prev_weights, config.seed),
      critic(shape, config.sizes, config.use_prev_weights, shape.assets,
             config.seed),
      target_actor(actor),
      target_critic(critic),
      shape_(shape),
      config_(config),
      actor_opt_({.learning_rate = config.actor_lr}),
      critic_opt_({.learning_rate = config.critic_lr}),
      noise_rng_(config.seed ^ 0x6e6f697365ULL),
      sigma_(config.noise_sigma) {
  if (!(config.gamma >= 0.0 && config.gamma <= 1.0)) {
    throw ConfigError("gamma must lie in [0, 1]");
  }
  if (!(config.tau >= 0.0 && config.tau <= 1.0)) {
    throw ConfigError("tau must lie in [0, 1]");
  }
  if (config.noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");
}

PortfolioWeights DdpgAgent::act(const StateTensor& s, bool explore) {
  auto z = actor.logits(s);
  if (explore && sigma_ > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma_);
    for (auto& v : z) v += noise(noise_rng_);
  }
  return nn::softmax_head(z);
}

std::vector<double> DdpgAgent::td_targets(std::span<const EpisodeStep> batch) {
  std::vector<double> y(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& st = batch[i];
    y[i] = config_.reward_scale * st.reward;
    if (!st.done && config_.gamma != 0.0) {
      const auto a_next = nn::softmax(target_actor.logits(st.next_state));
      y[i] += config_.gamma * target_critic.forward(st.next_state, a_next);
    }
  }
  return y;
}

double DdpgAgent::fit_critic(CriticModel& net, nn::Adam& opt,
                             std::span<const EpisodeStep> batch,
                             const std::vector<double>& targets,
                             bool with_pred) {
  net.zero_grad();
  const double n = static_cast<double>(batch.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& st = batch[i];
    double q;
    if (with_pred) {
      q = net.forward(st.state, with_prediction(st.action.values(),
                                                model_->predict(st.state)));
    } else {
      q = net.forward(st.state, st.action.values());
    }
    const double d = q - targets[i];
    loss += d * d;
    net.backward(2.0 * d / n);
  }
  loss /= n;
  require_finite(loss, "critic TD loss");
  auto params = net.parameters();
  opt.step(params);
  return loss;
}

double DdpgAgent::critic_update(std::span<const EpisodeStep> batch) {
  require_batch(batch, "critic_update");
  return fit_critic(critic, critic_opt_, batch, td_targets(batch), false);
}

std::vector<double> DdpgAgent::mixed_actor_gradient(
    std::span<const EpisodeStep> batch, double w_q, double w_star) {
  require_batch(batch, "actor update");
  if (w_star != 0.0 && (model_ == nullptr || aug_critic_ == nullptr)) {
    throw std::logic_error("augmented critic requested without a model");
  }
  const double n = static_cast<double>(batch.size());
  actor.zero_grad();
  for (const auto& st : batch) {
    const auto z = actor.logits(st.state);
    const auto w = nn::softmax(z);
    std::vector<double> dw(w.size(), 0.0);
    if (w_q != 0.0) {
      critic.forward(st.state, w);
      const auto g = critic.backward(1.0);
      for (std::size_t j = 0; j < dw.size(); ++j) dw[j] += w_q * g[j];
    }
    if (w_star != 0.0) {
      aug_critic_->forward(st.state, with_prediction(w, model_->predict(st.state)));
      const auto g = aug_critic_->backward(1.0);
      for (std::size_t j = 0; j < dw.size(); ++j) dw[j] += w_star * g[j];
    }
    // Ascent on Q is descent on -Q.
    for (auto& v : dw) v = -v / n;
    actor.backward(nn::softmax_backward(w, dw));
  }
  // The critics only served as differentiable functions of the action.
  critic.zero_grad();
  if (aug_critic_ != nullptr) aug_critic_->zero_grad();
  return actor.flat_gradients();
}

std::vector<double> DdpgAgent::actor_gradient(std::span<const EpisodeStep> batch) {
  return mixed_actor_gradient(batch, 1.0, 0.0);
}

double DdpgAgent::apply_actor_gradient(const std::vector<double>& grad) {
  const double norm = l2_norm(grad);
  require_finite(norm, "actor gradient");
  actor.set_flat_gradients(grad);
  auto params = actor.parameters();
  actor_opt_.step(params);
  return norm;
}

double DdpgAgent::actor_update(std::span<const EpisodeStep> batch) {
  return apply_actor_gradient(actor_gradient(batch));
}

void DdpgAgent::update_targets() {
  nn::soft_update(actor.encoder, target_actor.encoder, config_.tau);
  nn::soft_update(actor.head, target_actor.head, config_.tau);
  nn::soft_update(critic.encoder, target_critic.encoder, config_.tau);
  nn::soft_update(critic.head, target_critic.head, config_.tau);
}

UpdateStats DdpgAgent::learn(std::span<const EpisodeStep> batch) {
  UpdateStats s;
  s.critic_loss = critic_update(batch);
  s.actor_grad_norm = actor_update(batch);
  update_targets();
  return s;
}

void DdpgAgent::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  save_pair(actor.encoder, actor.head, dir, "actor");
  save_pair(critic.encoder, critic.head, dir, "critic");
  save_pair(target_actor.encoder, target_actor.head, dir, "target_actor");
  save_pair(target_critic.encoder, target_critic.head, dir, "target_critic");
  write_agent_json(dir, name(), shape_, {{"use_prev_weights", config_.use_prev_weights}});
}

void DdpgAgent::load(const std::filesystem::path& dir) {
  read_agent_json(dir, name(), shape_);
  load_pair(actor.encoder, actor.head, dir, "actor");
  load_pair(critic.encoder, critic.head, dir, "critic");
  load_pair(target_actor.encoder, target_actor.head, dir, "target_actor");
  load_pair(target_critic.encoder, target_critic.head, dir, "target_critic");
}

// ---------------------------------------------------------------- GDPG

GdpgAgent::GdpgAgent(const ModelShape& shape, const AgentConfig& config)
    : DdpgAgent(shape, config),
      transition(shape, config.sizes, config.seed ^ kModelStream),
      augmented_critic(shape, config.sizes, config.use_prev_weights,
                       2 * shape.assets, config.seed ^ kModelStream),
      target_augmented_critic(augmented_critic),
      model_opt_({.learning_rate = config.model_lr}),
      aug_critic_opt_({.learning_rate = config.critic_lr}),
      alpha_(config.gdpg_alpha) {
  set_alpha(config.gdpg_alpha);
  model_ = &transition;
  aug_critic_ = &augmented_critic;
}

void GdpgAgent::set_alpha(double a) {
  if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("gdpg_alpha must lie in [0, 1]");
  alpha_ = a;
}

std::vector<double> GdpgAgent::gdpg_actor_gradient(
    std::span<const EpisodeStep> batch, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in [0, 1]");
  }
  return mixed_actor_gradient(batch, alpha, 1.0 - alpha);
}

double GdpgAgent::gdpg_actor_update(std::span<const EpisodeStep> batch) {
  return apply_actor_gradient(gdpg_actor_gradient(batch, alpha_));
}

double GdpgAgent::transition_model_update(std::span<const EpisodeStep> batch) {
  require_batch(batch, "transition_model_update");
  std::size_t used = 0;
  for (const auto& st : batch) used += st.done ? 0 : 1;
  if (used == 0) return 0.0;

  transition.zero_grad();
  const double scale = 1.0 / static_cast<double>(used * shape_.assets);
  double loss = 0.0;
  for (const auto& st : batch) {
    // A terminal next_state repeats the state and carries no transition.
    if (st.done) continue;
    const auto pred = transition.predict(st.state);
    const auto target = next_price_relatives(st.next_state);
    std::vector<double> grad(pred.size());
    for (std::size_t j = 0; j < pred.size(); ++j) {
      const double d = pred[j] - target[j];
      loss += d * d * scale;
      grad[j] = 2.0 * d * scale;
    }
    transition.backward(grad);
  }
  require_finite(loss, "transition model loss");
  auto params = transition.parameters();
  model_opt_.step(params);
  return loss;
}

double GdpgAgent::augmented_critic_update(std::span<const EpisodeStep> batch) {
  require_batch(batch, "augmented_critic_update");
  return fit_critic(augmented_critic, aug_critic_opt_, batch, td_targets(batch),
                    true);
}

double GdpgAgent::dual_ascent_step(std::span<const EpisodeStep> batch) {
  require_batch(batch, "dual_ascent_step");
  double j = 0.0, j_star = 0.0;
  for (const auto& st : batch) {
    const auto w = nn::softmax(actor.logits(st.state));
    j += critic.forward(st.state, w);
    j_star += augmented_critic.forward(
        st.state, with_prediction(w, transition.predict(st.state)));
  }
  const double n = static_cast<double>(batch.size());
  const double gap = (j - j_star) / n;
  require_finite(gap, "dual ascent gap");
  alpha_ = std::clamp(alpha_ - config_.gdpg_alpha_lr * gap, 0.0, 1.0);
  return alpha_;
}

UpdateStats GdpgAgent::learn(std::span<const EpisodeStep> batch) {
  UpdateStats s;
  s.model_loss = transition_model_update(batch);
  const auto targets = td_targets(batch);
  s.critic_loss = fit_critic(critic, critic_opt_, batch, targets, false);
  fit_critic(augmented_critic, aug_critic_opt_, batch, targets, true);
  s.actor_grad_norm = gdpg_actor_update(batch);
  if (config_.gdpg_dual_ascent) dual_ascent_step(batch);
  update_targets();
  nn::soft_update(augmented_critic.encoder, target_augmented_critic.encoder,
                  config_.tau);
  nn::soft_update(augmented_critic.head, target_augmented_critic.head,
                  config_.tau);
  return s;
}

void GdpgAgent::save(const std::filesystem::path& dir) const {
  DdpgAgent::save(dir);
  save_pair(augmented_critic.encoder, augmented_critic.head, dir, "augmented_critic");
  save_pair(target_augmented_critic.encoder, target_augmented_critic.head, dir,
            "target_augmented_critic");
  nn::save_checkpoint(transition.net, dir / "transition");
  write_agent_json(dir, name(), shape_,
                   {{"use_prev_weights", config_.use_prev_weights}, {"alpha", alpha_}});
}

void GdpgAgent::load(const std::filesystem::path& dir) {
  const auto meta = read_agent_json(dir, name(), shape_);
  load_pair(actor.encoder, actor.head, dir, "actor");
  load_pair(critic.encoder, critic.head, dir, "critic");
  load_pair(target_actor.encoder, target_actor.head, dir, "target_actor");
  load_pair(target_critic.encoder, target_critic.head, dir, "target_critic");
  load_pair(augmented_critic.encoder, augmented_critic.head, dir, "augmented_critic");
  load_pair(target_augmented_critic.encoder, target_augmented_critic.head, dir,
            "target_augmented_critic");
  auto net = nn::load_checkpoint(dir / "transition");
  if (net.describe() != transition.net.describe()) {
    throw DataError("transition checkpoint architecture does not match");
  }
  transition.net = std::move(net);
  set_alpha(meta.value("alpha", alpha_));
}

// ---------------------------------------------------------------- PPO

double clipped_surrogate(double ratio, double advantage, double eps) {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return std::min(ratio * advantage, clipped * advantage);
}

std::vector<double> discounted_returns(std::span<const double> rewards,
                                       double gamma, bool include_current) {
  const std::size_t n = rewards.size();
  std::vector<double> g(n, 0.0);
  if (n == 0) return g;
  if (include_current) {
    double acc = 0.0;
    for (std::size_t i = n; i-- > 0;) {
      acc = rewards[i] + gamma * acc;
      g[i] = acc;
    }
  } else {
    for (std::size_t i = n - 1; i-- > 0;) {
      g[i] = gamma * (rewards[i + 1] + g[i + 1]);
    }
  }
  return g;
}

PpoAgent::PpoAgent(const ModelShape& shape, const AgentConfig& config)
    : policy(shape, config.sizes, config.ppo_use_prev_weights,
             config.seed ^ kPpoStream),
      log_std({shape.assets},
              std::vector<double>(shape.assets, config.ppo_init_log_std)),
      value(shape, config.sizes, config.ppo_use_prev_weights, 0,
            config.seed ^ kPpoStream),
      shape_(shape),
      config_(config),
      policy_opt_({.learning_rate = config.ppo_policy_lr}),
      value_opt_({.learning_rate = config.ppo_value_lr}),
      rng_(config.seed ^ 0x7070'6f5f'7361ULL) {
  if (!(config.ppo_clip > 0.0)) throw ConfigError("ppo_clip must be > 0");
  if (!std::isfinite(config.ppo_init_log_std)) {
    throw ConfigError("ppo_init_log_std must be finite");
  }
  if (config.ppo_epochs == 0) throw ConfigError("ppo_epochs must be >= 1");
}

std::vector<nn::Tensor*> PpoAgent::policy_parameters() {
  auto p = policy.parameters();
  p.push_back(&log_std);
  return p;
}

PortfolioWeights PpoAgent::act(const StateTensor& s, bool explore) {
  if (explore) return sample(s).step.action;
  return nn::softmax_head(policy.logits(s));
}

PpoSample PpoAgent::sample(const StateTensor& s) {
  const auto mean = policy.logits(s);
  PpoSample out;
  out.z.resize(mean.size());
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t j = 0; j < mean.size(); ++j) {
    out.z[j] = mean[j] + std::exp(log_std.data[j]) * normal(rng_);
  }
  out.old_log_prob = gaussian_log_prob(mean, log_std.data, out.z);
  out.step.state = s;
  out.step.action = nn::softmax_head(out.z);
  return out;
}

double PpoAgent::log_prob(const StateTensor& s, std::span<const double> z) {
  if (z.size() != shape_.assets) throw std::invalid_argument("log_prob: bad z length");
  return gaussian_log_prob(policy.logits(s), log_std.data, z);
}

PpoUpdateStats PpoAgent::update(std::vector<PpoSample>& trajectory,
                                std::size_t epochs) {
  if (trajectory.empty()) throw std::invalid_argument("ppo update: empty trajectory");
  if (!trajectory.back().step.done) {
    throw std::invalid_argument("ppo update: trajectory must end in a terminal step");
  }
  const std::size_t n = trajectory.size();
  std::vector<double> rewards(n);
  for (std::size_t i = 0; i < n; ++i) {
    rewards[i] = config_.reward_scale * trajectory[i].step.reward;
  }
  const auto returns = discounted_returns(rewards, config_.gamma,
                                          config_.ppo_include_current_reward);
  const std::vector<double> none;
  std::vector<double> adv(n);
  for (std::size_t i = 0; i < n; ++i) {
    adv[i] = returns[i] - value.forward(trajectory[i].step.state, none);
  }
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));
  for (auto& a : adv) a = sd > 1e-12 ? (a - mean) / sd : a - mean;

  PpoUpdateStats stats;
  const double eps = config_.ppo_clip;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    policy.zero_grad();
    log_std.zero_grad();
    std::size_t used = 0, skipped = 0;
    double surrogate = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& smp = trajectory[i];
      const auto m = policy.logits(smp.step.state);
      const double lp = gaussian_log_prob(m, log_std.data, smp.z);
      const double ratio = std::exp(lp - smp.old_log_prob);
      if (!std::isfinite(ratio)) {
        ++skipped;
        continue;
      }
      ++used;
      surrogate += clipped_surrogate(ratio, adv[i], eps);
      // The clipped branch is flat in theta whenever it is the minimum and
      // differs from the unclipped one.
      const bool unclipped = ratio * adv[i] <=
                             std::clamp(ratio, 1.0 - eps, 1.0 + eps) * adv[i];
      const double dlp = unclipped ? -ratio * adv[i] : 0.0;
      std::vector<double> dm(m.size());
      for (std::size_t j = 0; j < m.size(); ++j) {
        const double var_j = std::exp(2.0 * log_std.data[j]);
        const double u = smp.z[j] - m[j];
        dm[j] = dlp * u / var_j;
        log_std.grad[j] += dlp * (u * u / var_j - 1.0);
      }
      policy.backward(dm);
    }
    if (used == 0) {
      throw NumericalError("ppo update: every sample had a non-finite ratio");
    }
    const double inv = 1.0 / static_cast<double>(used);
    auto params = policy_parameters();
    double sq = 0.0;
    for (auto* t : params) {
      for (auto& g : t->grad) {
        g *= inv;
        sq += g * g;
      }
    }
    require_finite(sq, "ppo policy gradient");
    policy_opt_.step(params);
    for (auto& v : log_std.data) v = std::clamp(v, -5.0, 2.0);

    value.zero_grad();
    double vloss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = value.forward(trajectory[i].step.state, none) - returns[i];
      vloss += d * d;
      value.backward(2.0 * d / static_cast<double>(n));
    }
    vloss /= static_cast<double>(n);
    require_finite(vloss, "ppo value loss");
    auto vparams = value.parameters();
    value_opt_.step(vparams);

    stats.surrogate = surrogate * inv;
    stats.value_loss = vloss;
    stats.policy_grad_norm = std::sqrt(sq);
    stats.skipped += skipped;
  }
  return stats;
}

void PpoAgent::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  save_pair(policy.encoder, policy.head, dir, "policy");
  save_pair(value.encoder, value.head, dir, "value");
  const nn::Tensor* ls[] = {&log_std};
  nn::write_tensor_file(dir / "log_std.bin", ls);
  write_agent_json(dir, name(), shape_,
                   {{"use_prev_weights", config_.ppo_use_prev_weights}});
}

void PpoAgent::load(const std::filesystem::path& dir) {
  read_agent_json(dir, name(), shape_);
  load_pair(policy.encoder, policy.head, dir, "policy");
  load_pair(value.encoder, value.head, dir, "value");
  auto ts = nn::read_tensor_file(dir / "log_std.bin");
  if (ts.size() != 1 || ts[0].shape != log_std.shape) {
    throw DataError("log_std checkpoint has the wrong shape");
  }
  log_std.data = ts[0].data;
}

}  // namespace folio
