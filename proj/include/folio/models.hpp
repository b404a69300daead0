#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "folio/market_data.hpp"
#include "folio/nn.hpp"
#include "folio/portfolio_env.hpp"

namespace folio {

/// Observation geometry shared by every model of one agent.
struct ModelShape {
  std::size_t assets = 0;
  std::size_t features = 0;
  std::size_t window = 0;

  static ModelShape of(const StateTensor& s) {
    return {s.num_assets(), s.num_features(), s.window_size()};
  }
  bool operator==(const ModelShape&) const = default;
};

struct NetworkSizes {
  std::size_t conv_channels = 4;
  std::size_t conv_kernel = 3;
  /// Output channels of the window-collapsing convolution, per asset.
  std::size_t feature_channels = 8;
  std::size_t hidden = 32;
  std::size_t transition_hidden = 16;
};

/// Window values minus one, channels-first: [asset][feature][window].
std::vector<double> encode_window(const StateTensor& s);
/// Window values minus one as a sequence: [window][asset * feature].
std::vector<double> encode_sequence(const StateTensor& s);

/// Per-asset convolution stack: conv(kernel) -> relu -> conv(rest of the
/// window) -> relu, producing assets * feature_channels features.
nn::Network make_encoder(const ModelShape& shape, const NetworkSizes& sizes);

/// State (+ optional held weights) -> one logit per asset.
class ActorModel {
 public:
  ActorModel() = default;
  ActorModel(const ModelShape& shape, const NetworkSizes& sizes,
             bool use_prev_weights, std::uint64_t seed);

  std::vector<double> logits(const StateTensor& s);
  void backward(std::span<const double> logits_grad);

  std::vector<nn::Tensor*> parameters();
  std::vector<const nn::Tensor*> parameters() const;
  void zero_grad();
  std::vector<double> flat_gradients() const;
  std::vector<double> flat_parameters() const;
  void set_flat_gradients(std::span<const double> g);
  std::size_t parameter_count() const;

  nn::Network encoder;
  nn::Network head;
  bool use_prev_weights = true;
  ModelShape shape;
};

/// State (+ optional held weights) + auxiliary input -> scalar. The
/// auxiliary slot carries the action for Q, action and predicted next price
/// relatives for the model-based Q*, and nothing for a state value V.
class CriticModel {
 public:
  CriticModel() = default;
  CriticModel(const ModelShape& shape, const NetworkSizes& sizes,
              bool use_prev_weights, std::size_t aux_size, std::uint64_t seed);

  double forward(const StateTensor& s, std::span<const double> aux);
  /// Accumulates parameter gradients scaled by dq; returns d/d aux.
  std::vector<double> backward(double dq);

  std::vector<nn::Tensor*> parameters();
  std::vector<const nn::Tensor*> parameters() const;
  void zero_grad();
  std::vector<double> flat_gradients() const;
  std::size_t parameter_count() const;

  nn::Network encoder;
  nn::Network head;
  bool use_prev_weights = true;
  std::size_t aux_size = 0;
  ModelShape shape;
};

/// Recurrent next-day predictor: window sequence -> next close price
/// relatives, one per asset (1 + network output).
class TransitionModel {
 public:
  TransitionModel() = default;
  TransitionModel(const ModelShape& shape, const NetworkSizes& sizes,
                  std::uint64_t seed);

  std::vector<double> predict(const StateTensor& s);
  void backward(std::span<const double> prediction_grad);

  std::vector<nn::Tensor*> parameters() { return net.parameters(); }
  void zero_grad() { net.zero_grad(); }

  nn::Network net;
  ModelShape shape;
};

/// Close price relatives for day t+1 read back from the observation at t+1:
/// 1 / (close_t / close_{t+1}). Needs window >= 2.
std::vector<double> next_price_relatives(const StateTensor& next_state);

/// Fixed-capacity ring of transitions with seeded uniform sampling without
/// replacement.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::uint64_t seed);

  void push(EpisodeStep step);
  std::vector<EpisodeStep> sample(std::size_t n);

  std::size_t size() const { return steps_.size(); }
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<EpisodeStep> steps_;
  std::mt19937_64 rng_;
};

/// Saves / restores a pair of networks as `<dir>/<name>_encoder.*` and
/// `<dir>/<name>_head.*`.
void save_pair(const nn::Network& encoder, const nn::Network& head,
               const std::filesystem::path& dir, const std::string& name);
void load_pair(nn::Network& encoder, nn::Network& head,
               const std::filesystem::path& dir, const std::string& name);

}  // namespace folio
