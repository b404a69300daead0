#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <nlohmann/json.hpp>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "folio/weights.hpp"

namespace folio::nn {

/// Dense row-major buffer with an optional gradient of the same shape.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;
  std::vector<double> grad;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  std::size_t size() const { return data.size(); }
  void zero_grad();
};

std::size_t shape_size(const std::vector<std::size_t>& shape);

using Rng = std::mt19937_64;

/// A differentiable map between flat buffers. Parameter gradients
/// accumulate into Tensor::grad until zeroed.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string kind() const = 0;
  virtual std::size_t input_size() const = 0;
  virtual std::size_t output_size() const = 0;

  virtual void forward(std::span<const double> in, std::span<double> out) = 0;
  /// `in` and `out` are the buffers of the matching forward call.
  virtual void backward(std::span<const double> in, std::span<const double> out,
                        std::span<const double> out_grad,
                        std::span<double> in_grad) = 0;

  virtual std::vector<Tensor*> parameters() { return {}; }
  /// Uniform in +-sqrt(6 / (fan_in + fan_out)); biases zero.
  virtual void initialize(Rng&) {}
  virtual std::unique_ptr<Layer> clone() const = 0;
  virtual nlohmann::json describe() const = 0;
};

/// y = W x + b, W is [out x in].
class Dense final : public Layer {
 public:
  Dense(std::size_t in, std::size_t out);

  std::string kind() const override { return "dense"; }
  std::size_t input_size() const override { return in_; }
  std::size_t output_size() const override { return out_; }
  void forward(std::span<const double> in, std::span<double> out) override;
  void backward(std::span<const double> in, std::span<const double> out,
                std::span<const double> out_grad,
                std::span<double> in_grad) override;
  std::vector<Tensor*> parameters() override { return {&weight, &bias}; }
  void initialize(Rng& rng) override;
  std::unique_ptr<Layer> clone() const override;
  nlohmann::json describe() const override;

  Tensor weight;
  Tensor bias;

 private:
  std::size_t in_, out_;
};

/// Valid 1-D convolution along the last axis with filters shared across
/// rows. Input [rows][in_channels][length], output
/// [rows][out_channels][length - kernel + 1]; weight is
/// [out_channels][in_channels][kernel].
class Conv1D final : public Layer {
 public:
  Conv1D(std::size_t rows, std::size_t in_channels, std::size_t out_channels,
         std::size_t length, std::size_t kernel);

  std::string kind() const override { return "conv1d"; }
  std::size_t input_size() const override { return rows_ * cin_ * len_; }
  std::size_t output_size() const override { return rows_ * cout_ * out_len(); }
  std::size_t out_len() const { return len_ - k_ + 1; }
  void forward(std::span<const double> in, std::span<double> out) override;
  void backward(std::span<const double> in, std::span<const double> out,
                std::span<const double> out_grad,
                std::span<double> in_grad) override;
  std::vector<Tensor*> parameters() override { return {&weight, &bias}; }
  void initialize(Rng& rng) override;
  std::unique_ptr<Layer> clone() const override;
  nlohmann::json describe() const override;

  Tensor weight;
  Tensor bias;

 private:
  std::size_t rows_, cin_, cout_, len_, k_;
};

/// Elman recurrence h_t = tanh(Wx x_t + Wh h_{t-1} + b), h_0 = 0, over an
/// input [steps][input_size]. Emits the final hidden state.
class SimpleRnn final : public Layer {
 public:
  SimpleRnn(std::size_t steps, std::size_t input_size, std::size_t hidden);

  std::string kind() const override { return "rnn"; }
  std::size_t input_size() const override { return steps_ * in_; }
  std::size_t output_size() const override { return hidden_; }
  void forward(std::span<const double> in, std::span<double> out) override;
  void backward(std::span<const double> in, std::span<const double> out,
                std::span<const double> out_grad,
                std::span<double> in_grad) override;
  std::vector<Tensor*> parameters() override {
    return {&w_input, &w_hidden, &bias};
  }
  void initialize(Rng& rng) override;
  std::unique_ptr<Layer> clone() const override;
  nlohmann::json describe() const override;

  Tensor w_input;   // [hidden][input]
  Tensor w_hidden;  // [hidden][hidden]
  Tensor bias;      // [hidden]

 private:
  std::size_t steps_, in_, hidden_;
  std::vector<double> states_;  // [steps][hidden], cached by forward
};

class Relu final : public Layer {
 public:
  explicit Relu(std::size_t size) : size_(size) {}
  std::string kind() const override { return "relu"; }
  std::size_t input_size() const override { return size_; }
  std::size_t output_size() const override { return size_; }
  void forward(std::span<const double> in, std::span<double> out) override;
  void backward(std::span<const double> in, std::span<const double> out,
                std::span<const double> out_grad,
                std::span<double> in_grad) override;
  std::unique_ptr<Layer> clone() const override;
  nlohmann::json describe() const override;

 private:
  std::size_t size_;
};

class Tanh final : public Layer {
 public:
  explicit Tanh(std::size_t size) : size_(size) {}
  std::string kind() const override { return "tanh"; }
  std::size_t input_size() const override { return size_; }
  std::size_t output_size() const override { return size_; }
  void forward(std::span<const double> in, std::span<double> out) override;
  void backward(std::span<const double> in, std::span<const double> out,
                std::span<const double> out_grad,
                std::span<double> in_grad) override;
  std::unique_ptr<Layer> clone() const override;
  nlohmann::json describe() const override;

 private:
  std::size_t size_;
};

std::unique_ptr<Layer> layer_from_description(const nlohmann::json& j);

/// Sequential stack of layers. forward() records every intermediate
/// activation; backward() must follow a forward() and returns the gradient
/// with respect to the input while accumulating parameter gradients.
class Network {
 public:
  /// An empty network is the identity on `input_shape`.
  explicit Network(std::vector<std::size_t> input_shape = {0});
  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  Network& add(std::unique_ptr<Layer> layer);
  Network& dense(std::size_t out);
  Network& relu();
  Network& tanh();

  const std::vector<std::size_t>& input_shape() const { return input_shape_; }
  std::size_t input_size() const { return shape_size(input_shape_); }
  std::size_t output_size() const;
  std::size_t num_layers() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }

  std::span<const double> forward(std::span<const double> input);
  Tensor forward(const Tensor& input);
  std::vector<double> backward(std::span<const double> output_grad);

  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  std::size_t parameter_count() const;
  void zero_grad();

  void initialize(std::uint64_t seed);
  /// Zeroes the parameters of the last layer that has any.
  void zero_last_layer();

  nlohmann::json describe() const;
  static Network from_description(const nlohmann::json& j);

  /// Flat copies of all parameter values / gradients, in parameters() order.
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> values);
  std::vector<double> flat_gradients() const;

 private:
  std::vector<std::size_t> input_shape_;
  std::vector<std::unique_ptr<Layer>> layers_;
  std::vector<std::vector<double>> activations_;
  bool has_forward_ = false;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adaptive-moment minimizer over an ordered parameter list. Moment state is
/// positional, so the same list must be passed on every step.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  void step(std::span<Tensor* const> params);
  std::uint64_t steps() const { return t_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::vector<std::vector<double>> m_, v_;
  std::uint64_t t_ = 0;
};

/// Max-subtracted softmax. Throws std::invalid_argument on non-finite input.
std::vector<double> softmax(std::span<const double> logits);
PortfolioWeights softmax_head(std::span<const double> logits);
/// d loss / d logits given the softmax output and d loss / d weights.
std::vector<double> softmax_backward(std::span<const double> weights,
                                     std::span<const double> weights_grad);

/// Copies online into target scaled as tau * online + (1 - tau) * target.
void soft_update(const Network& online, Network& target, double tau);

/// Binary tensor file: "FOLIOTNS" magic, u32 version, u32 count, then per
/// tensor u32 rank and rank x u64 dims, then all values as little-endian
/// IEEE-754 doubles in tensor order.
void write_tensor_file(const std::filesystem::path& path,
                       std::span<const Tensor* const> tensors);
std::vector<Tensor> read_tensor_file(const std::filesystem::path& path);

/// `<stem>.bin` (tensor file) plus `<stem>.json` (architecture sidecar with
/// optional caller metadata under "metadata").
void save_checkpoint(const Network& net, const std::filesystem::path& stem,
                     const nlohmann::json& metadata = nlohmann::json::object());
Network load_checkpoint(const std::filesystem::path& stem);

}  // namespace folio::nn
