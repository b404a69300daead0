#include "folio/nn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "folio/error.hpp"

namespace folio::nn {

std::size_t shape_size(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

Tensor::Tensor(std::vector<std::size_t> s)
    : shape(std::move(s)),
      data(shape_size(shape), 0.0),
      grad(shape_size(shape), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> s, std::vector<double> d)
    : shape(std::move(s)), data(std::move(d)), grad(data.size(), 0.0) {
  if (data.size() != shape_size(shape)) {
    throw std::invalid_argument("tensor data length does not match shape");
  }
}

void Tensor::zero_grad() {
  grad.assign(data.size(), 0.0);
}

namespace {

void glorot(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (auto& v : t.data) v = dist(rng);
}

void check_span(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw std::invalid_argument(std::string(what) + ": expected size " +
                                std::to_string(want) + ", got " +
                                std::to_string(got));
  }
}

}  // namespace

// ---------------------------------------------------------------- Dense

Dense::Dense(std::size_t in, std::size_t out)
    : weight({out, in}), bias({out}), in_(in), out_(out) {
  if (in == 0 || out == 0) throw std::invalid_argument("dense: zero size");
}

void Dense::forward(std::span<const double> in, std::span<double> out) {
  for (std::size_t o = 0; o < out_; ++o) {
    const double* w = weight.data.data() + o * in_;
    double s = bias.data[o];
    for (std::size_t i = 0; i < in_; ++i) s += w[i] * in[i];
    out[o] = s;
  }
}

void Dense::backward(std::span<const double> in, std::span<const double>,
                     std::span<const double> out_grad,
                     std::span<double> in_grad) {
  std::fill(in_grad.begin(), in_grad.end(), 0.0);
  for (std::size_t o = 0; o < out_; ++o) {
    const double g = out_grad[o];
    if (g == 0.0) continue;
    const double* w = weight.data.data() + o * in_;
    double* gw = weight.grad.data() + o * in_;
    for (std::size_t i = 0; i < in_; ++i) {
      gw[i] += g * in[i];
      in_grad[i] += w[i] * g;
    }
    bias.grad[o] += g;
  }
}

void Dense::initialize(Rng& rng) {
  glorot(weight, in_, out_, rng);
  std::fill(bias.data.begin(), bias.data.end(), 0.0);
}

std::unique_ptr<Layer> Dense::clone() const {
  return std::make_unique<Dense>(*this);
}

nlohmann::json Dense::describe() const {
  return {{"type", "dense"}, {"in", in_}, {"out", out_}};
}

// ---------------------------------------------------------------- Conv1D

Conv1D::Conv1D(std::size_t rows, std::size_t in_channels,
               std::size_t out_channels, std::size_t length,
               std::size_t kernel)
    : weight({out_channels, in_channels, kernel}),
      bias({out_channels}),
      rows_(rows),
      cin_(in_channels),
      cout_(out_channels),
      len_(length),
      k_(kernel) {
  if (rows == 0 || in_channels == 0 || out_channels == 0 || kernel == 0 ||
      kernel > length) {
    throw std::invalid_argument("conv1d: invalid geometry (kernel " +
                                std::to_string(kernel) + ", length " +
                                std::to_string(length) + ")");
  }
}

void Conv1D::forward(std::span<const double> in, std::span<double> out) {
  const std::size_t ol = out_len();
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t co = 0; co < cout_; ++co) {
      double* dst = out.data() + (r * cout_ + co) * ol;
      std::fill(dst, dst + ol, bias.data[co]);
      for (std::size_t ci = 0; ci < cin_; ++ci) {
        const double* src = in.data() + (r * cin_ + ci) * len_;
        const double* w = weight.data.data() + (co * cin_ + ci) * k_;
        for (std::size_t p = 0; p < ol; ++p) {
          double s = 0.0;
          for (std::size_t k = 0; k < k_; ++k) s += w[k] * src[p + k];
          dst[p] += s;
        }
      }
    }
  }
}

void Conv1D::backward(std::span<const double> in, std::span<const double>,
                      std::span<const double> out_grad,
                      std::span<double> in_grad) {
  std::fill(in_grad.begin(), in_grad.end(), 0.0);
  const std::size_t ol = out_len();
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t co = 0; co < cout_; ++co) {
      const double* g = out_grad.data() + (r * cout_ + co) * ol;
      double gb = 0.0;
      for (std::size_t p = 0; p < ol; ++p) gb += g[p];
      bias.grad[co] += gb;
      for (std::size_t ci = 0; ci < cin_; ++ci) {
        const double* src = in.data() + (r * cin_ + ci) * len_;
        double* gsrc = in_grad.data() + (r * cin_ + ci) * len_;
        const double* w = weight.data.data() + (co * cin_ + ci) * k_;
        double* gw = weight.grad.data() + (co * cin_ + ci) * k_;
        for (std::size_t p = 0; p < ol; ++p) {
          const double gp = g[p];
          for (std::size_t k = 0; k < k_; ++k) {
            gw[k] += gp * src[p + k];
            gsrc[p + k] += gp * w[k];
          }
        }
      }
    }
  }
}

void Conv1D::initialize(Rng& rng) {
  glorot(weight, cin_ * k_, cout_ * k_, rng);
  std::fill(bias.data.begin(), bias.data.end(), 0.0);
}

std::unique_ptr<Layer> Conv1D::clone() const {
  return std::make_unique<Conv1D>(*this);
}

nlohmann::json Conv1D::describe() const {
  return {{"type", "conv1d"},       {"rows", rows_},  {"in_channels", cin_},
          {"out_channels", cout_},  {"length", len_}, {"kernel", k_}};
}

// ---------------------------------------------------------------- SimpleRnn

SimpleRnn::SimpleRnn(std::size_t steps, std::size_t input_size,
                     std::size_t hidden)
    : w_input({hidden, input_size}),
      w_hidden({hidden, hidden}),
      bias({hidden}),
      steps_(steps),
      in_(input_size),
      hidden_(hidden) {
  if (steps == 0 || input_size == 0 || hidden == 0) {
    throw std::invalid_argument("rnn: zero size");
  }
}

void SimpleRnn::forward(std::span<const double> in, std::span<double> out) {
  states_.assign(steps_ * hidden_, 0.0);
  for (std::size_t t = 0; t < steps_; ++t) {
    const double* x = in.data() + t * in_;
    const double* hp = t == 0 ? nullptr : states_.data() + (t - 1) * hidden_;
    double* h = states_.data() + t * hidden_;
    for (std::size_t j = 0; j < hidden_; ++j) {
      double a = bias.data[j];
      const double* wx = w_input.data.data() + j * in_;
      for (std::size_t i = 0; i < in_; ++i) a += wx[i] * x[i];
      if (hp) {
        const double* wh = w_hidden.data.data() + j * hidden_;
        for (std::size_t i = 0; i < hidden_; ++i) a += wh[i] * hp[i];
      }
      h[j] = std::tanh(a);
    }
  }
  std::copy_n(states_.data() + (steps_ - 1) * hidden_, hidden_, out.data());
}

void SimpleRnn::backward(std::span<const double> in, std::span<const double>,
                         std::span<const double> out_grad,
                         std::span<double> in_grad) {
  std::fill(in_grad.begin(), in_grad.end(), 0.0);
  std::vector<double> dh(out_grad.begin(), out_grad.end());
  std::vector<double> da(hidden_), dh_prev(hidden_);
  for (std::size_t t = steps_; t-- > 0;) {
    const double* h = states_.data() + t * hidden_;
    const double* hp = t == 0 ? nullptr : states_.data() + (t - 1) * hidden_;
    const double* x = in.data() + t * in_;
    double* dx = in_grad.data() + t * in_;
    for (std::size_t j = 0; j < hidden_; ++j) da[j] = dh[j] * (1.0 - h[j] * h[j]);
    std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
    for (std::size_t j = 0; j < hidden_; ++j) {
      const double g = da[j];
      bias.grad[j] += g;
      const double* wx = w_input.data.data() + j * in_;
      double* gwx = w_input.grad.data() + j * in_;
      for (std::size_t i = 0; i < in_; ++i) {
        gwx[i] += g * x[i];
        dx[i] += wx[i] * g;
      }
      if (hp) {
        const double* wh = w_hidden.data.data() + j * hidden_;
        double* gwh = w_hidden.grad.data() + j * hidden_;
        for (std::size_t i = 0; i < hidden_; ++i) {
          gwh[i] += g * hp[i];
          dh_prev[i] += wh[i] * g;
        }
      }
    }
    dh.swap(dh_prev);
  }
}

void SimpleRnn::initialize(Rng& rng) {
  glorot(w_input, in_, hidden_, rng);
  glorot(w_hidden, hidden_, hidden_, rng);
  std::fill(bias.data.begin(), bias.data.end(), 0.0);
}

std::unique_ptr<Layer> SimpleRnn::clone() const {
  return std::make_unique<SimpleRnn>(*this);
}

nlohmann::json SimpleRnn::describe() const {
  return {{"type", "rnn"}, {"steps", steps_}, {"input", in_}, {"hidden", hidden_}};
}

// ---------------------------------------------------------------- activations

void Relu::forward(std::span<const double> in, std::span<double> out) {
  for (std::size_t i = 0; i < size_; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void Relu::backward(std::span<const double> in, std::span<const double>,
                    std::span<const double> out_grad,
                    std::span<double> in_grad) {
  for (std::size_t i = 0; i < size_; ++i) {
    in_grad[i] = in[i] > 0.0 ? out_grad[i] : 0.0;
  }
}

std::unique_ptr<Layer> Relu::clone() const {
  return std::make_unique<Relu>(*this);
}

nlohmann::json Relu::describe() const {
  return {{"type", "relu"}, {"size", size_}};
}

void Tanh::forward(std::span<const double> in, std::span<double> out) {
  for (std::size_t i = 0; i < size_; ++i) out[i] = std::tanh(in[i]);
}

void Tanh::backward(std::span<const double>, std::span<const double> out,
                    std::span<const double> out_grad,
                    std::span<double> in_grad) {
  for (std::size_t i = 0; i < size_; ++i) {
    in_grad[i] = out_grad[i] * (1.0 - out[i] * out[i]);
  }
}

std::unique_ptr<Layer> Tanh::clone() const {
  return std::make_unique<Tanh>(*this);
}

nlohmann::json Tanh::describe() const {
  return {{"type", "tanh"}, {"size", size_}};
}

std::unique_ptr<Layer> layer_from_description(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  auto u = [&](const char* k) { return j.at(k).get<std::size_t>(); };
  if (type == "dense") return std::make_unique<Dense>(u("in"), u("out"));
  if (type == "conv1d") {
    return std::make_unique<Conv1D>(u("rows"), u("in_channels"),
                                    u("out_channels"), u("length"), u("kernel"));
  }
  if (type == "rnn") {
    return std::make_unique<SimpleRnn>(u("steps"), u("input"), u("hidden"));
  }
  if (type == "relu") return std::make_unique<Relu>(u("size"));
  if (type == "tanh") return std::make_unique<Tanh>(u("size"));
  throw std::invalid_argument("unknown layer type '" + type + "'");
}

// ---------------------------------------------------------------- Network

Network::Network(std::vector<std::size_t> input_shape)
    : input_shape_(std::move(input_shape)) {}

Network::Network(const Network& other) : input_shape_(other.input_shape_) {
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Network& Network::operator=(const Network& other) {
  if (this != &other) {
    Network copy(other);
    *this = std::move(copy);
  }
  return *this;
}

std::size_t Network::output_size() const {
  return layers_.empty() ? input_size() : layers_.back()->output_size();
}

Network& Network::add(std::unique_ptr<Layer> layer) {
  if (layer->input_size() != output_size()) {
    throw std::invalid_argument(
        "network: layer '" + layer->kind() + "' expects input size " +
        std::to_string(layer->input_size()) + " but previous output is " +
        std::to_string(output_size()));
  }
  layers_.push_back(std::move(layer));
  has_forward_ = false;
  return *this;
}

Network& Network::dense(std::size_t out) {
  return add(std::make_unique<Dense>(output_size(), out));
}

Network& Network::relu() { return add(std::make_unique<Relu>(output_size())); }

Network& Network::tanh() { return add(std::make_unique<Tanh>(output_size())); }

std::span<const double> Network::forward(std::span<const double> input) {
  if (input.size() != input_size()) {
    throw std::invalid_argument("network input shape mismatch: expected " +
                                std::to_string(input_size()) +
                                " values, got " + std::to_string(input.size()));
  }
  activations_.resize(layers_.size() + 1);
  activations_[0].assign(input.begin(), input.end());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    activations_[i + 1].resize(layers_[i]->output_size());
    layers_[i]->forward(activations_[i], activations_[i + 1]);
  }
  has_forward_ = true;
  return activations_.back();
}

Tensor Network::forward(const Tensor& input) {
  if (input.shape != input_shape_) {
    std::string want, got;
    for (auto d : input_shape_) want += std::to_string(d) + " ";
    for (auto d : input.shape) got += std::to_string(d) + " ";
    throw std::invalid_argument("network input shape mismatch: expected [" +
                                want + "] got [" + got + "]");
  }
  auto out = forward(std::span<const double>(input.data));
  return Tensor({out.size()}, std::vector<double>(out.begin(), out.end()));
}

std::vector<double> Network::backward(std::span<const double> output_grad) {
  if (!has_forward_) {
    throw std::logic_error("network backward called without a forward pass");
  }
  check_span(output_grad.size(), output_size(), "network output gradient");
  std::vector<double> grad(output_grad.begin(), output_grad.end());
  std::vector<double> next;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    next.assign(layers_[i]->input_size(), 0.0);
    layers_[i]->backward(activations_[i], activations_[i + 1], grad, next);
    grad.swap(next);
  }
  return grad;
}

std::vector<Tensor*> Network::parameters() {
  std::vector<Tensor*> out;
  for (auto& l : layers_) {
    for (auto* p : l->parameters()) out.push_back(p);
  }
  return out;
}

std::vector<const Tensor*> Network::parameters() const {
  std::vector<const Tensor*> out;
  for (const auto& l : layers_) {
    for (auto* p : l->parameters()) out.push_back(p);
  }
  return out;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->size();
  return n;
}

void Network::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

void Network::initialize(std::uint64_t seed) {
  Rng rng(seed);
  for (auto& l : layers_) l->initialize(rng);
}

void Network::zero_last_layer() {
  for (std::size_t i = layers_.size(); i-- > 0;) {
    auto params = layers_[i]->parameters();
    if (params.empty()) continue;
    for (auto* p : params) std::fill(p->data.begin(), p->data.end(), 0.0);
    return;
  }
}

nlohmann::json Network::describe() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : layers_) layers.push_back(l->describe());
  return {{"input_shape", input_shape_}, {"layers", layers}};
}

Network Network::from_description(const nlohmann::json& j) {
  Network net(j.at("input_shape").get<std::vector<std::size_t>>());
  for (const auto& l : j.at("layers")) net.add(layer_from_description(l));
  return net;
}

std::vector<double> Network::flat_parameters() const {
  std::vector<double> out;
  for (const auto* p : parameters()) {
    out.insert(out.end(), p->data.begin(), p->data.end());
  }
  return out;
}

void Network::set_flat_parameters(std::span<const double> values) {
  check_span(values.size(), parameter_count(), "set_flat_parameters");
  std::size_t off = 0;
  for (auto* p : parameters()) {
    std::copy_n(values.begin() + static_cast<long>(off), p->size(),
                p->data.begin());
    off += p->size();
  }
}

std::vector<double> Network::flat_gradients() const {
  std::vector<double> out;
  for (const auto* p : parameters()) {
    out.insert(out.end(), p->grad.begin(), p->grad.end());
  }
  return out;
}

// ---------------------------------------------------------------- Adam

void Adam::step(std::span<Tensor* const> params) {
  if (m_.empty()) {
    for (auto* p : params) {
      m_.emplace_back(p->size(), 0.0);
      v_.emplace_back(p->size(), 0.0);
    }
  }
  if (m_.size() != params.size()) {
    throw std::invalid_argument("adam: parameter list changed between steps");
  }
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    auto& m = m_[k];
    auto& v = v_[k];
    if (m.size() != p.size()) {
      throw std::invalid_argument("adam: parameter shape changed between steps");
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = p.grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      p.data[i] -= config_.learning_rate * (m[i] / c1) /
                   (std::sqrt(v[i] / c2) + config_.epsilon);
    }
  }
}

// ---------------------------------------------------------------- softmax

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("softmax of empty vector");
  double mx = -std::numeric_limits<double>::infinity();
  for (double z : logits) {
    if (!std::isfinite(z)) throw std::invalid_argument("softmax: non-finite logit");
    mx = std::max(mx, z);
  }
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

PortfolioWeights softmax_head(std::span<const double> logits) {
  return PortfolioWeights(softmax(logits));
}

std::vector<double> softmax_backward(std::span<const double> weights,
                                     std::span<const double> weights_grad) {
  check_span(weights_grad.size(), weights.size(), "softmax_backward");
  double dot = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    dot += weights[i] * weights_grad[i];
  }
  std::vector<double> out(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out[i] = weights[i] * (weights_grad[i] - dot);
  }
  return out;
}

void soft_update(const Network& online, Network& target, double tau) {
  if (online.describe() != target.describe()) {
    throw std::invalid_argument("soft_update: network architectures differ");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("soft_update: tau must lie in [0, 1]");
  }
  auto src = online.parameters();
  auto dst = target.parameters();
  for (std::size_t k = 0; k < src.size(); ++k) {
    for (std::size_t i = 0; i < src[k]->size(); ++i) {
      dst[k]->data[i] =
          tau * src[k]->data[i] + (1.0 - tau) * dst[k]->data[i];
    }
  }
}

// ---------------------------------------------------------------- checkpoints

namespace {

constexpr char kMagic[8] = {'F', 'O', 'L', 'I', 'O', 'T', 'N', 'S'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::ostream& os, T value) {
  static_assert(std::is_unsigned_v<T>);
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<unsigned char>(value >> (8 * i));
  }
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) {
    throw DataError("truncated tensor file");
  }
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(buf[i]) << (8 * i);
  }
  return value;
}

}  // namespace

void write_tensor_file(const std::filesystem::path& path,
                       std::span<const Tensor* const> tensors) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write '" + path.string() + "'");
  os.write(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(os, kVersion);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(tensors.size()));
  for (const auto* t : tensors) {
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(t->shape.size()));
    for (auto d : t->shape) put_le<std::uint64_t>(os, d);
  }
  for (const auto* t : tensors) {
    for (double v : t->data) put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(v));
  }
  if (!os) throw DataError("failed writing '" + path.string() + "'");
}

std::vector<Tensor> read_tensor_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open '" + path.string() + "'");
  char magic[8];
  if (!is.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError("'" + path.string() + "' is not a folio tensor file");
  }
  if (get_le<std::uint32_t>(is) != kVersion) {
    throw DataError("unsupported tensor file version in '" + path.string() + "'");
  }
  const auto count = get_le<std::uint32_t>(is);
  std::vector<std::vector<std::size_t>> shapes(count);
  for (auto& s : shapes) {
    const auto rank = get_le<std::uint32_t>(is);
    for (std::uint32_t r = 0; r < rank; ++r) {
      s.push_back(static_cast<std::size_t>(get_le<std::uint64_t>(is)));
    }
  }
  std::vector<Tensor> out;
  for (auto& s : shapes) {
    std::vector<double> data(shape_size(s));
    for (auto& v : data) v = std::bit_cast<double>(get_le<std::uint64_t>(is));
    out.emplace_back(std::move(s), std::move(data));
  }
  return out;
}

void save_checkpoint(const Network& net, const std::filesystem::path& stem,
                     const nlohmann::json& metadata) {
  auto params = net.parameters();
  write_tensor_file(stem.string() + ".bin", params);
  nlohmann::json side = {{"format", "folio-checkpoint"},
                         {"version", kVersion},
                         {"network", net.describe()},
                         {"parameter_count", net.parameter_count()},
                         {"metadata", metadata}};
  std::ofstream os(stem.string() + ".json");
  if (!os) throw DataError("cannot write '" + stem.string() + ".json'");
  os << side.dump(2) << "\n";
}

Network load_checkpoint(const std::filesystem::path& stem) {
  std::ifstream is(stem.string() + ".json");
  if (!is) throw DataError("cannot open '" + stem.string() + ".json'");
  nlohmann::json side;
  try {
    is >> side;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad checkpoint sidecar '" + stem.string() + ".json': " + e.what());
  }
  Network net = Network::from_description(side.at("network"));
  auto tensors = read_tensor_file(stem.string() + ".bin");
  auto params = net.parameters();
  if (tensors.size() != params.size()) {
    throw DataError("checkpoint tensor count does not match architecture");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (tensors[k].shape != params[k]->shape) {
      throw DataError("checkpoint tensor shape mismatch at index " +
                      std::to_string(k));
    }
    params[k]->data = std::move(tensors[k].data);
  }
  return net;
}

}  // namespace folio::nn
