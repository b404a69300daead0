#include "folio/models.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace folio {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<double> concat(std::span<const double> a, std::span<const double> b,
                           std::span<const double> c = {}) {
  std::vector<double> out;
  out.reserve(a.size() + b.size() + c.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  out.insert(out.end(), c.begin(), c.end());
  return out;
}

void check_shape(const ModelShape& shape, const StateTensor& s) {
  if (ModelShape::of(s) != shape) {
    throw std::invalid_argument("observation shape does not match the model");
  }
}

}  // namespace

std::vector<double> encode_window(const StateTensor& s) {
  const std::size_t na = s.num_assets(), nw = s.window_size(),
                    nf = s.num_features();
  std::vector<double> out(na * nf * nw);
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t f = 0; f < nf; ++f) {
      for (std::size_t k = 0; k < nw; ++k) {
        out[(a * nf + f) * nw + k] = s.at(a, k, f) - 1.0;
      }
    }
  }
  return out;
}

std::vector<double> encode_sequence(const StateTensor& s) {
  const std::size_t na = s.num_assets(), nw = s.window_size(),
                    nf = s.num_features();
  std::vector<double> out(nw * na * nf);
  for (std::size_t k = 0; k < nw; ++k) {
    for (std::size_t a = 0; a < na; ++a) {
      for (std::size_t f = 0; f < nf; ++f) {
        out[(k * na + a) * nf + f] = s.at(a, k, f) - 1.0;
      }
    }
  }
  return out;
}

nn::Network make_encoder(const ModelShape& shape, const NetworkSizes& sizes) {
  const std::size_t kernel = std::min(sizes.conv_kernel, shape.window);
  const std::size_t len2 = shape.window - kernel + 1;
  nn::Network net({shape.assets, shape.features, shape.window});
  net.add(std::make_unique<nn::Conv1D>(shape.assets, shape.features,
                                       sizes.conv_channels, shape.window,
                                       kernel));
  net.relu();
  net.add(std::make_unique<nn::Conv1D>(shape.assets, sizes.conv_channels,
                                       sizes.feature_channels, len2, len2));
  net.relu();
  return net;
}

// ---------------------------------------------------------------- actor

ActorModel::ActorModel(const ModelShape& s, const NetworkSizes& sizes,
                       bool use_prev, std::uint64_t seed)
    : encoder(make_encoder(s, sizes)), use_prev_weights(use_prev), shape(s) {
  head = nn::Network({encoder.output_size() + (use_prev ? s.assets : 0)});
  head.dense(sizes.hidden).relu().dense(s.assets);
  encoder.initialize(mix_seed(seed, 0));
  head.initialize(mix_seed(seed, 1));
}

std::vector<double> ActorModel::logits(const StateTensor& s) {
  check_shape(shape, s);
  auto features = encoder.forward(encode_window(s));
  std::span<const double> prev =
      use_prev_weights ? s.prev_weights().values() : std::span<const double>{};
  auto out = head.forward(concat(features, prev));
  return {out.begin(), out.end()};
}

void ActorModel::backward(std::span<const double> logits_grad) {
  auto g = head.backward(logits_grad);
  g.resize(encoder.output_size());
  encoder.backward(g);
}

std::vector<nn::Tensor*> ActorModel::parameters() {
  auto p = encoder.parameters();
  auto h = head.parameters();
  p.insert(p.end(), h.begin(), h.end());
  return p;
}

std::vector<const nn::Tensor*> ActorModel::parameters() const {
  auto p = encoder.parameters();
  auto h = head.parameters();
  p.insert(p.end(), h.begin(), h.end());
  return p;
}

void ActorModel::zero_grad() {
  encoder.zero_grad();
  head.zero_grad();
}

std::vector<double> ActorModel::flat_gradients() const {
  std::vector<double> out;
  for (const auto* t : parameters()) out.insert(out.end(), t->grad.begin(), t->grad.end());
  return out;
}

std::vector<double> ActorModel::flat_parameters() const {
  std::vector<double> out;
  for (const auto* t : parameters()) out.insert(out.end(), t->data.begin(), t->data.end());
  return out;
}

void ActorModel::set_flat_gradients(std::span<const double> g) {
  std::size_t off = 0;
  for (auto* t : parameters()) {
    if (off + t->size() > g.size()) {
      throw std::invalid_argument("set_flat_gradients: too few values");
    }
    std::copy_n(g.begin() + static_cast<long>(off), t->size(), t->grad.begin());
    off += t->size();
  }
  if (off != g.size()) throw std::invalid_argument("set_flat_gradients: too many values");
}

std::size_t ActorModel::parameter_count() const {
  return encoder.parameter_count() + head.parameter_count();
}

// ---------------------------------------------------------------- critic

CriticModel::CriticModel(const ModelShape& s, const NetworkSizes& sizes,
                         bool use_prev, std::size_t aux, std::uint64_t seed)
    : encoder(make_encoder(s, sizes)),
      use_prev_weights(use_prev),
      aux_size(aux),
      shape(s) {
  head = nn::Network({encoder.output_size() + (use_prev ? s.assets : 0) + aux});
  head.dense(sizes.hidden).relu().dense(1);
  encoder.initialize(mix_seed(seed, 2));
  head.initialize(mix_seed(seed, 3));
}

double CriticModel::forward(const StateTensor& s, std::span<const double> aux) {
  check_shape(shape, s);
  if (aux.size() != aux_size) {
    throw std::invalid_argument("critic: auxiliary input has wrong length");
  }
  auto features = encoder.forward(encode_window(s));
  std::span<const double> prev =
      use_prev_weights ? s.prev_weights().values() : std::span<const double>{};
  return head.forward(concat(features, prev, aux))[0];
}

std::vector<double> CriticModel::backward(double dq) {
  const double g[1] = {dq};
  auto gin = head.backward(g);
  const std::size_t nf = encoder.output_size();
  std::vector<double> aux_grad(gin.end() - static_cast<long>(aux_size), gin.end());
  gin.resize(nf);
  encoder.backward(gin);
  return aux_grad;
}

std::vector<nn::Tensor*> CriticModel::parameters() {
  auto p = encoder.parameters();
  auto h = head.parameters();
  p.insert(p.end(), h.begin(), h.end());
  return p;
}

std::vector<const nn::Tensor*> CriticModel::parameters() const {
  auto p = encoder.parameters();
  auto h = head.parameters();
  p.insert(p.end(), h.begin(), h.end());
  return p;
}

void CriticModel::zero_grad() {
  encoder.zero_grad();
  head.zero_grad();
}

std::vector<double> CriticModel::flat_gradients() const {
  std::vector<double> out;
  for (const auto* t : parameters()) out.insert(out.end(), t->grad.begin(), t->grad.end());
  return out;
}

std::size_t CriticModel::parameter_count() const {
  return encoder.parameter_count() + head.parameter_count();
}

// ---------------------------------------------------------------- transition

TransitionModel::TransitionModel(const ModelShape& s, const NetworkSizes& sizes,
                                 std::uint64_t seed)
    : net({s.window, s.assets * s.features}), shape(s) {
  net.add(std::make_unique<nn::SimpleRnn>(s.window, s.assets * s.features,
                                          sizes.transition_hidden));
  net.dense(s.assets);
  net.initialize(mix_seed(seed, 4));
}

std::vector<double> TransitionModel::predict(const StateTensor& s) {
  check_shape(shape, s);
  auto out = net.forward(encode_sequence(s));
  std::vector<double> y(out.begin(), out.end());
  for (auto& v : y) v += 1.0;
  return y;
}

void TransitionModel::backward(std::span<const double> prediction_grad) {
  net.backward(prediction_grad);
}

std::vector<double> next_price_relatives(const StateTensor& next_state) {
  if (next_state.window_size() < 2) {
    throw std::invalid_argument("next_price_relatives needs window >= 2");
  }
  const std::size_t k = next_state.window_size() - 2;
  std::vector<double> y(next_state.num_assets());
  for (std::size_t a = 0; a < y.size(); ++a) y[a] = 1.0 / next_state.at(a, k, 0);
  return y;
}

// ---------------------------------------------------------------- replay

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(seed) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be > 0");
}

void ReplayBuffer::push(EpisodeStep step) {
  if (steps_.size() < capacity_) {
    steps_.push_back(std::move(step));
  } else {
    steps_[next_] = std::move(step);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<EpisodeStep> ReplayBuffer::sample(std::size_t n) {
  if (n > steps_.size()) {
    throw std::invalid_argument("replay: cannot sample " + std::to_string(n) +
                                " from " + std::to_string(steps_.size()));
  }
  // Floyd's algorithm: n distinct indices in O(n).
  std::vector<std::size_t> picked;
  std::unordered_set<std::size_t> seen;
  const std::size_t size = steps_.size();
  for (std::size_t j = size - n; j < size; ++j) {
    std::uniform_int_distribution<std::size_t> dist(0, j);
    std::size_t r = dist(rng_);
    if (!seen.insert(r).second) {
      seen.insert(j);
      r = j;
    }
    picked.push_back(r);
  }
  std::vector<EpisodeStep> out;
  out.reserve(n);
  for (auto i : picked) out.push_back(steps_[i]);
  return out;
}

void save_pair(const nn::Network& encoder, const nn::Network& head,
               const std::filesystem::path& dir, const std::string& name) {
  nn::save_checkpoint(encoder, dir / (name + "_encoder"));
  nn::save_checkpoint(head, dir / (name + "_head"));
}

void load_pair(nn::Network& encoder, nn::Network& head,
               const std::filesystem::path& dir, const std::string& name) {
  auto e = nn::load_checkpoint(dir / (name + "_encoder"));
  auto h = nn::load_checkpoint(dir / (name + "_head"));
  if (e.describe() != encoder.describe() || h.describe() != head.describe()) {
    throw std::invalid_argument("checkpoint '" + name +
                                "' architecture does not match the agent");
  }
  encoder = std::move(e);
  head = std::move(h);
}

}  // namespace folio
