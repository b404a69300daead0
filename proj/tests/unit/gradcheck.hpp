#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "folio/models.hpp"
#include "folio/nn.hpp"

namespace folio::test {

/// max|a - n| / max(max|a|, max|n|), with 0/0 taken as 0.
inline double relative_error(const std::vector<double>& analytic,
                             const std::vector<double>& numeric) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
    scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric[i])});
  }
  return scale == 0.0 ? diff : diff / scale;
}

/// Central and one-sided differences of a scalar loss.
struct FiniteDifference {
  std::vector<double> central, forward, backward;
};

inline void probe(double& v, const std::function<double()>& loss, double h,
                  FiniteDifference& fd) {
  const double keep = v;
  const double mid = loss();
  v = keep + h;
  const double up = loss();
  v = keep - h;
  const double down = loss();
  v = keep;
  fd.central.push_back((up - down) / (2.0 * h));
  fd.forward.push_back((up - mid) / h);
  fd.backward.push_back((mid - down) / h);
}

inline FiniteDifference finite_difference(const std::vector<nn::Tensor*>& params,
                                          const std::function<double()>& loss,
                                          double h = 1e-6) {
  FiniteDifference fd;
  for (auto* p : params) {
    for (auto& v : p->data) probe(v, loss, h, fd);
  }
  return fd;
}

inline FiniteDifference finite_difference(std::vector<double>& x,
                                          const std::function<double()>& loss,
                                          double h = 1e-6) {
  FiniteDifference fd;
  for (auto& v : x) probe(v, loss, h, fd);
  return fd;
}

inline std::vector<double> numeric_gradient(const std::vector<nn::Tensor*>& params,
                                            const std::function<double()>& loss,
                                            double h = 1e-6) {
  return finite_difference(params, loss, h).central;
}

inline std::vector<double> numeric_gradient(std::vector<double>& x,
                                            const std::function<double()>& loss,
                                            double h = 1e-6) {
  return finite_difference(x, loss, h).central;
}

/// Like relative_error, except where the one-sided slopes disagree: the
/// probe straddles a ReLU kink there, and the analytic value only has to
/// match the slope on one side.
inline double gradient_error(const std::vector<double>& analytic, const FiniteDifference& fd) {
  double scale = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    scale = std::max({scale, std::abs(analytic[i]), std::abs(fd.central[i])});
  }
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    double d = std::abs(analytic[i] - fd.central[i]);
    if (std::abs(fd.forward[i] - fd.backward[i]) > 1e-3 * scale) {
      d = std::min({d, std::abs(analytic[i] - fd.forward[i]),
                    std::abs(analytic[i] - fd.backward[i])});
    }
    worst = std::max(worst, d);
  }
  return worst / scale;
}

inline std::vector<double> gaussian(std::size_t n, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> d(0.0, sd);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline std::vector<double> flat_grads(const std::vector<nn::Tensor*>& params) {
  std::vector<double> g;
  for (auto* p : params) g.insert(g.end(), p->grad.begin(), p->grad.end());
  return g;
}

/// Adds N(0, sd^2) to every parameter. Zero biases on all-zero inputs sit
/// exactly on ReLU kinks, where finite differences are one-sided.
inline void jitter(const std::vector<nn::Tensor*>& params, std::mt19937_64& rng,
                   double sd = 0.05) {
  std::normal_distribution<double> d(0.0, sd);
  for (auto* p : params) {
    for (auto& v : p->data) v += d(rng);
  }
}

struct GradCheck {
  double params = 0.0;
  double input = 0.0;
  double worst() const { return std::max(params, input); }
};

/// Checks d<c, net(x)>/d(theta, x) against central differences.
inline GradCheck check_network(nn::Network& net, std::mt19937_64& rng) {
  auto x = gaussian(net.input_size(), rng);
  const auto c = gaussian(net.output_size(), rng);
  auto loss = [&] {
    const auto y = net.forward(x);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += c[i] * y[i];
    return s;
  };
  net.zero_grad();
  loss();
  const auto gx = net.backward(c);
  const auto gp = flat_grads(net.parameters());
  GradCheck out;
  out.params = gradient_error(gp, finite_difference(net.parameters(), loss));
  out.input = gradient_error(gx, finite_difference(x, loss));
  return out;
}

/// A random observation with window entries near one.
inline StateTensor random_state(const ModelShape& shape, std::mt19937_64& rng) {
  std::lognormal_distribution<double> ln(0.0, 0.05);
  std::vector<double> win(shape.assets * shape.window * shape.features);
  for (auto& v : win) v = ln(rng);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(shape.assets);
  double s = 0.0;
  for (auto& v : w) s += (v = e(rng));
  for (auto& v : w) v /= s;
  return StateTensor(std::make_shared<const std::vector<double>>(std::move(win)),
                     shape.assets, shape.window, shape.features,
                     PortfolioWeights(std::move(w)), 0);
}

inline GradCheck check_actor(ActorModel& actor, const StateTensor& s, std::mt19937_64& rng) {
  const auto c = gaussian(s.num_assets(), rng);
  auto loss = [&] {
    const auto y = actor.logits(s);
    double v = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) v += c[i] * y[i];
    return v;
  };
  actor.zero_grad();
  loss();
  actor.backward(c);
  GradCheck out;
  out.params = gradient_error(actor.flat_gradients(), finite_difference(actor.parameters(), loss));
  return out;
}

inline GradCheck check_critic(CriticModel& critic, const StateTensor& s, std::mt19937_64& rng) {
  auto aux = gaussian(critic.aux_size, rng, 0.3);
  auto loss = [&] { return critic.forward(s, aux); };
  critic.zero_grad();
  loss();
  const auto ga = critic.backward(1.0);
  GradCheck out;
  out.params = gradient_error(critic.flat_gradients(), finite_difference(critic.parameters(), loss));
  if (!aux.empty()) out.input = gradient_error(ga, finite_difference(aux, loss));
  return out;
}

inline GradCheck check_transition(TransitionModel& model, const StateTensor& s,
                                  std::mt19937_64& rng) {
  const auto c = gaussian(s.num_assets(), rng);
  auto loss = [&] {
    const auto y = model.predict(s);
    double v = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) v += c[i] * y[i];
    return v;
  };
  model.zero_grad();
  loss();
  model.backward(c);
  GradCheck out;
  out.params = gradient_error(flat_grads(model.parameters()),
                              finite_difference(model.parameters(), loss));
  return out;
}

}  // namespace folio::test
