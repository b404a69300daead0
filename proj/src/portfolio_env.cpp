#include "folio/portfolio_env.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "folio/error.hpp"

namespace folio {

void EnvConfig::validate() const {
  if (!(mu >= 0.0 && mu <= 0.05)) {
    throw ConfigError("mu must lie in [0, 0.05], got " + std::to_string(mu));
  }
  if (!(beta >= 0.0)) throw ConfigError("beta must be >= 0");
  if (vol_window < 2) throw ConfigError("vol_window must be >= 2");
  if (window_size < 1) throw ConfigError("window_size must be >= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw ConfigError("gamma must lie in [0, 1]");
  }
}

PortfolioWeights drift(const PortfolioWeights& w_prev, const PriceRelative& y) {
  if (y.size() != w_prev.size()) {
    throw std::invalid_argument("drift: weights and price relatives differ in length");
  }
  std::vector<double> out(w_prev.size());
  double dot = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = y[i] * w_prev[i];
    dot += out[i];
  }
  if (!(dot > 0.0)) throw NumericalError("drift: y · w is not positive");
  for (auto& v : out) v /= dot;
  return PortfolioWeights(std::move(out));
}

double wealth_update(double p_prev, const PortfolioWeights& w_prev,
                     const PriceRelative& y) {
  if (!(p_prev > 0.0)) throw std::invalid_argument("wealth must be positive");
  double dot = 0.0;
  for (std::size_t i = 0; i < w_prev.size(); ++i) dot += y[i] * w_prev[i];
  return dot * p_prev;
}

VolatilityTerm volatility_term(const PriceSeries& series, std::size_t t,
                               const PortfolioWeights& w_prev,
                               std::size_t window) {
  if (window < 2) throw std::invalid_argument("volatility window must be >= 2");
  if (t < window + 1 || t >= series.num_days()) {
    throw DataError("volatility_term: day " + std::to_string(t) +
                    " needs at least " + std::to_string(window + 1) +
                    " days of history");
  }
  if (w_prev.size() != series.num_assets()) {
    throw std::invalid_argument("volatility_term: weight length mismatch");
  }
  VolatilityTerm out;
  const std::size_t n_ret = window - 1;
  std::vector<double> r(n_ret);
  for (std::size_t i = 0; i < series.num_assets(); ++i) {
    if (i == series.cash_index() || w_prev[i] == 0.0) continue;
    const double v_end = series.close(i, t - 1);
    const double v_start = series.close(i, t - window);
    const double total = (v_end - v_start) / v_start;
    double mean = 0.0;
    for (std::size_t k = 0; k < n_ret; ++k) {
      // returns over days t-L+1 .. t-1
      const std::size_t d = t - window + 1 + k;
      const double prev = series.close(i, d - 1);
      r[k] = (series.close(i, d) - prev) / prev;
      mean += r[k];
    }
    mean /= static_cast<double>(n_ret);
    double var = 0.0;
    for (double x : r) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / static_cast<double>(n_ret));
    if (!(sd > 1e-12)) {
      out.degenerate = true;
      continue;
    }
    out.value += w_prev[i] * total / sd;
  }
  return out;
}

StepOutcome evaluate_step(const PriceSeries& series, const EnvConfig& config,
                          std::size_t t, const PortfolioWeights& w_prev,
                          const PortfolioWeights& action) {
  if (action.size() != series.num_assets() ||
      w_prev.size() != series.num_assets()) {
    throw std::invalid_argument("step: weight vectors must have one entry per asset");
  }
  const PriceRelative y = price_relative(series, t);
  StepOutcome out;
  StepInfo& info = out.info;
  info.drifted = drift(w_prev, y);
  info.gross_return = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) info.gross_return += y[i] * w_prev[i];
  info.turnover = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    info.turnover += std::abs(action[i] - info.drifted[i]);
  }
  double net = info.gross_return - config.mu * info.turnover;
  if (config.beta != 0.0) {
    auto a = volatility_term(series, t, w_prev, config.vol_window);
    info.a_term = a.value;
    info.degenerate_volatility = a.degenerate;
  }
  if (!(net > 0.0)) {
    info.cost_exceeded = true;
    info.wealth_ratio = kClampedLogArgument;
    out.reward = std::log(kClampedLogArgument);
    return out;
  }
  info.wealth_ratio = net;
  out.reward = std::log(net) + config.beta * info.a_term;
  if (!std::isfinite(out.reward)) {
    throw NumericalError("step: non-finite reward at day " + std::to_string(t));
  }
  return out;
}

PortfolioEnv::PortfolioEnv(std::shared_ptr<const PriceSeries> series,
                           EnvConfig config)
    : series_(std::move(series)), config_(config) {
  if (!series_) throw std::invalid_argument("PortfolioEnv: null series");
  config_.validate();
  windows_.resize(series_->num_days());
}

std::size_t PortfolioEnv::min_start() const {
  return std::max(config_.window_size, config_.vol_window + 1);
}

std::shared_ptr<const std::vector<double>> PortfolioEnv::window_at(
    std::size_t t) const {
  auto& slot = windows_.at(t);
  if (!slot) {
    slot = std::make_shared<const std::vector<double>>(
        build_window(*series_, t, config_.window_size));
  }
  return slot;
}

StateTensor PortfolioEnv::reset(std::size_t start,
                                std::optional<PortfolioWeights> initial) {
  if (start < min_start()) {
    throw DataError("reset: start " + std::to_string(start) +
                    " precedes the first legal start " +
                    std::to_string(min_start()));
  }
  if (start + 1 > last_day()) {
    throw DataError("reset: start " + std::to_string(start) +
                    " leaves no day to trade");
  }
  PortfolioWeights w0 = initial ? *initial
                                : PortfolioWeights::cash_only(series_->num_assets());
  if (w0.size() != series_->num_assets()) {
    throw std::invalid_argument("reset: initial weights have wrong length");
  }
  held_ = std::move(w0);
  t_ = start + 1;
  wealth_ = 1.0;
  done_ = false;
  return observe();
}

StateTensor PortfolioEnv::observe() const {
  const auto y = price_relative(*series_, t_);
  return StateTensor(window_at(t_), series_->num_assets(), config_.window_size,
                     series_->num_features(), drift(held_, y), t_);
}

EpisodeStep PortfolioEnv::step(const PortfolioWeights& action) {
  if (done_) throw std::logic_error("step called on a finished episode");
  EpisodeStep out{observe(), action, 0.0, {}, false, {}};
  auto outcome = evaluate_step(*series_, config_, t_, held_, action);
  out.reward = outcome.reward;
  out.info = std::move(outcome.info);
  wealth_ *= out.info.wealth_ratio;
  held_ = action;
  if (out.info.cost_exceeded || t_ >= last_day()) {
    done_ = true;
    out.done = true;
    // Terminal: no further observation exists; the bootstrap is masked.
    out.next_state = out.state.with_prev_weights(action);
  } else {
    ++t_;
    out.next_state = observe();
  }
  return out;
}

}  // namespace folio
