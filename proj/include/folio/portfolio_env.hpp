#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "folio/market_data.hpp"
#include "folio/weights.hpp"

namespace folio {

struct EnvConfig {
  /// Transaction-cost rate per unit of turnover.
  double mu = 0.0025;
  /// Weight of the volatility-adjusted return term A.
  double beta = 0.01;
  /// L, days of history behind A.
  std::size_t vol_window = 20;
  std::size_t window_size = 50;
  double gamma = 0.99;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

/// Log reward floor used when costs exceed the gross return.
inline constexpr double kClampedLogArgument = 1e-6;

/// w' = (y ⊙ w) / (y · w).
PortfolioWeights drift(const PortfolioWeights& w_prev, const PriceRelative& y);

/// Pre-cost value after one day of market movement: (y · w) * p.
double wealth_update(double p_prev, const PortfolioWeights& w_prev,
                     const PriceRelative& y);

struct VolatilityTerm {
  double value = 0.0;
  /// Set when a held risky asset had zero return volatility over the window;
  /// its contribution is then 0.
  bool degenerate = false;
};

/// A = sum_i w_i * [(v_{i,t-1} - v_{i,t-L}) / v_{i,t-L}] / std(r_i), where
/// r_i are the L-1 daily simple returns between t-L and t-1 and std is the
/// population standard deviation. Cash contributes 0. Requires t >= L + 1.
VolatilityTerm volatility_term(const PriceSeries& series, std::size_t t,
                               const PortfolioWeights& w_prev,
                               std::size_t window);

struct StepInfo {
  PortfolioWeights drifted;
  double turnover = 0.0;
  /// y_t · w_prev
  double gross_return = 1.0;
  /// gross_return - mu * turnover, floored at kClampedLogArgument.
  double wealth_ratio = 1.0;
  double a_term = 0.0;
  bool degenerate_volatility = false;
  /// Cost exceeded the gross return; reward clamped, episode terminates.
  bool cost_exceeded = false;
};

struct StepOutcome {
  double reward = 0.0;
  StepInfo info;
};

/// One day of the MDP, as a pure function: the market moves `w_prev` with
/// y_t, the portfolio is rebalanced from the drifted weights to `action` at
/// the close, and
///   reward = log(y_t · w_prev - mu * sum|action - w'|) + beta * A.
StepOutcome evaluate_step(const PriceSeries& series, const EnvConfig& config,
                          std::size_t t, const PortfolioWeights& w_prev,
                          const PortfolioWeights& action);

struct EpisodeStep {
  StateTensor state;
  PortfolioWeights action;
  double reward = 0.0;
  StateTensor next_state;
  bool done = false;
  StepInfo info;
};

/// Stateful wrapper around evaluate_step.
///
/// Decision points are day closes. reset(start, w0) treats w0 as held at the
/// close of `start`; the first observation is the close of start + 1, after
/// w0 drifted through that day. Each step() rebalances at the current close
/// and advances one day. prev_weights in an observation are the drifted
/// holdings the next action is charged against.
class PortfolioEnv {
 public:
  PortfolioEnv(std::shared_ptr<const PriceSeries> series, EnvConfig config);

  StateTensor reset(std::size_t start,
                    std::optional<PortfolioWeights> initial = std::nullopt);
  EpisodeStep step(const PortfolioWeights& action);

  /// Earliest legal `start` for reset.
  std::size_t min_start() const;
  /// Last day index that can be stepped.
  std::size_t last_day() const { return series_->num_days() - 1; }

  StateTensor observe() const;
  std::size_t t() const { return t_; }
  double wealth() const { return wealth_; }
  bool done() const { return done_; }
  const PortfolioWeights& held() const { return held_; }
  const EnvConfig& config() const { return config_; }
  const PriceSeries& series() const { return *series_; }
  const std::shared_ptr<const PriceSeries>& series_ptr() const {
    return series_;
  }

 private:
  std::shared_ptr<const std::vector<double>> window_at(std::size_t t) const;

  std::shared_ptr<const PriceSeries> series_;
  EnvConfig config_;
  mutable std::vector<std::shared_ptr<const std::vector<double>>> windows_;
  std::size_t t_ = 0;
  PortfolioWeights held_;
  double wealth_ = 1.0;
  bool done_ = true;
};

}  // namespace folio
