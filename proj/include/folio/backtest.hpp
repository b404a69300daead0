#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "folio/agents.hpp"
#include "folio/baselines.hpp"
#include "folio/config.hpp"
#include "folio/market_data.hpp"
#include "folio/training.hpp"

namespace folio {

struct DailyRow {
  std::size_t t = 0;
  std::string date;
  double reward = 0.0;
  double wealth = 1.0;
  double turnover = 0.0;
  std::vector<double> weights;
};

struct BacktestMetrics {
  double final_wealth = 1.0;
  /// Annualized; empty when the return standard deviation is zero.
  std::optional<double> sharpe;
  double max_drawdown = 0.0;
  double total_turnover = 0.0;
};

struct BacktestReport {
  std::string agent;
  std::vector<std::string> asset_names;
  /// Row 0 is the first test day at wealth 1; then one row per step.
  std::vector<DailyRow> daily;
  BacktestMetrics metrics;
  /// to_config_text of the run that produced this report.
  std::string config_snapshot;
  std::optional<std::string> early_termination;
};

/// max_t 1 - wealth[t] / max_{s <= t} wealth[s].
double max_drawdown(std::span<const double> wealth);
/// mean / sample std * sqrt(periods_per_year); nullopt when std is 0.
std::optional<double> sharpe(std::span<const double> log_returns,
                             std::size_t periods_per_year);

/// Adapts a baseline rule to the Policy interface.
class BaselineAgent : public Policy {
 public:
  BaselineAgent(BaselineKind kind, bool include_cash)
      : rule_{kind, include_cash} {}
  std::string name() const override { return to_string(rule_.kind); }
  PortfolioWeights decide(const StateTensor& s, const PriceSeries& series) override {
    return rule_.act(series, s.t());
  }

 private:
  BaselinePolicy rule_;
};

/// Replays `policy` over every tradable day of `test`, explore off.
BacktestReport backtest(Policy& policy,
                        const std::shared_ptr<const PriceSeries>& test,
                        const RunConfig& config);

/// `t,date,reward,wealth,turnover,w_0..w_m`.
void write_report_csv(std::ostream& out, const BacktestReport& report);
nlohmann::json summary_json(const std::vector<BacktestReport>& reports);
/// `<out>/plot.csv` (`date,<agent>_wealth,...`) and `<out>/summary.json`.
/// Throws DataError listing the offending dates when the axes differ.
void emit_plot_data(const std::vector<BacktestReport>& reports,
                    const std::filesystem::path& out);

struct PreparedData {
  std::shared_ptr<const PriceSeries> train;
  std::shared_ptr<const PriceSeries> test;
  std::size_t dropped_days = 0;
};

/// Ingest, derive features, and split per the config. The test part keeps
/// enough leading history for the first observation.
PreparedData prepare_data(const RunConfig& config);

struct TrainedPolicy {
  std::unique_ptr<Policy> policy;
  std::vector<EpisodeLog> log;
};

/// Baselines are returned as-is; learners are trained on `train`.
TrainedPolicy make_policy(const std::string& agent, const RunConfig& config,
                          const std::shared_ptr<const PriceSeries>& train);
/// Restores a learner saved by `save_policy`.
std::unique_ptr<Policy> load_policy(const std::string& agent,
                                    const RunConfig& config,
                                    const ModelShape& shape,
                                    const std::filesystem::path& dir);
void save_policy(const Policy& policy, const std::filesystem::path& dir);
bool is_learner(const std::string& agent);

/// Trains and backtests every configured agent, in parallel; the result is
/// ordered by agent name regardless of scheduling.
std::vector<BacktestReport> run_compare(const RunConfig& config,
                                        unsigned threads = 0);
/// Per-agent `<agent>_report.csv`, plot data, and the config snapshot.
void write_compare_outputs(const std::vector<BacktestReport>& reports,
                           const RunConfig& config,
                           const std::filesystem::path& out);

}  // namespace folio
