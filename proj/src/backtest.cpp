#include "folio/backtest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <thread>

#include "folio/denoise.hpp"
#include "folio/error.hpp"
#include "folio/portfolio_env.hpp"

namespace folio {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void open_for_write(std::ofstream& f, const std::filesystem::path& p) {
  f.open(p, std::ios::binary);
  if (!f) throw DataError("cannot write " + p.string());
}

}  // namespace

double max_drawdown(std::span<const double> wealth) {
  if (wealth.empty()) throw std::invalid_argument("max_drawdown: empty series");
  double peak = wealth[0];
  double worst = 0.0;
  for (double w : wealth) {
    if (!(w > 0.0)) throw std::invalid_argument("max_drawdown: wealth must be positive");
    peak = std::max(peak, w);
    worst = std::max(worst, 1.0 - w / peak);
  }
  return worst;
}

std::optional<double> sharpe(std::span<const double> r, std::size_t periods_per_year) {
  if (r.size() < 2) throw std::invalid_argument("sharpe: need at least two returns");
  double mean = 0.0;
  for (double x : r) mean += x;
  mean /= static_cast<double>(r.size());
  double ss = 0.0;
  for (double x : r) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(r.size() - 1));
  // Constant returns leave only rounding noise in sd.
  if (!(sd > 1e-15 * std::max(1.0, std::abs(mean)))) return std::nullopt;
  return mean / sd * std::sqrt(static_cast<double>(periods_per_year));
}

BacktestReport backtest(Policy& policy,
                        const std::shared_ptr<const PriceSeries>& test,
                        const RunConfig& config) {
  PortfolioEnv env(test, config.env);
  const std::size_t start = test->context_days();
  if (start < env.min_start()) {
    throw DataError("backtest: test series carries " + std::to_string(start) +
                    " context days, needs " + std::to_string(env.min_start()));
  }
  const auto w0 = initial_portfolio(config.initial_weights, test->num_assets());

  BacktestReport rep;
  rep.agent = policy.name();
  rep.asset_names = test->asset_names();
  rep.config_snapshot = to_config_text(config);
  rep.daily.push_back({start, test->dates()[start], 0.0, 1.0, 0.0, w0.vec()});

  auto state = env.reset(start, w0);
  std::vector<double> log_returns;
  while (!env.done()) {
    const auto action = policy.decide(state, *test);
    auto st = env.step(action);
    rep.daily.push_back({st.state.t(), test->dates()[st.state.t()], st.reward,
                         env.wealth(), st.info.turnover, action.vec()});
    log_returns.push_back(std::log(st.info.wealth_ratio));
    rep.metrics.total_turnover += st.info.turnover;
    if (st.info.cost_exceeded) {
      rep.early_termination = "transaction cost exceeded the gross return on " +
                              test->dates()[st.state.t()];
    }
    state = st.next_state;
  }

  std::vector<double> wealth;
  for (const auto& r : rep.daily) wealth.push_back(r.wealth);
  rep.metrics.final_wealth = wealth.back();
  rep.metrics.max_drawdown = max_drawdown(wealth);
  if (log_returns.size() >= 2) {
    rep.metrics.sharpe = sharpe(log_returns, config.periods_per_year);
  }
  return rep;
}

void write_report_csv(std::ostream& out, const BacktestReport& report) {
  out << "t,date,reward,wealth,turnover";
  for (std::size_t j = 0; j < report.asset_names.size(); ++j) out << ",w_" << j;
  out << "\n";
  for (const auto& r : report.daily) {
    out << r.t << ',' << r.date << ',' << num(r.reward) << ',' << num(r.wealth)
        << ',' << num(r.turnover);
    for (double w : r.weights) out << ',' << num(w);
    out << "\n";
  }
}

nlohmann::json summary_json(const std::vector<BacktestReport>& reports) {
  nlohmann::json agents = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json j;
    j["agent"] = r.agent;
    j["final_wealth"] = r.metrics.final_wealth;
    j["sharpe"] = r.metrics.sharpe ? nlohmann::json(*r.metrics.sharpe)
                                   : nlohmann::json(nullptr);
    j["max_drawdown"] = r.metrics.max_drawdown;
    j["total_turnover"] = r.metrics.total_turnover;
    j["days"] = r.daily.size();
    j["early_termination"] = r.early_termination
                                 ? nlohmann::json(*r.early_termination)
                                 : nlohmann::json(nullptr);
    agents.push_back(std::move(j));
  }
  nlohmann::json out;
  out["agents"] = std::move(agents);
  if (!reports.empty()) out["assets"] = reports.front().asset_names;
  return out;
}

void emit_plot_data(const std::vector<BacktestReport>& reports,
                    const std::filesystem::path& out) {
  if (reports.empty()) throw std::invalid_argument("emit_plot_data: no reports");
  const auto& ref = reports.front();
  for (const auto& r : reports) {
    std::set<std::string> a, b;
    for (const auto& d : ref.daily) a.insert(d.date);
    for (const auto& d : r.daily) b.insert(d.date);
    if (a == b && r.daily.size() == ref.daily.size()) continue;
    std::string msg = "emit_plot_data: date axes of '" + ref.agent + "' and '" +
                      r.agent + "' differ;";
    for (const auto& d : a) {
      if (!b.count(d)) msg += " missing in " + r.agent + ": " + d + ";";
    }
    for (const auto& d : b) {
      if (!a.count(d)) msg += " missing in " + ref.agent + ": " + d + ";";
    }
    throw DataError(msg);
  }

  std::filesystem::create_directories(out);
  std::ofstream csv;
  open_for_write(csv, out / "plot.csv");
  csv << "date";
  for (const auto& r : reports) csv << ',' << r.agent << "_wealth";
  csv << "\n";
  for (std::size_t i = 0; i < ref.daily.size(); ++i) {
    csv << ref.daily[i].date;
    for (const auto& r : reports) csv << ',' << num(r.daily[i].wealth);
    csv << "\n";
  }
  std::ofstream js;
  open_for_write(js, out / "summary.json");
  js << summary_json(reports).dump(2) << "\n";
}

PreparedData prepare_data(const RunConfig& config) {
  config.validate();
  CsvSchema schema;
  schema.assets = config.assets;
  schema.min_days = config.env.window_size + 2;
  auto ingested = ingest_csv(config.data_path, schema);
  PriceSeries series = std::move(ingested.series);
  const bool wants_denoised =
      std::find(config.features.begin(), config.features.end(),
                kFeatureCloseDenoised) != config.features.end();
  if (wants_denoised) {
    series = attach_denoised_close(series, make_denoise_options(config));
  }
  series = series.select_features(config.features);
  const std::size_t context =
      std::max(config.env.window_size, config.env.vol_window + 1);
  auto parts = split(series, config.train_end, config.test_end, context);
  PreparedData out;
  out.train = std::make_shared<const PriceSeries>(std::move(parts.train));
  out.test = std::make_shared<const PriceSeries>(std::move(parts.test));
  out.dropped_days = ingested.dropped_days;
  return out;
}

bool is_learner(const std::string& agent) {
  return agent == "ddpg" || agent == "gdpg" || agent == "ppo";
}

TrainedPolicy make_policy(const std::string& agent, const RunConfig& config,
                          const std::shared_ptr<const PriceSeries>& train) {
  TrainedPolicy out;
  if (!is_learner(agent)) {
    out.policy = std::make_unique<BaselineAgent>(parse_baseline(agent),
                                                 config.include_cash_ucrp);
    return out;
  }
  const auto seed = agent_seed(config.seed, agent);
  const auto ac = make_agent_config(config, seed);
  const auto tc = make_train_config(config, seed);
  PortfolioEnv env(train, config.env);
  const ModelShape shape{train->num_assets(), train->num_features(),
                         config.env.window_size};
  if (agent == "ppo") {
    auto p = std::make_unique<PpoAgent>(shape, ac);
    out.log = train_ppo(*p, env, tc);
    out.policy = std::move(p);
  } else if (agent == "gdpg") {
    auto p = std::make_unique<GdpgAgent>(shape, ac);
    out.log = train_ddpg(*p, env, tc);
    out.policy = std::move(p);
  } else {
    auto p = std::make_unique<DdpgAgent>(shape, ac);
    out.log = train_ddpg(*p, env, tc);
    out.policy = std::move(p);
  }
  return out;
}

std::unique_ptr<Policy> load_policy(const std::string& agent,
                                    const RunConfig& config,
                                    const ModelShape& shape,
                                    const std::filesystem::path& dir) {
  const auto ac = make_agent_config(config, agent_seed(config.seed, agent));
  if (agent == "ppo") {
    auto p = std::make_unique<PpoAgent>(shape, ac);
    p->load(dir);
    return p;
  }
  if (agent == "gdpg") {
    auto p = std::make_unique<GdpgAgent>(shape, ac);
    p->load(dir);
    return p;
  }
  if (agent == "ddpg") {
    auto p = std::make_unique<DdpgAgent>(shape, ac);
    p->load(dir);
    return p;
  }
  throw ConfigError("agent '" + agent + "' has no checkpoint");
}

void save_policy(const Policy& policy, const std::filesystem::path& dir) {
  if (const auto* d = dynamic_cast<const DdpgAgent*>(&policy)) {
    d->save(dir);
  } else if (const auto* p = dynamic_cast<const PpoAgent*>(&policy)) {
    p->save(dir);
  } else {
    throw ConfigError("agent '" + policy.name() + "' has nothing to save");
  }
}

std::vector<BacktestReport> run_compare(const RunConfig& config, unsigned threads) {
  auto names = config.agents;
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
    throw ConfigError("agents list contains duplicates");
  }
  const auto data = prepare_data(config);

  std::vector<BacktestReport> reports(names.size());
  std::vector<std::exception_ptr> errors(names.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < names.size();) {
      try {
        auto trained = make_policy(names[i], config, data.train);
        reports[i] = backtest(*trained.policy, data.test, config);
        reports[i].agent = names[i];
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, names.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return reports;
}

void write_compare_outputs(const std::vector<BacktestReport>& reports,
                           const RunConfig& config,
                           const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  for (const auto& r : reports) {
    std::ofstream f;
    open_for_write(f, out / (r.agent + "_report.csv"));
    write_report_csv(f, r);
  }
  emit_plot_data(reports, out);
  std::ofstream cfg;
  open_for_write(cfg, out / "run.cfg");
  cfg << to_config_text(config);
}

}  // namespace folio
