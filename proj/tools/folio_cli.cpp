// folio: command-line entry point.
//
// Exit codes: 0 success, 2 configuration error, 3 data error,
// 4 numerical failure, 1 anything else.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "folio/backtest.hpp"
#include "folio/config.hpp"
#include "folio/denoise.hpp"
#include "folio/error.hpp"
#include "folio/market_data.hpp"
#include "folio/selection.hpp"

namespace fs = std::filesystem;
using namespace folio;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw DataError("cannot write " + p.string());
  return f;
}

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string agent;
  std::string out;
};

RunConfig resolve_config(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_config(c.config_path);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.agent.empty()) cfg.agent = c.agent;
  cfg.validate();
  return cfg;
}

void write_series_csv(std::ostream& out, const PriceSeries& s) {
  out << "date";
  for (std::size_t a = 1; a < s.num_assets(); ++a) {
    for (const auto& f : s.feature_names()) out << ',' << s.asset_names()[a] << '_' << f;
  }
  out << "\n";
  for (std::size_t d = 0; d < s.num_days(); ++d) {
    out << s.dates()[d];
    for (std::size_t a = 1; a < s.num_assets(); ++a) {
      for (std::size_t f = 0; f < s.num_features(); ++f) out << ',' << num(s.at(a, d, f));
    }
    out << "\n";
  }
}

// ---------------------------------------------------------------- ingest

int cmd_ingest(const std::string& in, const std::vector<std::string>& assets,
               const Common& c) {
  CsvSchema schema;
  schema.assets = assets;
  auto res = ingest_csv(in, schema);
  const fs::path out = c.out.empty() ? fs::path(".") : fs::path(c.out);
  auto csv = open_out(out / "prices.csv");
  write_series_csv(csv, res.series);
  nlohmann::json j;
  j["source"] = in;
  j["days"] = res.series.num_days();
  j["dropped_days"] = res.dropped_days;
  j["first_date"] = res.series.dates().front();
  j["last_date"] = res.series.dates().back();
  j["assets"] = std::vector<std::string>(res.series.asset_names().begin() + 1,
                                         res.series.asset_names().end());
  open_out(out / "ingest.json") << j.dump(2) << "\n";
  std::cout << "ingested " << res.series.num_days() << " days of "
            << res.series.num_assets() - 1 << " assets (" << res.dropped_days
            << " dropped) -> " << (out / "prices.csv").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- denoise

int cmd_denoise(const std::string& in, const std::string& column,
                std::size_t levels, const std::string& wavelet_name,
                std::size_t window, const std::string& out) {
  std::ifstream f(in);
  if (!f) throw DataError("cannot open " + in);
  std::string line;
  if (!std::getline(f, line)) throw DataError(in + ": empty file");
  auto split_row = [](const std::string& l) {
    std::vector<std::string> cells;
    std::stringstream ss(l);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      cells.push_back(cell);
    }
    return cells;
  };
  const auto header = split_row(line);
  std::size_t col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == column) col = i;
  }
  if (col == header.size()) throw DataError(in + ": no column named '" + column + "'");
  std::vector<std::string> keys;
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_row(line);
    if (cells.size() <= col) {
      throw DataError(in + ":" + std::to_string(lineno) + ": missing column " + column);
    }
    try {
      std::size_t used = 0;
      values.push_back(std::stod(cells[col], &used));
      if (used != cells[col].size() || !std::isfinite(values.back())) throw 0;
    } catch (...) {
      throw DataError(in + ":" + std::to_string(lineno) + ": '" + cells[col] +
                      "' is not a finite number");
    }
    keys.push_back(cells.front());
  }
  const auto& wavelet = Wavelet::get(wavelet_name);
  const auto den = window == 0 ? denoise_series(values, levels, wavelet)
                               : rolling_denoise(values, window, levels, wavelet);
  auto o = open_out(out);
  o << header.front() << ',' << column << ',' << column << "_denoised\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    o << keys[i] << ',' << num(values[i]) << ',' << num(den[i]) << "\n";
  }
  std::cout << "denoised " << values.size() << " samples of " << column << " -> "
            << out << "\n";
  return 0;
}

// ---------------------------------------------------------------- select

int cmd_select(const std::string& in, std::size_t k, const std::string& train_end,
               unsigned threads, const std::string& out) {
  if (!is_iso_date(train_end)) throw ConfigError("--train-end must be YYYY-MM-DD");
  auto res = ingest_csv(in, CsvSchema{});
  const auto& dates = res.series.dates();
  const auto n = static_cast<std::size_t>(
      std::upper_bound(dates.begin(), dates.end(), train_end) - dates.begin());
  const auto train = res.series.slice(0, n);
  std::vector<std::size_t> universe;
  for (std::size_t a = 1; a < train.num_assets(); ++a) universe.push_back(a);
  SelectionOptions opts;
  opts.threads = threads;
  const auto sel = select_subset(train, k, universe, opts);
  nlohmann::json j;
  std::vector<std::string> names;
  for (auto i : sel.indices) names.push_back(train.asset_names()[i]);
  j["subset"] = names;
  j["weights"] = std::vector<double>(sel.best.weights.data(),
                                     sel.best.weights.data() + sel.best.weights.size());
  j["variance"] = sel.best.variance;
  j["combinations_visited"] = sel.combinations_visited;
  j["train_days"] = n;
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    open_out(out) << j.dump(2) << "\n";
    std::cout << "selected " << names.size() << " assets -> " << out << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- train

int cmd_train(const Common& c) {
  const auto cfg = resolve_config(c);
  if (!is_learner(cfg.agent)) {
    throw ConfigError("train needs a learning agent (ddpg, gdpg, ppo), got '" +
                      cfg.agent + "'");
  }
  const fs::path out = c.out.empty() ? fs::path("checkpoints") / cfg.agent : fs::path(c.out);
  const auto data = prepare_data(cfg);
  auto trained = make_policy(cfg.agent, cfg, data.train);
  save_policy(*trained.policy, out);
  auto log = open_out(out / "training_log.csv");
  write_training_log(log, trained.log);
  open_out(out / "run.cfg") << to_config_text(cfg);
  std::cout << "trained " << cfg.agent << " for " << trained.log.size()
            << " episodes -> " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- backtest

int cmd_backtest(const Common& c, const std::string& checkpoint) {
  const auto cfg = resolve_config(c);
  const fs::path out = c.out.empty() ? fs::path("reports") : fs::path(c.out);
  const auto data = prepare_data(cfg);
  std::unique_ptr<Policy> policy;
  if (is_learner(cfg.agent) && !checkpoint.empty()) {
    const ModelShape shape{data.test->num_assets(), data.test->num_features(),
                           cfg.env.window_size};
    policy = load_policy(cfg.agent, cfg, shape, checkpoint);
  } else {
    policy = make_policy(cfg.agent, cfg, data.train).policy;
  }
  auto rep = backtest(*policy, data.test, cfg);
  rep.agent = cfg.agent;
  auto csv = open_out(out / (cfg.agent + "_report.csv"));
  write_report_csv(csv, rep);
  emit_plot_data({rep}, out);
  open_out(out / "run.cfg") << to_config_text(cfg);
  std::cout << cfg.agent << ": final wealth " << num(rep.metrics.final_wealth)
            << " over " << rep.daily.size() << " days -> " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- compare

int cmd_compare(const Common& c, unsigned threads) {
  const auto cfg = resolve_config(c);
  const fs::path out = c.out.empty() ? fs::path("reports") : fs::path(c.out);
  const auto reports = run_compare(cfg, threads);
  write_compare_outputs(reports, cfg, out);
  for (const auto& r : reports) {
    std::cout << r.agent << ": final wealth " << num(r.metrics.final_wealth) << "\n";
  }
  return 0;
}

void add_common(CLI::App* sub, Common& c, bool with_agent) {
  sub->add_option("--config", c.config_path, "Run configuration file")
      ->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "Override the configured seed");
  if (with_agent) {
    sub->add_option("--agent", c.agent, "ucrp|winner|loser|ddpg|gdpg|ppo")
        ->check(CLI::IsMember({"ucrp", "winner", "loser", "ddpg", "gdpg", "ppo"}));
  }
  sub->add_option("--out", c.out, "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"folio: portfolio management with deep policy-gradient agents"};
  app.require_subcommand(1);
  Common common;

  auto* ingest = app.add_subcommand("ingest", "Validate and canonicalize a price CSV");
  std::string ingest_in;
  std::vector<std::string> ingest_assets;
  ingest->add_option("--in", ingest_in, "Input CSV")->required()->check(CLI::ExistingFile);
  ingest->add_option("--assets", ingest_assets, "Assets to keep")->delimiter(',');
  ingest->add_option("--out", common.out, "Output directory");

  auto* den = app.add_subcommand("denoise", "Wavelet-denoise one CSV column");
  std::string den_in, den_column, den_wavelet = "db4", den_out;
  std::size_t den_levels = 2, den_window = 0;
  den->add_option("--in", den_in, "Input CSV")->required()->check(CLI::ExistingFile);
  den->add_option("--column", den_column, "Column name")->required();
  den->add_option("--levels", den_levels, "Decomposition levels")->check(CLI::PositiveNumber);
  den->add_option("--wavelet", den_wavelet, "haar|db1|db2|db3|db4");
  den->add_option("--window", den_window, "Causal rolling window; 0 = whole series");
  den->add_option("--out", den_out, "Output CSV")->required();

  auto* sel = app.add_subcommand("select", "Minimum-variance subset selection");
  std::string sel_in, sel_train_end, sel_out;
  std::size_t sel_k = 0;
  unsigned sel_threads = 0;
  sel->add_option("--in", sel_in, "Input CSV")->required()->check(CLI::ExistingFile);
  sel->add_option("--k", sel_k, "Subset size")->required()->check(CLI::PositiveNumber);
  sel->add_option("--train-end", sel_train_end, "Last training date")->required();
  sel->add_option("--threads", sel_threads, "Worker threads; 0 = all cores");
  sel->add_option("--out", sel_out, "Output JSON (default stdout)");

  auto* train = app.add_subcommand("train", "Train a learning agent");
  add_common(train, common, true);

  auto* bt = app.add_subcommand("backtest", "Backtest one agent on the test period");
  std::string bt_checkpoint;
  add_common(bt, common, true);
  bt->add_option("--checkpoint", bt_checkpoint, "Load a trained agent instead of training")
      ->check(CLI::ExistingDirectory);

  auto* cmp = app.add_subcommand("compare", "Backtest every configured agent");
  unsigned cmp_threads = 0;
  add_common(cmp, common, false);
  cmp->add_option("--threads", cmp_threads, "Worker threads; 0 = all cores");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*ingest) return cmd_ingest(ingest_in, ingest_assets, common);
    if (*den) return cmd_denoise(den_in, den_column, den_levels, den_wavelet, den_window, den_out);
    if (*sel) return cmd_select(sel_in, sel_k, sel_train_end, sel_threads, sel_out);
    if (*train) return cmd_train(common);
    if (*bt) return cmd_backtest(common, bt_checkpoint);
    if (*cmp) return cmd_compare(common, cmp_threads);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::out_of_range& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
