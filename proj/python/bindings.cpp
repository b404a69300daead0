#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "folio/backtest.hpp"
#include "folio/baselines.hpp"
#include "folio/config.hpp"
#include "folio/denoise.hpp"
#include "folio/error.hpp"
#include "folio/market_data.hpp"
#include "folio/portfolio_env.hpp"
#include "folio/selection.hpp"

namespace py = pybind11;
using namespace folio;

namespace {

py::dict info_dict(const StepInfo& i) {
  py::dict d;
  d["drifted"] = i.drifted.vec();
  d["turnover"] = i.turnover;
  d["gross_return"] = i.gross_return;
  d["wealth_ratio"] = i.wealth_ratio;
  d["a_term"] = i.a_term;
  d["degenerate_volatility"] = i.degenerate_volatility;
  d["cost_exceeded"] = i.cost_exceeded;
  return d;
}

py::dict report_dict(const BacktestReport& r) {
  py::dict d;
  d["agent"] = r.agent;
  d["assets"] = r.asset_names;
  std::vector<std::string> dates;
  std::vector<double> wealth, reward, turnover;
  for (const auto& row : r.daily) {
    dates.push_back(row.date);
    wealth.push_back(row.wealth);
    reward.push_back(row.reward);
    turnover.push_back(row.turnover);
  }
  d["dates"] = dates;
  d["wealth"] = wealth;
  d["reward"] = reward;
  d["turnover"] = turnover;
  d["final_wealth"] = r.metrics.final_wealth;
  d["sharpe"] = r.metrics.sharpe ? py::cast(*r.metrics.sharpe) : py::none();
  d["max_drawdown"] = r.metrics.max_drawdown;
  std::ostringstream csv;
  write_report_csv(csv, r);
  d["csv"] = csv.str();
  return d;
}

CovarianceEstimate as_cov(const Eigen::MatrixXd& m) {
  CovarianceEstimate c;
  c.matrix = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i) c.asset_ids.push_back(std::to_string(i));
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the folio portfolio toolkit";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  // denoising
  m.def(
      "decompose",
      [](const std::vector<double>& x, std::size_t levels, const std::string& wavelet) {
        const auto d = decompose(x, levels, Wavelet::get(wavelet));
        return py::make_tuple(d.approx, d.details);
      },
      py::arg("signal"), py::arg("levels"), py::arg("wavelet") = "db4",
      "Returns (approx, [detail_1, ..., detail_J]), finest level first.");
  m.def(
      "round_trip",
      [](const std::vector<double>& x, std::size_t levels, const std::string& wavelet) {
        return reconstruct(decompose(x, levels, Wavelet::get(wavelet)));
      },
      py::arg("signal"), py::arg("levels"), py::arg("wavelet") = "db4");
  m.def("universal_threshold",
        [](const std::vector<double>& d, std::size_t n) { return universal_threshold(d, n); },
        py::arg("level1_details"), py::arg("n"));
  m.def("soft_shrink",
        [](const std::vector<double>& d, double t) { return soft_shrink(d, t); },
        py::arg("details"), py::arg("t"));
  m.def(
      "denoise",
      [](const std::vector<double>& x, std::size_t levels, const std::string& wavelet,
         std::size_t window) {
        const auto& w = Wavelet::get(wavelet);
        return window == 0 ? denoise_series(x, levels, w) : rolling_denoise(x, window, levels, w);
      },
      py::arg("signal"), py::arg("levels") = 2, py::arg("wavelet") = "db4",
      py::arg("window") = 0, "Whole-series denoising, or causal rolling when window > 0.");

  // selection
  m.def(
      "min_variance_weights",
      [](const Eigen::MatrixXd& cov) {
        const auto r = min_variance_weights(as_cov(cov));
        return py::make_tuple(Eigen::VectorXd(r.weights), r.variance);
      },
      py::arg("cov"));
  m.def(
      "select_subset",
      [](const Eigen::MatrixXd& cov, std::size_t k, unsigned threads) {
        SelectionOptions opt;
        opt.threads = threads;
        const auto r = select_subset(as_cov(cov), k, opt);
        py::dict d;
        d["indices"] = r.indices;
        d["weights"] = Eigen::VectorXd(r.best.weights);
        d["variance"] = r.best.variance;
        d["combinations_visited"] = r.combinations_visited;
        return d;
      },
      py::arg("cov"), py::arg("k"), py::arg("threads") = 1);
  m.def("binomial", &binomial, py::arg("n"), py::arg("k"));

  // market data and environment
  py::class_<PriceSeries, std::shared_ptr<PriceSeries>>(m, "PriceSeries")
      .def_static(
          "from_csv",
          [](const std::filesystem::path& path, std::vector<std::string> assets) {
            CsvSchema schema;
            schema.assets = std::move(assets);
            schema.min_days = 2;
            return std::make_shared<PriceSeries>(ingest_csv(path, schema).series);
          },
          py::arg("path"), py::arg("assets") = std::vector<std::string>{})
      .def_static(
          "from_closes",
          [](std::vector<std::string> dates, std::vector<std::string> names,
             const std::vector<std::vector<double>>& closes) {
            std::vector<double> raw;
            for (const auto& row : closes) raw.insert(raw.end(), row.begin(), row.end());
            return std::make_shared<PriceSeries>(std::move(dates), std::move(names),
                                                 std::vector<std::string>{"close"},
                                                 std::move(raw));
          },
          py::arg("dates"), py::arg("asset_names"), py::arg("closes"),
          "`closes` is [asset][day] and must include the cash row first.")
      .def_property_readonly("dates", &PriceSeries::dates)
      .def_property_readonly("asset_names", &PriceSeries::asset_names)
      .def_property_readonly("feature_names", &PriceSeries::feature_names)
      .def_property_readonly("num_days", &PriceSeries::num_days)
      .def("close", &PriceSeries::close, py::arg("asset"), py::arg("day"));

  py::class_<EnvConfig>(m, "EnvConfig")
      .def(py::init<>())
      .def_readwrite("mu", &EnvConfig::mu)
      .def_readwrite("beta", &EnvConfig::beta)
      .def_readwrite("vol_window", &EnvConfig::vol_window)
      .def_readwrite("window_size", &EnvConfig::window_size)
      .def_readwrite("gamma", &EnvConfig::gamma);

  py::class_<PortfolioEnv>(m, "PortfolioEnv")
      .def(py::init([](std::shared_ptr<PriceSeries> s, EnvConfig c) {
             return PortfolioEnv(std::move(s), c);
           }),
           py::arg("series"), py::arg("config") = EnvConfig{})
      .def(
          "reset",
          [](PortfolioEnv& env, std::size_t start, std::optional<std::vector<double>> w0) {
            std::optional<PortfolioWeights> init;
            if (w0) init = PortfolioWeights(*w0);
            env.reset(start, init);
            return env.t();
          },
          py::arg("start"), py::arg("initial") = py::none())
      .def(
          "step",
          [](PortfolioEnv& env, const std::vector<double>& action) {
            const auto s = env.step(PortfolioWeights(action));
            return py::make_tuple(s.reward, s.done, info_dict(s.info));
          },
          py::arg("action"), "Returns (reward, done, info).")
      .def_property_readonly("t", &PortfolioEnv::t)
      .def_property_readonly("wealth", &PortfolioEnv::wealth)
      .def_property_readonly("done", &PortfolioEnv::done)
      .def_property_readonly("min_start", &PortfolioEnv::min_start)
      .def_property_readonly("held", [](const PortfolioEnv& e) { return e.held().vec(); });

  m.def("baseline_action",
        [](const std::string& kind, const PriceSeries& s, std::size_t t, bool include_cash) {
          return BaselinePolicy{parse_baseline(kind), include_cash}.act(s, t).vec();
        },
        py::arg("kind"), py::arg("series"), py::arg("t"), py::arg("include_cash") = false);

  // metrics and runs
  m.def("max_drawdown", [](const std::vector<double>& w) { return max_drawdown(w); },
        py::arg("wealth"));
  m.def("sharpe",
        [](const std::vector<double>& r, std::size_t periods) { return sharpe(r, periods); },
        py::arg("log_returns"), py::arg("periods_per_year") = 252);
  m.def("default_config", [] { return to_config_text(RunConfig{}); });
  m.def(
      "normalize_config",
      [](const std::string& text) { return to_config_text(parse_config(text)); },
      py::arg("text"), "Parses and re-serializes a config; raises ConfigError.");
  m.def(
      "run_compare",
      [](const std::string& config_text, unsigned threads) {
        const auto cfg = parse_config(config_text);
        std::vector<BacktestReport> reports;
        {
          py::gil_scoped_release release;
          reports = run_compare(cfg, threads);
        }
        py::list out;
        for (const auto& r : reports) out.append(report_dict(r));
        return out;
      },
      py::arg("config_text"), py::arg("threads") = 0);
}
