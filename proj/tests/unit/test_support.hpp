#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "folio/market_data.hpp"

namespace folio::test {

inline std::filesystem::path source_dir() { return FOLIO_SOURCE_DIR; }

inline std::filesystem::path fixture_csv() {
  return source_dir() / "data" / "fixtures" / "synthetic_4asset.csv";
}

inline nlohmann::json load_oracle(const std::string& name) {
  std::ifstream in(source_dir() / "tests" / "oracles" / "data" / name);
  if (!in) throw std::runtime_error("missing oracle data " + name);
  return nlohmann::json::parse(in);
}

/// Close-only series from per-asset paths; cash is prepended.
inline PriceSeries series_from_closes(const std::vector<std::vector<double>>& risky,
                                      std::size_t context = 0) {
  const std::size_t days = risky.empty() ? 0 : risky.front().size();
  std::vector<std::string> dates, names = {"CASH"};
  for (std::size_t d = 0; d < days; ++d) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "D%05zu", d);
    dates.emplace_back(buf);
  }
  std::vector<double> prices(days, 1.0);
  for (std::size_t a = 0; a < risky.size(); ++a) {
    names.push_back("A" + std::to_string(a + 1));
    prices.insert(prices.end(), risky[a].begin(), risky[a].end());
  }
  return PriceSeries(dates, names, {"close"}, prices, context);
}

/// Geometric random walks with iid log-normal daily relatives.
inline std::vector<std::vector<double>> random_paths(std::size_t assets,
                                                     std::size_t days,
                                                     double vol,
                                                     std::uint64_t seed,
                                                     double drift = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<std::vector<double>> out(assets, std::vector<double>(days));
  for (auto& p : out) {
    p[0] = 100.0;
    for (std::size_t d = 1; d < days; ++d) p[d] = p[d - 1] * std::exp(drift + vol * n(rng));
  }
  return out;
}

/// Uniform point on the simplex of size n.
inline std::vector<double> random_simplex(std::size_t n, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(n);
  double s = 0.0;
  for (auto& v : w) s += (v = e(rng));
  for (auto& v : w) v /= s;
  return w;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace folio::test
