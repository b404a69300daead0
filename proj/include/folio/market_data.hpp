#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "folio/weights.hpp"

namespace folio {

inline constexpr std::size_t kCashIndex = 0;

inline constexpr const char* kFeatureClose = "close";
inline constexpr const char* kFeatureHigh = "high";
inline constexpr const char* kFeatureCloseDenoised = "close_denoised";

/// Per-asset daily feature channels. Asset 0 is always synthesized cash at a
/// constant price of 1.0 on every channel; channel 0 is always the close.
///
/// Immutable after construction. The first `context_days()` days carry
/// history only and are not tradable (used by the test split).
class PriceSeries {
 public:
  /// `prices` is laid out [asset][day][feature].
  PriceSeries(std::vector<std::string> dates,
              std::vector<std::string> asset_names,
              std::vector<std::string> feature_names,
              std::vector<double> prices, std::size_t context_days = 0);

  std::size_t num_assets() const { return asset_names_.size(); }
  std::size_t num_days() const { return dates_.size(); }
  std::size_t num_features() const { return feature_names_.size(); }
  std::size_t cash_index() const { return kCashIndex; }
  std::size_t context_days() const { return context_days_; }

  const std::vector<std::string>& dates() const { return dates_; }
  const std::vector<std::string>& asset_names() const { return asset_names_; }
  const std::vector<std::string>& feature_names() const {
    return feature_names_;
  }

  double at(std::size_t asset, std::size_t day, std::size_t feature) const {
    return prices_[(asset * num_days() + day) * num_features() + feature];
  }
  double close(std::size_t asset, std::size_t day) const {
    return at(asset, day, 0);
  }

  /// Index of a named feature channel; throws DataError if absent.
  std::size_t feature_index(const std::string& name) const;
  /// One channel of one asset as a contiguous vector over days.
  std::vector<double> channel(std::size_t asset, std::size_t feature) const;

  /// Days [first, last) as a new series; `context_days` of them leading.
  PriceSeries slice(std::size_t first, std::size_t last,
                    std::size_t context_days = 0) const;
  /// Keep only the listed feature channels, in the given order. The first
  /// entry must be "close".
  PriceSeries select_features(const std::vector<std::string>& names) const;
  /// Keep cash plus the listed risky assets (by index, cash excluded).
  PriceSeries select_assets(const std::vector<std::size_t>& risky) const;
  /// Append a channel given as [asset][day]; cash entries are forced to 1.
  PriceSeries with_feature(const std::string& name,
                           const std::vector<double>& values) const;

  const std::vector<double>& raw() const { return prices_; }

 private:
  void validate() const;

  std::vector<std::string> dates_;
  std::vector<std::string> asset_names_;
  std::vector<std::string> feature_names_;
  std::vector<double> prices_;
  std::size_t context_days_ = 0;
};

/// Column mapping for price CSVs: `date,<ASSET>_close,<ASSET>_high,...`.
struct CsvSchema {
  std::string date_column = "date";
  std::string close_suffix = "_close";
  std::string high_suffix = "_high";
  /// Risky assets to load; empty means every `<ASSET>_close` column.
  std::vector<std::string> assets;
  /// Minimum number of usable days (window_size + 2 with default window 50).
  std::size_t min_days = 52;
};

struct IngestResult {
  PriceSeries series;
  std::size_t dropped_days = 0;
};

IngestResult ingest_csv(const std::filesystem::path& path,
                        const CsvSchema& schema = {});
/// Same as ingest_csv, reading from an in-memory string. `source` names the
/// input in error messages.
IngestResult ingest_csv_text(const std::string& text, const CsvSchema& schema,
                             const std::string& source = "<memory>");

/// y_t, elementwise close[t] / close[t-1]. Entry 0 is exactly 1.
struct PriceRelative {
  std::vector<double> y;

  std::size_t size() const { return y.size(); }
  double operator[](std::size_t i) const { return y[i]; }
};

PriceRelative price_relative(const PriceSeries& series, std::size_t t);

/// Observation at day t: a window of feature values divided by each asset's
/// close on day t, plus the portfolio currently held.
///
/// The window buffer is shared and immutable, so copies are cheap; the
/// layout is [asset][window][feature].
class StateTensor {
 public:
  StateTensor() = default;
  StateTensor(std::shared_ptr<const std::vector<double>> window,
              std::size_t num_assets, std::size_t window_size,
              std::size_t num_features, PortfolioWeights prev_weights,
              std::size_t t);

  std::size_t num_assets() const { return num_assets_; }
  std::size_t window_size() const { return window_size_; }
  std::size_t num_features() const { return num_features_; }
  std::size_t t() const { return t_; }

  double at(std::size_t asset, std::size_t k, std::size_t feature) const {
    return (*window_)[(asset * window_size_ + k) * num_features_ + feature];
  }
  std::span<const double> window() const { return *window_; }
  const std::shared_ptr<const std::vector<double>>& window_ptr() const {
    return window_;
  }
  const PortfolioWeights& prev_weights() const { return prev_weights_; }

  /// Same window, different held portfolio.
  StateTensor with_prev_weights(PortfolioWeights w) const;

  bool operator==(const StateTensor& other) const;

 private:
  std::shared_ptr<const std::vector<double>> window_;
  std::size_t num_assets_ = 0;
  std::size_t window_size_ = 0;
  std::size_t num_features_ = 0;
  PortfolioWeights prev_weights_;
  std::size_t t_ = 0;
};

/// Window values only: [asset][window][feature] over days
/// t-window_size+1 .. t, divided by close[asset, t].
std::vector<double> build_window(const PriceSeries& series, std::size_t t,
                                 std::size_t window_size);

StateTensor build_state(const PriceSeries& series, std::size_t t,
                        std::size_t window_size,
                        const PortfolioWeights& prev_weights);

/// Train/test partition by ISO date. The training part holds every day up
/// to and including `train_end`; the test part holds the days after it up to
/// `test_end`, preceded by `context_days` days of non-tradable history.
struct SplitResult {
  PriceSeries train;
  PriceSeries test;
};

SplitResult split(const PriceSeries& series, const std::string& train_end,
                  const std::string& test_end, std::size_t context_days);

/// Lexicographic check for YYYY-MM-DD.
bool is_iso_date(const std::string& s);

}  // namespace folio
