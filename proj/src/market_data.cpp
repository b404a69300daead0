#include "folio/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "folio/error.hpp"

namespace folio {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(trim(std::string_view(line).substr(start)));
      break;
    }
    out.push_back(trim(std::string_view(line).substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

bool is_missing(const std::string& field) {
  if (field.empty()) return true;
  std::string lower = field;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return lower == "na" || lower == "nan" || lower == "null" || lower == "n/a";
}

bool parse_double(const std::string& field, double& out) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() > suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

bool is_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  int month = std::stoi(s.substr(5, 2));
  int day = std::stoi(s.substr(8, 2));
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

PriceSeries::PriceSeries(std::vector<std::string> dates,
                         std::vector<std::string> asset_names,
                         std::vector<std::string> feature_names,
                         std::vector<double> prices, std::size_t context_days)
    : dates_(std::move(dates)),
      asset_names_(std::move(asset_names)),
      feature_names_(std::move(feature_names)),
      prices_(std::move(prices)),
      context_days_(context_days) {
  validate();
}

void PriceSeries::validate() const {
  if (asset_names_.empty()) throw DataError("price series has no assets");
  if (feature_names_.empty() || feature_names_[0] != kFeatureClose) {
    throw DataError("price series channel 0 must be 'close'");
  }
  if (prices_.size() != num_assets() * num_days() * num_features()) {
    throw DataError("price buffer size does not match assets x days x features");
  }
  if (context_days_ > num_days()) {
    throw DataError("context days exceed series length");
  }
  for (std::size_t d = 1; d < dates_.size(); ++d) {
    if (!(dates_[d - 1] < dates_[d])) {
      throw DataError("dates not strictly increasing at '" + dates_[d] + "'");
    }
  }
  for (std::size_t f = 0; f < num_features(); ++f) {
    // Derived channels (e.g. the denoised close) only need to be finite.
    const bool raw = feature_names_[f] == kFeatureClose ||
                     feature_names_[f] == kFeatureHigh;
    for (std::size_t a = 0; a < num_assets(); ++a) {
      for (std::size_t d = 0; d < num_days(); ++d) {
        double v = at(a, d, f);
        if (!std::isfinite(v) || (raw && v <= 0.0)) {
          throw DataError("invalid " + feature_names_[f] + " price for " +
                          asset_names_[a] + " on " + dates_[d]);
        }
        if (a == kCashIndex && v != 1.0) {
          throw DataError("cash row must be the constant 1.0");
        }
      }
    }
  }
}

std::size_t PriceSeries::feature_index(const std::string& name) const {
  auto it = std::find(feature_names_.begin(), feature_names_.end(), name);
  if (it == feature_names_.end()) {
    throw DataError("price series has no feature '" + name + "'");
  }
  return static_cast<std::size_t>(it - feature_names_.begin());
}

std::vector<double> PriceSeries::channel(std::size_t asset,
                                         std::size_t feature) const {
  std::vector<double> out(num_days());
  for (std::size_t d = 0; d < num_days(); ++d) out[d] = at(asset, d, feature);
  return out;
}

PriceSeries PriceSeries::slice(std::size_t first, std::size_t last,
                               std::size_t context_days) const {
  if (first > last || last > num_days()) {
    throw std::out_of_range("slice [" + std::to_string(first) + ", " +
                            std::to_string(last) + ") outside series");
  }
  const std::size_t n = last - first;
  std::vector<double> prices(num_assets() * n * num_features());
  for (std::size_t a = 0; a < num_assets(); ++a) {
    for (std::size_t d = 0; d < n; ++d) {
      for (std::size_t f = 0; f < num_features(); ++f) {
        prices[(a * n + d) * num_features() + f] = at(a, first + d, f);
      }
    }
  }
  return PriceSeries(
      std::vector<std::string>(dates_.begin() + static_cast<long>(first),
                               dates_.begin() + static_cast<long>(last)),
      asset_names_, feature_names_, std::move(prices), context_days);
}

PriceSeries PriceSeries::select_features(
    const std::vector<std::string>& names) const {
  std::vector<std::size_t> idx;
  for (const auto& n : names) idx.push_back(feature_index(n));
  std::vector<double> prices(num_assets() * num_days() * idx.size());
  for (std::size_t a = 0; a < num_assets(); ++a) {
    for (std::size_t d = 0; d < num_days(); ++d) {
      for (std::size_t f = 0; f < idx.size(); ++f) {
        prices[(a * num_days() + d) * idx.size() + f] = at(a, d, idx[f]);
      }
    }
  }
  return PriceSeries(dates_, asset_names_, names, std::move(prices),
                     context_days_);
}

PriceSeries PriceSeries::select_assets(
    const std::vector<std::size_t>& risky) const {
  std::vector<std::size_t> keep{kCashIndex};
  for (auto r : risky) {
    if (r == kCashIndex || r >= num_assets()) {
      throw std::out_of_range("risky asset index " + std::to_string(r));
    }
    keep.push_back(r);
  }
  std::vector<std::string> names;
  std::vector<double> prices;
  prices.reserve(keep.size() * num_days() * num_features());
  for (auto a : keep) {
    names.push_back(asset_names_[a]);
    auto first = prices_.begin() +
                 static_cast<long>(a * num_days() * num_features());
    prices.insert(prices.end(), first,
                  first + static_cast<long>(num_days() * num_features()));
  }
  return PriceSeries(dates_, std::move(names), feature_names_,
                     std::move(prices), context_days_);
}

PriceSeries PriceSeries::with_feature(const std::string& name,
                                      const std::vector<double>& values) const {
  if (values.size() != num_assets() * num_days()) {
    throw DataError("feature '" + name + "' has wrong length");
  }
  const std::size_t nf = num_features() + 1;
  std::vector<double> prices(num_assets() * num_days() * nf);
  for (std::size_t a = 0; a < num_assets(); ++a) {
    for (std::size_t d = 0; d < num_days(); ++d) {
      for (std::size_t f = 0; f < num_features(); ++f) {
        prices[(a * num_days() + d) * nf + f] = at(a, d, f);
      }
      prices[(a * num_days() + d) * nf + num_features()] =
          a == kCashIndex ? 1.0 : values[a * num_days() + d];
    }
  }
  auto names = feature_names_;
  names.push_back(name);
  return PriceSeries(dates_, asset_names_, std::move(names), std::move(prices),
                     context_days_);
}

IngestResult ingest_csv_text(const std::string& text, const CsvSchema& schema,
                             const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;

  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_fields(line);
      break;
    }
  }
  if (header.empty()) throw DataError(source + ": empty CSV");

  auto column = [&](const std::string& name) -> long {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<long>(it - header.begin());
  };
  const long date_col = column(schema.date_column);
  if (date_col < 0) {
    throw DataError(source + ": missing date column '" + schema.date_column +
                    "'");
  }

  std::vector<std::string> assets = schema.assets;
  if (assets.empty()) {
    for (const auto& h : header) {
      if (ends_with(h, schema.close_suffix)) {
        assets.push_back(h.substr(0, h.size() - schema.close_suffix.size()));
      }
    }
  }
  if (assets.empty()) throw DataError(source + ": no '*_close' columns");

  std::vector<long> close_cols, high_cols;
  for (const auto& a : assets) {
    long c = column(a + schema.close_suffix);
    long h = column(a + schema.high_suffix);
    if (c < 0 || h < 0) {
      throw DataError(source + ": asset '" + a + "' needs " + a +
                      schema.close_suffix + " and " + a + schema.high_suffix +
                      " columns");
    }
    close_cols.push_back(c);
    high_cols.push_back(h);
  }

  const std::size_t m = assets.size();
  std::vector<std::string> dates;
  // [day][risky asset][close, high]
  std::vector<double> rows;
  std::size_t dropped = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw DataError(source + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    const std::string& date = fields[static_cast<std::size_t>(date_col)];
    if (!is_iso_date(date)) {
      throw DataError(source + ":" + std::to_string(line_no) +
                      ": malformed date '" + date + "'");
    }
    std::vector<double> vals(2 * m);
    bool missing = false;
    for (std::size_t i = 0; i < m && !missing; ++i) {
      for (int k = 0; k < 2; ++k) {
        const auto& f = fields[static_cast<std::size_t>(
            k == 0 ? close_cols[i] : high_cols[i])];
        if (is_missing(f)) {
          missing = true;
          break;
        }
        double v = 0.0;
        if (!parse_double(f, v)) {
          throw DataError(source + ":" + std::to_string(line_no) +
                          ": cannot parse '" + f + "' as a price");
        }
        if (!(v > 0.0) || !std::isfinite(v)) {
          throw DataError(source + ":" + std::to_string(line_no) +
                          ": non-positive price " + f + " for " + assets[i]);
        }
        vals[2 * i + static_cast<std::size_t>(k)] = v;
      }
    }
    if (missing) {
      ++dropped;
      continue;
    }
    if (!dates.empty() && !(dates.back() < date)) {
      throw DataError(source + ":" + std::to_string(line_no) + ": date " +
                      date + " not after " + dates.back());
    }
    dates.push_back(date);
    rows.insert(rows.end(), vals.begin(), vals.end());
  }

  const std::size_t n = dates.size();
  if (n < schema.min_days) {
    throw DataError(source + ": insufficient data, " + std::to_string(n) +
                    " usable days but at least " +
                    std::to_string(schema.min_days) + " required");
  }

  std::vector<std::string> names{"CASH"};
  names.insert(names.end(), assets.begin(), assets.end());
  std::vector<double> prices((m + 1) * n * 2, 1.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t d = 0; d < n; ++d) {
      prices[((i + 1) * n + d) * 2 + 0] = rows[d * 2 * m + 2 * i];
      prices[((i + 1) * n + d) * 2 + 1] = rows[d * 2 * m + 2 * i + 1];
    }
  }
  return IngestResult{
      PriceSeries(std::move(dates), std::move(names),
                  {kFeatureClose, kFeatureHigh}, std::move(prices)),
      dropped};
}

IngestResult ingest_csv(const std::filesystem::path& path,
                        const CsvSchema& schema) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  return ingest_csv_text(buf.str(), schema, path.string());
}

PriceRelative price_relative(const PriceSeries& series, std::size_t t) {
  if (t < 1 || t >= series.num_days()) {
    throw std::out_of_range("price_relative: day " + std::to_string(t) +
                            " outside [1, " +
                            std::to_string(series.num_days()) + ")");
  }
  PriceRelative out;
  out.y.resize(series.num_assets());
  for (std::size_t i = 0; i < series.num_assets(); ++i) {
    out.y[i] = i == series.cash_index()
                   ? 1.0
                   : series.close(i, t) / series.close(i, t - 1);
  }
  return out;
}

StateTensor::StateTensor(std::shared_ptr<const std::vector<double>> window,
                         std::size_t num_assets, std::size_t window_size,
                         std::size_t num_features, PortfolioWeights prev_weights,
                         std::size_t t)
    : window_(std::move(window)),
      num_assets_(num_assets),
      window_size_(window_size),
      num_features_(num_features),
      prev_weights_(std::move(prev_weights)),
      t_(t) {
  if (!window_ || window_->size() != num_assets * window_size * num_features) {
    throw std::invalid_argument("state window has wrong shape");
  }
  if (prev_weights_.size() != num_assets) {
    throw std::invalid_argument("state prev_weights length != num_assets");
  }
}

StateTensor StateTensor::with_prev_weights(PortfolioWeights w) const {
  return StateTensor(window_, num_assets_, window_size_, num_features_,
                     std::move(w), t_);
}

bool StateTensor::operator==(const StateTensor& other) const {
  return num_assets_ == other.num_assets_ &&
         window_size_ == other.window_size_ &&
         num_features_ == other.num_features_ && t_ == other.t_ &&
         prev_weights_ == other.prev_weights_ &&
         (window_ == other.window_ ||
          (window_ && other.window_ && *window_ == *other.window_));
}

std::vector<double> build_window(const PriceSeries& series, std::size_t t,
                                 std::size_t window_size) {
  if (window_size == 0) throw std::invalid_argument("window_size must be >= 1");
  if (t < window_size) {
    throw DataError("insufficient history: state at day " + std::to_string(t) +
                    " needs t >= window_size " + std::to_string(window_size));
  }
  if (t >= series.num_days()) {
    throw std::out_of_range("build_state: day " + std::to_string(t) +
                            " past end of series");
  }
  const std::size_t na = series.num_assets();
  const std::size_t nf = series.num_features();
  std::vector<double> w(na * window_size * nf);
  for (std::size_t a = 0; a < na; ++a) {
    const double last_close = series.close(a, t);
    for (std::size_t k = 0; k < window_size; ++k) {
      const std::size_t day = t + 1 + k - window_size;
      for (std::size_t f = 0; f < nf; ++f) {
        w[(a * window_size + k) * nf + f] = series.at(a, day, f) / last_close;
      }
    }
  }
  return w;
}

StateTensor build_state(const PriceSeries& series, std::size_t t,
                        std::size_t window_size,
                        const PortfolioWeights& prev_weights) {
  auto window = std::make_shared<const std::vector<double>>(
      build_window(series, t, window_size));
  return StateTensor(std::move(window), series.num_assets(), window_size,
                     series.num_features(), prev_weights, t);
}

SplitResult split(const PriceSeries& series, const std::string& train_end,
                  const std::string& test_end, std::size_t context_days) {
  const auto& dates = series.dates();
  if (dates.empty()) throw DataError("split: empty series");
  if (!(train_end < test_end)) {
    throw DataError("split: train_end " + train_end +
                    " must precede test_end " + test_end);
  }
  if (train_end < dates.front() || test_end > dates.back()) {
    throw DataError("split: dates " + train_end + " .. " + test_end +
                    " outside series range " + dates.front() + " .. " +
                    dates.back());
  }
  const auto n_train = static_cast<std::size_t>(
      std::upper_bound(dates.begin(), dates.end(), train_end) - dates.begin());
  const auto n_end = static_cast<std::size_t>(
      std::upper_bound(dates.begin(), dates.end(), test_end) - dates.begin());
  if (n_end == n_train) {
    throw DataError("split: empty test period after " + train_end);
  }
  if (context_days > n_train) {
    throw DataError("split: " + std::to_string(context_days) +
                    " context days requested but training part has only " +
                    std::to_string(n_train));
  }
  return SplitResult{series.slice(0, n_train),
                     series.slice(n_train - context_days, n_end, context_days)};
}

}  // namespace folio
