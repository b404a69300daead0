#include "folio/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace folio {

namespace {

Wavelet make_orthogonal(std::string id, std::vector<double> dec_lo) {
  Wavelet w;
  w.id = std::move(id);
  const std::size_t n = dec_lo.size();
  w.dec_lo = dec_lo;
  w.rec_lo.assign(dec_lo.rbegin(), dec_lo.rend());
  w.dec_hi.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    w.dec_hi[k] = (k % 2 == 0 ? -1.0 : 1.0) * w.rec_lo[k];
  }
  w.rec_hi.assign(w.dec_hi.rbegin(), w.dec_hi.rend());
  return w;
}

// Half-sample symmetric extension: ... x1 x0 | x0 x1 ... x_{n-1} | x_{n-1} ...
inline double extended(std::span<const double> x, long i) {
  const long n = static_cast<long>(x.size());
  long p = i % (2 * n);
  if (p < 0) p += 2 * n;
  return p < n ? x[static_cast<std::size_t>(p)]
               : x[static_cast<std::size_t>(2 * n - 1 - p)];
}

double median_abs(std::span<const double> v) {
  std::vector<double> a(v.size());
  std::transform(v.begin(), v.end(), a.begin(),
                 [](double x) { return std::abs(x); });
  const std::size_t mid = a.size() / 2;
  std::nth_element(a.begin(), a.begin() + static_cast<long>(mid), a.end());
  if (a.size() % 2 == 1) return a[mid];
  const double upper = a[mid];
  const double lower =
      *std::max_element(a.begin(), a.begin() + static_cast<long>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

const Wavelet& Wavelet::get(std::string_view id) {
  static const Wavelet haar =
      make_orthogonal("haar", {0.7071067811865476, 0.7071067811865476});
  static const Wavelet db2 = make_orthogonal(
      "db2", {-0.12940952255126037, 0.2241438680420134, 0.8365163037378079,
              0.48296291314453416});
  static const Wavelet db3 = make_orthogonal(
      "db3", {0.03522629188570953, -0.08544127388202666, -0.13501102001025458,
              0.45987750211849154, 0.8068915093110925, 0.33267055295008263});
  static const Wavelet db4 = make_orthogonal(
      "db4", {-0.010597401785069032, 0.0328830116668852, 0.030841381835560764,
              -0.18703481171909309, -0.027983769416859854, 0.6308807679298589,
              0.7148465705529157, 0.2303778133088965});
  if (id == "haar" || id == "db1") return haar;
  if (id == "db2") return db2;
  if (id == "db3") return db3;
  if (id == "db4") return db4;
  throw std::invalid_argument("unknown wavelet '" + std::string(id) +
                              "' (expected haar, db1, db2, db3 or db4)");
}

std::pair<std::vector<double>, std::vector<double>> dwt_step(
    std::span<const double> x, const Wavelet& w) {
  if (x.empty()) throw std::invalid_argument("dwt_step: empty signal");
  const std::size_t f = w.length();
  const std::size_t n_out = (x.size() + f - 1) / 2;
  std::vector<double> a(n_out), d(n_out);
  for (std::size_t o = 0; o < n_out; ++o) {
    const long i = static_cast<long>(2 * o + 1);
    double sa = 0.0, sd = 0.0;
    for (std::size_t j = 0; j < f; ++j) {
      const double v = extended(x, i - static_cast<long>(j));
      sa += w.dec_lo[j] * v;
      sd += w.dec_hi[j] * v;
    }
    a[o] = sa;
    d[o] = sd;
  }
  return {std::move(a), std::move(d)};
}

std::vector<double> idwt_step(std::span<const double> approx,
                              std::span<const double> detail,
                              const Wavelet& w) {
  if (approx.size() != detail.size()) {
    throw std::invalid_argument("idwt_step: approx/detail length mismatch");
  }
  const long n = static_cast<long>(approx.size());
  const long f = static_cast<long>(w.length());
  const long out_len = 2 * n - f + 2;
  if (out_len <= 0) throw std::invalid_argument("idwt_step: too few coefficients");
  std::vector<double> out(static_cast<std::size_t>(out_len));
  for (long r = 0; r < out_len; ++r) {
    // Full convolution of the zero-upsampled bands, keeping the valid part.
    const long m = r + f - 2;
    double s = 0.0;
    const long k_lo = std::max(0L, (m - f + 2) / 2);
    const long k_hi = std::min(n - 1, m / 2);
    for (long k = k_lo; k <= k_hi; ++k) {
      const long j = m - 2 * k;
      if (j < 0 || j >= f) continue;
      s += approx[static_cast<std::size_t>(k)] * w.rec_lo[static_cast<std::size_t>(j)] +
           detail[static_cast<std::size_t>(k)] * w.rec_hi[static_cast<std::size_t>(j)];
    }
    out[static_cast<std::size_t>(r)] = s;
  }
  return out;
}

WaveletDecomposition decompose(std::span<const double> signal,
                               std::size_t levels, const Wavelet& wavelet) {
  if (levels < 1) throw std::invalid_argument("decompose: levels must be >= 1");
  if (levels >= 63 || signal.size() < (std::size_t{1} << levels)) {
    throw std::invalid_argument(
        "decompose: signal of length " + std::to_string(signal.size()) +
        " too short for " + std::to_string(levels) +
        " levels (minimum length " +
        std::to_string(levels >= 63 ? 0 : (std::size_t{1} << levels)) + ")");
  }
  WaveletDecomposition dec;
  dec.wavelet_id = wavelet.id;
  dec.original_len = signal.size();
  std::vector<double> current(signal.begin(), signal.end());
  for (std::size_t l = 0; l < levels; ++l) {
    dec.level_lengths.push_back(current.size());
    auto [a, d] = dwt_step(current, wavelet);
    dec.details.push_back(std::move(d));
    current = std::move(a);
  }
  dec.approx = std::move(current);
  return dec;
}

std::vector<double> reconstruct(const WaveletDecomposition& dec) {
  const Wavelet& w = Wavelet::get(dec.wavelet_id);
  if (dec.details.size() != dec.level_lengths.size()) {
    throw std::invalid_argument("reconstruct: inconsistent level metadata");
  }
  std::vector<double> current = dec.approx;
  for (std::size_t l = dec.levels(); l-- > 0;) {
    auto out = idwt_step(current, dec.details[l], w);
    if (out.size() < dec.level_lengths[l]) {
      throw std::invalid_argument("reconstruct: coefficient lengths inconsistent");
    }
    out.resize(dec.level_lengths[l]);
    current = std::move(out);
  }
  return current;
}

double universal_threshold(std::span<const double> level1_details,
                           std::size_t n) {
  if (n < 2) throw std::invalid_argument("universal_threshold: n must be >= 2");
  if (level1_details.empty()) {
    throw std::invalid_argument("universal_threshold: empty detail band");
  }
  return std::sqrt(2.0 * std::log(static_cast<double>(n))) *
         median_abs(level1_details) / 0.6745;
}

std::vector<double> soft_shrink(std::span<const double> details, double t) {
  if (!(t >= 0.0)) {
    throw std::invalid_argument("soft_shrink: threshold must be >= 0");
  }
  std::vector<double> out(details.size());
  for (std::size_t i = 0; i < details.size(); ++i) {
    const double d = details[i];
    const double mag = std::abs(d);
    out[i] = mag <= t ? 0.0 : std::copysign(mag - t, d);
  }
  return out;
}

std::vector<double> denoise_series(std::span<const double> signal,
                                   std::size_t levels, const Wavelet& wavelet) {
  auto dec = decompose(signal, levels, wavelet);
  const double t = universal_threshold(dec.details.front(), signal.size());
  for (auto& band : dec.details) band = soft_shrink(band, t);
  return reconstruct(dec);
}

std::vector<double> rolling_denoise(std::span<const double> signal,
                                    std::size_t window, std::size_t levels,
                                    const Wavelet& wavelet) {
  const std::size_t min_len = std::size_t{1} << levels;
  if (window < min_len) {
    throw std::invalid_argument("rolling_denoise: window " +
                                std::to_string(window) + " shorter than 2^levels");
  }
  std::vector<double> out(signal.size());
  for (std::size_t t = 0; t < signal.size(); ++t) {
    const std::size_t len = std::min(window, t + 1);
    if (len < min_len) {
      out[t] = signal[t];
      continue;
    }
    auto seg = signal.subspan(t + 1 - len, len);
    out[t] = denoise_series(seg, levels, wavelet).back();
  }
  return out;
}

PriceSeries attach_denoised_close(const PriceSeries& series,
                                  const DenoiseOptions& options) {
  const Wavelet& w = Wavelet::get(options.wavelet);
  std::vector<double> values(series.num_assets() * series.num_days(), 1.0);
  for (std::size_t a = 0; a < series.num_assets(); ++a) {
    if (a == series.cash_index()) continue;
    auto den = rolling_denoise(series.channel(a, 0), options.window,
                               options.levels, w);
    std::copy(den.begin(), den.end(),
              values.begin() + static_cast<long>(a * series.num_days()));
  }
  return series.with_feature(kFeatureCloseDenoised, values);
}

}  // namespace folio
