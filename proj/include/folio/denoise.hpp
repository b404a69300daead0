#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "folio/market_data.hpp"

namespace folio {

/// Orthogonal wavelet filter bank. Decomposition filters are applied as
/// out[o] = sum_j filter[j] * x[2o + 1 - j] over a half-sample symmetric
/// extension of x.
struct Wavelet {
  std::string id;
  std::vector<double> dec_lo;
  std::vector<double> dec_hi;
  std::vector<double> rec_lo;
  std::vector<double> rec_hi;

  std::size_t length() const { return dec_lo.size(); }

  /// "haar" (alias "db1"), "db2", "db3", "db4". Throws std::invalid_argument
  /// for anything else.
  static const Wavelet& get(std::string_view id);
};

/// Multi-level discrete wavelet transform of a 1-D signal.
///
/// `details[0]` holds the finest (level-1) band, `details.back()` the
/// coarsest. `level_lengths[j]` is the length of the signal fed into level
/// j+1, so reconstruction can trim the one-sample overhang that symmetric
/// extension produces for odd lengths.
struct WaveletDecomposition {
  std::vector<double> approx;
  std::vector<std::vector<double>> details;
  std::string wavelet_id;
  std::size_t original_len = 0;
  std::vector<std::size_t> level_lengths;

  std::size_t levels() const { return details.size(); }
};

/// Single-level analysis step; returns {approx, detail}.
std::pair<std::vector<double>, std::vector<double>> dwt_step(
    std::span<const double> x, const Wavelet& w);
/// Single-level synthesis; output has 2*n - filter_len + 2 samples.
std::vector<double> idwt_step(std::span<const double> approx,
                              std::span<const double> detail, const Wavelet& w);

WaveletDecomposition decompose(std::span<const double> signal,
                               std::size_t levels,
                               const Wavelet& wavelet = Wavelet::get("db4"));
std::vector<double> reconstruct(const WaveletDecomposition& dec);

/// sqrt(2 ln n) * median(|D|) / 0.6745, with D the level-1 detail band and
/// n the original signal length.
double universal_threshold(std::span<const double> level1_details,
                           std::size_t n);

/// Sign-preserving soft thresholding: 0 inside [-t, t], else
/// sign(d) * (|d| - t).
std::vector<double> soft_shrink(std::span<const double> details, double t);

/// decompose -> shrink every detail band with the level-1 universal
/// threshold -> reconstruct. Output length equals input length.
std::vector<double> denoise_series(std::span<const double> signal,
                                   std::size_t levels,
                                   const Wavelet& wavelet = Wavelet::get("db4"));

/// Causal variant: out[t] is the last sample of denoise_series applied to
/// signal[t - window + 1 .. t] (shorter at the start). Samples with fewer
/// than 2^levels points of history are passed through unchanged.
std::vector<double> rolling_denoise(std::span<const double> signal,
                                    std::size_t window, std::size_t levels,
                                    const Wavelet& wavelet = Wavelet::get("db4"));

struct DenoiseOptions {
  std::size_t levels = 2;
  std::string wavelet = "db4";
  std::size_t window = 64;
};

/// Adds a "close_denoised" channel computed with rolling_denoise on each
/// risky asset's close. Cash stays at 1.
PriceSeries attach_denoised_close(const PriceSeries& series,
                                  const DenoiseOptions& options = {});

}  // namespace folio
