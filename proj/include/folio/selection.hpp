#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "folio/market_data.hpp"

namespace folio {

/// Sample covariance of simple daily close-to-close returns, with `ridge`
/// already added to the diagonal.
struct CovarianceEstimate {
  Eigen::MatrixXd matrix;
  std::vector<std::string> asset_ids;
  double ridge = 0.0;
};

/// Unconstrained minimum-variance portfolio over a fixed asset set. Weights
/// sum to one and may be negative.
struct MinVarResult {
  Eigen::VectorXd weights;
  double variance = 0.0;
  std::vector<std::string> subset;
};

struct CovarianceOptions {
  /// Absolute diagonal ridge. When unset: relative_ridge * trace(C) / K,
  /// floored at min_ridge.
  std::optional<double> ridge;
  double relative_ridge = 1e-8;
  double min_ridge = 1e-12;
};

/// Daily simple returns (v_t - v_{t-1}) / v_{t-1} of the close channel,
/// one column per asset in `assets`. Shape (num_days - 1) x |assets|.
Eigen::MatrixXd simple_returns(const PriceSeries& series,
                               const std::vector<std::size_t>& assets);

/// `assets` are asset indices into `series` and must exclude cash. Requires
/// at least three return observations.
CovarianceEstimate empirical_covariance(const PriceSeries& series,
                                        const std::vector<std::size_t>& assets,
                                        const CovarianceOptions& options = {});

/// w* = C^-1 1 / (1' C^-1 1), sigma^2 = 1 / (1' C^-1 1), via a Cholesky
/// solve. Throws NumericalError if C is not positive definite.
MinVarResult min_variance_weights(const CovarianceEstimate& cov);

std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

struct SelectionOptions {
  std::uint64_t enumeration_cap = 20'000'000;
  /// Worker threads; 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
  CovarianceOptions covariance;
  /// Called with (combinations done, total) as work chunks finish.
  std::function<void(std::uint64_t, std::uint64_t)> progress;
};

struct SubsetSearchResult {
  MinVarResult best;
  /// Asset indices (into the series) of the winning subset, ascending.
  std::vector<std::size_t> indices;
  std::uint64_t combinations_visited = 0;
};

/// Exhaustive search over all k-subsets of `universe` for the minimal
/// sigma^2. Ties go to the lexicographically smallest index tuple.
SubsetSearchResult select_subset(const PriceSeries& series, std::size_t k,
                                 const std::vector<std::size_t>& universe,
                                 const SelectionOptions& options = {});

/// Same search over a precomputed covariance of the whole universe;
/// returned indices are positions in `cov`.
SubsetSearchResult select_subset(const CovarianceEstimate& cov, std::size_t k,
                                 const SelectionOptions& options = {});

}  // namespace folio
