#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace folio {

/// A point on the probability simplex over cash (index 0) and m risky
/// assets. Construction validates non-negativity and unit sum.
class PortfolioWeights {
 public:
  static constexpr double kSumTolerance = 1e-9;
  static constexpr double kNegativeTolerance = 1e-12;

  PortfolioWeights() = default;
  explicit PortfolioWeights(std::vector<double> w);

  /// All wealth in cash: [1, 0, ..., 0].
  static PortfolioWeights cash_only(std::size_t num_assets);
  /// 1/n on every entry.
  static PortfolioWeights uniform(std::size_t num_assets);

  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  std::span<const double> values() const { return w_; }
  const std::vector<double>& vec() const { return w_; }

  bool operator==(const PortfolioWeights&) const = default;

 private:
  std::vector<double> w_;
};

/// True when `w` satisfies the simplex invariant within the given tolerances.
bool on_simplex(std::span<const double> w,
                double sum_tol = PortfolioWeights::kSumTolerance,
                double neg_tol = PortfolioWeights::kNegativeTolerance);

}  // namespace folio
