#include "folio/weights.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace folio {

bool on_simplex(std::span<const double> w, double sum_tol, double neg_tol) {
  if (w.empty()) return false;
  double sum = 0.0;
  for (double x : w) {
    if (!std::isfinite(x) || x < -neg_tol) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= sum_tol;
}

PortfolioWeights::PortfolioWeights(std::vector<double> w) : w_(std::move(w)) {
  if (!on_simplex(w_)) {
    double sum = std::accumulate(w_.begin(), w_.end(), 0.0);
    throw std::invalid_argument("portfolio weights off the simplex (size " +
                                std::to_string(w_.size()) + ", sum " +
                                std::to_string(sum) + ")");
  }
}

PortfolioWeights PortfolioWeights::cash_only(std::size_t num_assets) {
  std::vector<double> w(num_assets, 0.0);
  w.at(0) = 1.0;
  return PortfolioWeights(std::move(w));
}

PortfolioWeights PortfolioWeights::uniform(std::size_t num_assets) {
  return PortfolioWeights(
      std::vector<double>(num_assets, 1.0 / static_cast<double>(num_assets)));
}

}  // namespace folio
