#include "folio/baselines.hpp"

#include <stdexcept>
#include <vector>

namespace folio {

BaselineKind parse_baseline(const std::string& name) {
  if (name == "ucrp") return BaselineKind::kUcrp;
  if (name == "winner") return BaselineKind::kWinner;
  if (name == "loser") return BaselineKind::kLoser;
  throw std::invalid_argument("unknown baseline '" + name + "'");
}

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kUcrp:
      return "ucrp";
    case BaselineKind::kWinner:
      return "winner";
    case BaselineKind::kLoser:
      return "loser";
  }
  return "?";
}

PortfolioWeights ucrp_action(std::size_t m, bool include_cash) {
  if (m < 1) throw std::invalid_argument("ucrp needs at least one risky asset");
  if (include_cash) return PortfolioWeights::uniform(m + 1);
  std::vector<double> w(m + 1, 1.0 / static_cast<double>(m));
  w[0] = 0.0;
  return PortfolioWeights(std::move(w));
}

namespace {

PortfolioWeights one_hot_extreme(const PriceRelative& y, bool highest) {
  if (y.size() < 2) throw std::invalid_argument("need at least one risky asset");
  std::size_t best = 1;
  for (std::size_t i = 2; i < y.size(); ++i) {
    if (highest ? y[i] > y[best] : y[i] < y[best]) best = i;
  }
  std::vector<double> w(y.size(), 0.0);
  w[best] = 1.0;
  return PortfolioWeights(std::move(w));
}

}  // namespace

PortfolioWeights winner_action(const PriceRelative& y_yesterday) {
  return one_hot_extreme(y_yesterday, true);
}

PortfolioWeights loser_action(const PriceRelative& y_yesterday) {
  return one_hot_extreme(y_yesterday, false);
}

PortfolioWeights BaselinePolicy::act(const PriceSeries& series,
                                     std::size_t t) const {
  switch (kind) {
    case BaselineKind::kUcrp:
      return ucrp_action(series.num_assets() - 1, include_cash);
    case BaselineKind::kWinner:
      return winner_action(price_relative(series, t));
    case BaselineKind::kLoser:
      return loser_action(price_relative(series, t));
  }
  throw std::logic_error("unreachable baseline kind");
}

}  // namespace folio
