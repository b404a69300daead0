#pragma once

#include <cstddef>
#include <string>

#include "folio/market_data.hpp"
#include "folio/weights.hpp"

namespace folio {

enum class BaselineKind { kUcrp, kWinner, kLoser };

/// Parses "ucrp", "winner", "loser".
BaselineKind parse_baseline(const std::string& name);
std::string to_string(BaselineKind kind);

/// 1/m on every risky asset and nothing in cash; with `include_cash`,
/// 1/(m+1) everywhere.
PortfolioWeights ucrp_action(std::size_t m, bool include_cash = false);

/// All weight on the risky asset with the highest (winner) or lowest (loser)
/// price relative; ties go to the lowest index.
PortfolioWeights winner_action(const PriceRelative& y_yesterday);
PortfolioWeights loser_action(const PriceRelative& y_yesterday);

struct BaselinePolicy {
  BaselineKind kind = BaselineKind::kUcrp;
  bool include_cash = false;

  /// Action at the close of day t, using only y_t.
  PortfolioWeights act(const PriceSeries& series, std::size_t t) const;
};

}  // namespace folio
