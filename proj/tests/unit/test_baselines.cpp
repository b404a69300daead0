#include <doctest.h>

#include "folio/baselines.hpp"
#include "folio/portfolio_env.hpp"
#include "test_support.hpp"

using namespace folio;

using W = std::vector<double>;

TEST_CASE("ucrp_action") {
  CHECK(ucrp_action(4).vec() == W{0, 0.25, 0.25, 0.25, 0.25});
  CHECK(ucrp_action(1).vec() == W{0, 1});
  CHECK(ucrp_action(3) == ucrp_action(3));
  CHECK(ucrp_action(3, true).vec() == W{0.25, 0.25, 0.25, 0.25});
  CHECK_THROWS_AS(ucrp_action(0), std::invalid_argument);
}

TEST_CASE("winner_action") {
  CHECK(winner_action(PriceRelative{{1, 1.1, 0.9}}).vec() == W{0, 1, 0});
  CHECK(winner_action(PriceRelative{{1, 1.05, 1.05}}).vec() == W{0, 1, 0});
  CHECK(winner_action(PriceRelative{{1, 0.9, 0.95}}).vec() == W{0, 0, 1});
}

TEST_CASE("loser_action") {
  CHECK(loser_action(PriceRelative{{1, 1.1, 0.9}}).vec() == W{0, 0, 1});
  CHECK(loser_action(PriceRelative{{1, 0.95, 0.95}}).vec() == W{0, 1, 0});
  CHECK(loser_action(PriceRelative{{1, 1.2, 1.3}}).vec() == W{0, 1, 0});
}

TEST_CASE("parse_baseline round-trips and rejects unknown names") {
  for (const char* n : {"ucrp", "winner", "loser"}) CHECK(to_string(parse_baseline(n)) == n);
  CHECK_THROWS(parse_baseline("olmar"));
}

TEST_CASE("BaselinePolicy uses only the completed day") {
  auto s = test::series_from_closes({{100, 110, 50}, {100, 90, 500}});
  const BaselinePolicy winner{BaselineKind::kWinner, false};
  const BaselinePolicy loser{BaselineKind::kLoser, false};
  CHECK(winner.act(s, 1).vec() == W{0, 1, 0});
  CHECK(loser.act(s, 1).vec() == W{0, 0, 1});
  const BaselinePolicy ucrp{BaselineKind::kUcrp, false};
  CHECK(ucrp.act(s, 2).vec() == W{0, 0.5, 0.5});
}

TEST_CASE("winner and loser churn more than UCRP on iid markets") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto s = std::make_shared<const PriceSeries>(
        test::series_from_closes(test::random_paths(4, 150, 0.02, seed)));
    EnvConfig c;
    c.window_size = 5;
    double turnover[3] = {0, 0, 0};
    const BaselineKind kinds[3] = {BaselineKind::kUcrp, BaselineKind::kWinner,
                                   BaselineKind::kLoser};
    for (int k = 0; k < 3; ++k) {
      PortfolioEnv env(s, c);
      env.reset(21);
      const BaselinePolicy p{kinds[k], false};
      while (!env.done()) turnover[k] += env.step(p.act(*s, env.t())).info.turnover;
    }
    CHECK(turnover[1] > turnover[0]);
    CHECK(turnover[2] > turnover[0]);
  }
}
