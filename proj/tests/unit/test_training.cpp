#include <doctest.h>

#include <sstream>

#include "folio/error.hpp"
#include "folio/training.hpp"
#include "test_support.hpp"

using namespace folio;

namespace {

AgentConfig tiny_agent(std::uint64_t seed) {
  AgentConfig c;
  c.seed = seed;
  c.sizes = {3, 3, 4, 16, 8};
  c.batch_size = 8;
  c.ppo_epochs = 2;
  return c;
}

struct Fixture {
  std::shared_ptr<const PriceSeries> series = std::make_shared<const PriceSeries>(
      test::series_from_closes(test::random_paths(2, 150, 0.02, 5)));
  EnvConfig env_cfg = [] {
    EnvConfig c;
    c.window_size = 6;
    c.vol_window = 6;
    return c;
  }();
  ModelShape shape{3, 1, 6};
  TrainConfig tc = [] {
    TrainConfig t;
    t.episodes = 4;
    t.episode_length = 25;
    t.seed = 11;
    return t;
  }();
};

}  // namespace

TEST_CASE("initial_portfolio") {
  CHECK(initial_portfolio("cash", 3).vec() == std::vector<double>{1, 0, 0});
  CHECK(initial_portfolio("uniform", 4) == PortfolioWeights::uniform(4));
  CHECK_THROWS_AS(initial_portfolio("equal", 3), ConfigError);
}

TEST_CASE("train_ddpg logs one row per episode") {
  Fixture f;
  PortfolioEnv env(f.series, f.env_cfg);
  DdpgAgent agent(f.shape, tiny_agent(3));
  std::size_t calls = 0;
  const auto log = train_ddpg(agent, env, f.tc, [&](const EpisodeLog&) { ++calls; });
  REQUIRE(log.size() == 4);
  CHECK(calls == 4);
  for (std::size_t i = 0; i < log.size(); ++i) {
    CHECK(log[i].episode == i);
    CHECK(log[i].steps == 25);
    CHECK(std::isfinite(log[i].mean_reward));
    CHECK_FALSE(log[i].model_loss.has_value());
  }
  CHECK(log.back().actor_grad_norm > 0.0);
}

TEST_CASE("train_ddpg with GDPG reports model loss") {
  Fixture f;
  PortfolioEnv env(f.series, f.env_cfg);
  GdpgAgent agent(f.shape, tiny_agent(3));
  const auto log = train_ddpg(agent, env, f.tc);
  REQUIRE(log.size() == 4);
  CHECK(log.back().model_loss.has_value());
  std::ostringstream os;
  write_training_log(os, log);
  const auto text = os.str();
  CHECK(text.rfind("episode,steps,mean_reward,actor_grad_norm,critic_loss,model_loss\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}

TEST_CASE("train_ppo is reproducible") {
  Fixture f;
  auto run = [&] {
    PortfolioEnv env(f.series, f.env_cfg);
    PpoAgent agent(f.shape, tiny_agent(9));
    std::ostringstream os;
    write_training_log(os, train_ppo(agent, env, f.tc));
    return os.str();
  };
  const auto a = run();
  CHECK(a == run());
  CHECK(a.rfind("episode,steps,mean_reward,actor_grad_norm,critic_loss\n", 0) == 0);
}

TEST_CASE("episodes longer than the series run to the last day") {
  Fixture f;
  f.tc.episodes = 2;
  f.tc.episode_length = 500;
  PortfolioEnv env(f.series, f.env_cfg);
  DdpgAgent agent(f.shape, tiny_agent(3));
  const auto log = train_ddpg(agent, env, f.tc);
  CHECK(log[0].steps == f.series->num_days() - 1 - env.min_start());

  auto tiny = std::make_shared<const PriceSeries>(
      test::series_from_closes(test::random_paths(2, 7, 0.02, 5)));
  PortfolioEnv short_env(tiny, f.env_cfg);
  CHECK_THROWS_AS(train_ddpg(agent, short_env, f.tc), DataError);
}

TEST_CASE("evaluate_policy matches a manual rollout") {
  Fixture f;
  PortfolioEnv env(f.series, f.env_cfg);
  DdpgAgent agent(f.shape, tiny_agent(4));
  const auto w0 = PortfolioWeights::cash_only(3);
  const auto res = evaluate_policy(agent, env, 20, 30, w0);
  CHECK(res.steps == 30);
  REQUIRE(res.mean_weights.size() == 3);
  double total = 0.0;
  for (double v : res.mean_weights) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  auto s = env.reset(20, w0);
  for (int i = 0; i < 30; ++i) s = env.step(agent.act(s, false)).next_state;
  CHECK(res.final_wealth == env.wealth());

  const auto full = evaluate_policy(agent, env, 20, 0, w0);
  CHECK(full.steps == f.series->num_days() - 21);
}
