#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "folio/agents.hpp"
#include "folio/denoise.hpp"
#include "folio/portfolio_env.hpp"
#include "folio/training.hpp"

namespace folio {

/// Everything needed to reproduce a run. Serializes to the flat
/// `key = value` format described in the README.
struct RunConfig {
  // data
  std::string data_path = "data/fixtures/synthetic_4asset.csv";
  /// Risky assets to load; empty loads every `<ASSET>_close` column.
  std::vector<std::string> assets;
  std::string train_end = "2016-12-31";
  std::string test_end = "2017-09-01";
  /// Observation channels; "close_denoised" triggers wavelet denoising.
  std::vector<std::string> features = {"close", "high", "close_denoised"};
  std::size_t denoise_levels = 2;
  std::string denoise_wavelet = "db4";
  std::size_t denoise_window = 64;

  // environment
  EnvConfig env;
  std::string initial_weights = "cash";

  // run
  std::string agent = "ucrp";
  std::vector<std::string> agents = {"ucrp", "winner", "loser", "ddpg", "gdpg", "ppo"};
  std::uint64_t seed = 42;
  bool include_cash_ucrp = false;
  std::size_t periods_per_year = 252;

  // training
  std::size_t episodes = 30;
  std::size_t episode_length = 200;
  double noise_sigma_final = 0.0;
  std::size_t updates_per_step = 1;
  std::size_t warmup_steps = 0;
  AgentConfig learner;

  /// Throws ConfigError on any out-of-range value.
  void validate() const;
};

RunConfig parse_config(const std::string& text,
                       const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);
/// Every key, one per line, in a fixed order; parse_config(to_config_text(c))
/// reproduces c exactly.
std::string to_config_text(const RunConfig& config);
/// Sets one key from its textual value, as if read from a file.
void set_config_value(RunConfig& config, const std::string& key,
                      const std::string& value);
std::vector<std::string> config_keys();

/// Seed for one agent of a run: stable across agent orderings.
std::uint64_t agent_seed(std::uint64_t run_seed, const std::string& agent);

AgentConfig make_agent_config(const RunConfig& config, std::uint64_t seed);
TrainConfig make_train_config(const RunConfig& config, std::uint64_t seed);
DenoiseOptions make_denoise_options(const RunConfig& config);

}  // namespace folio
