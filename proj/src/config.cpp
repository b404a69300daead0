#include "folio/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "folio/error.hpp"

namespace folio {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(const std::string& v, const std::string& key) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '\\' && i + 2 < v.size()) ++i;
      out += v[i];
    }
    return out;
  }
  if (!v.empty() && v.front() == '"') {
    throw ConfigError("unterminated string for key '" + key + "'");
  }
  return v;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

double parse_real(const std::string& v, const std::string& key) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || !std::isfinite(out)) {
    throw ConfigError("key '" + key + "' expects a finite real, got '" + v + "'");
  }
  return out;
}

std::uint64_t parse_uint(const std::string& v, const std::string& key) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) {
    throw ConfigError("key '" + key + "' expects a non-negative integer, got '" +
                      v + "'");
  }
  return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("key '" + key + "' expects true or false, got '" + v + "'");
}

std::vector<std::string> parse_list(const std::string& v, const std::string& key) {
  std::vector<std::string> out;
  if (trim(v).empty()) return out;
  std::string item;
  bool in_quotes = false;
  for (char c : v) {
    if (c == '"') in_quotes = !in_quotes;
    if (c == ',' && !in_quotes) {
      out.push_back(unquote(trim(item), key));
      item.clear();
    } else {
      item += c;
    }
  }
  out.push_back(unquote(trim(item), key));
  for (const auto& s : out) {
    if (s.empty()) throw ConfigError("key '" + key + "' has an empty list item");
  }
  return out;
}

std::string real_text(double v) {
  // Shortest text that parses back to the same double.
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct Key {
  std::string name;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename M>
Key real_key(std::string name, M member) {
  return {name,
          [member](RunConfig& c, const std::string& v, const std::string& k) {
            std::invoke(member, c) = parse_real(v, k);
          },
          [member](const RunConfig& c) { return real_text(std::invoke(member, c)); }};
}

template <typename M>
Key uint_key(std::string name, M member) {
  return {name,
          [member](RunConfig& c, const std::string& v, const std::string& k) {
            using T = std::remove_reference_t<decltype(std::invoke(member, c))>;
            std::invoke(member, c) = static_cast<T>(parse_uint(v, k));
          },
          [member](const RunConfig& c) { return std::to_string(std::invoke(member, c)); }};
}

template <typename M>
Key bool_key(std::string name, M member) {
  return {name,
          [member](RunConfig& c, const std::string& v, const std::string& k) {
            std::invoke(member, c) = parse_bool(v, k);
          },
          [member](const RunConfig& c) {
            return std::string(std::invoke(member, c) ? "true" : "false");
          }};
}

template <typename M>
Key string_key(std::string name, M member) {
  return {name,
          [member](RunConfig& c, const std::string& v, const std::string& k) {
            std::invoke(member, c) = unquote(v, k);
          },
          [member](const RunConfig& c) { return quote(std::invoke(member, c)); }};
}

template <typename M>
Key list_key(std::string name, M member) {
  return {name,
          [member](RunConfig& c, const std::string& v, const std::string& k) {
            std::invoke(member, c) = parse_list(v, k);
          },
          [member](const RunConfig& c) {
            std::string out;
            for (const auto& s : std::invoke(member, c)) {
              if (!out.empty()) out += ", ";
              out += quote(s);
            }
            return out;
          }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      string_key("data_path", [](auto& c) -> auto& { return c.data_path; }),
      list_key("assets", [](auto& c) -> auto& { return c.assets; }),
      string_key("train_end", [](auto& c) -> auto& { return c.train_end; }),
      string_key("test_end", [](auto& c) -> auto& { return c.test_end; }),
      list_key("features", [](auto& c) -> auto& { return c.features; }),
      uint_key("denoise_levels", [](auto& c) -> auto& { return c.denoise_levels; }),
      string_key("denoise_wavelet", [](auto& c) -> auto& { return c.denoise_wavelet; }),
      uint_key("denoise_window", [](auto& c) -> auto& { return c.denoise_window; }),

      real_key("mu", [](auto& c) -> auto& { return c.env.mu; }),
      real_key("beta", [](auto& c) -> auto& { return c.env.beta; }),
      uint_key("vol_window", [](auto& c) -> auto& { return c.env.vol_window; }),
      uint_key("window_size", [](auto& c) -> auto& { return c.env.window_size; }),
      real_key("gamma", [](auto& c) -> auto& { return c.env.gamma; }),
      string_key("initial_weights", [](auto& c) -> auto& { return c.initial_weights; }),

      string_key("agent", [](auto& c) -> auto& { return c.agent; }),
      list_key("agents", [](auto& c) -> auto& { return c.agents; }),
      uint_key("seed", [](auto& c) -> auto& { return c.seed; }),
      bool_key("include_cash_ucrp", [](auto& c) -> auto& { return c.include_cash_ucrp; }),
      uint_key("periods_per_year", [](auto& c) -> auto& { return c.periods_per_year; }),

      uint_key("episodes", [](auto& c) -> auto& { return c.episodes; }),
      uint_key("episode_length", [](auto& c) -> auto& { return c.episode_length; }),
      real_key("noise_sigma", [](auto& c) -> auto& { return c.learner.noise_sigma; }),
      real_key("noise_sigma_final", [](auto& c) -> auto& { return c.noise_sigma_final; }),
      uint_key("updates_per_step", [](auto& c) -> auto& { return c.updates_per_step; }),
      uint_key("warmup_steps", [](auto& c) -> auto& { return c.warmup_steps; }),
      real_key("tau", [](auto& c) -> auto& { return c.learner.tau; }),
      real_key("actor_lr", [](auto& c) -> auto& { return c.learner.actor_lr; }),
      real_key("critic_lr", [](auto& c) -> auto& { return c.learner.critic_lr; }),
      real_key("model_lr", [](auto& c) -> auto& { return c.learner.model_lr; }),
      uint_key("batch_size", [](auto& c) -> auto& { return c.learner.batch_size; }),
      uint_key("replay_capacity", [](auto& c) -> auto& { return c.learner.replay_capacity; }),
      real_key("reward_scale", [](auto& c) -> auto& { return c.learner.reward_scale; }),
      bool_key("use_prev_weights", [](auto& c) -> auto& { return c.learner.use_prev_weights; }),

      uint_key("conv_channels", [](auto& c) -> auto& { return c.learner.sizes.conv_channels; }),
      uint_key("conv_kernel", [](auto& c) -> auto& { return c.learner.sizes.conv_kernel; }),
      uint_key("feature_channels", [](auto& c) -> auto& { return c.learner.sizes.feature_channels; }),
      uint_key("hidden_units", [](auto& c) -> auto& { return c.learner.sizes.hidden; }),
      uint_key("transition_hidden", [](auto& c) -> auto& { return c.learner.sizes.transition_hidden; }),

      real_key("gdpg_alpha", [](auto& c) -> auto& { return c.learner.gdpg_alpha; }),
      bool_key("gdpg_dual_ascent", [](auto& c) -> auto& { return c.learner.gdpg_dual_ascent; }),
      real_key("gdpg_alpha_lr", [](auto& c) -> auto& { return c.learner.gdpg_alpha_lr; }),

      real_key("ppo_clip", [](auto& c) -> auto& { return c.learner.ppo_clip; }),
      uint_key("ppo_epochs", [](auto& c) -> auto& { return c.learner.ppo_epochs; }),
      real_key("ppo_policy_lr", [](auto& c) -> auto& { return c.learner.ppo_policy_lr; }),
      real_key("ppo_value_lr", [](auto& c) -> auto& { return c.learner.ppo_value_lr; }),
      real_key("ppo_init_log_std", [](auto& c) -> auto& { return c.learner.ppo_init_log_std; }),
      bool_key("ppo_use_prev_weights", [](auto& c) -> auto& { return c.learner.ppo_use_prev_weights; }),
      bool_key("ppo_include_current_reward",
               [](auto& c) -> auto& { return c.learner.ppo_include_current_reward; }),
  };
  return table;
}

const Key& find_key(const std::string& name) {
  for (const auto& k : keys()) {
    if (k.name == name) return k;
  }
  throw ConfigError("unknown config key '" + name + "'");
}

// Strips a trailing comment, ignoring '#' inside double quotes.
std::string strip_comment(const std::string& line) {
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_quotes = !in_quotes;
    if (line[i] == '#' && !in_quotes) return line.substr(0, i);
  }
  return line;
}

bool known_agent(const std::string& a) {
  static const char* names[] = {"ucrp", "winner", "loser", "ddpg", "gdpg", "ppo"};
  return std::find(std::begin(names), std::end(names), a) != std::end(names);
}

}  // namespace

void RunConfig::validate() const {
  env.validate();
  if (!is_iso_date(train_end) || !is_iso_date(test_end)) {
    throw ConfigError("train_end and test_end must be YYYY-MM-DD dates");
  }
  if (!(train_end < test_end)) throw ConfigError("train_end must precede test_end");
  if (features.empty() || features.front() != "close") {
    throw ConfigError("features must start with 'close'");
  }
  for (const auto& f : features) {
    if (f != "close" && f != "high" && f != "close_denoised") {
      throw ConfigError("unknown feature '" + f + "'");
    }
  }
  if (!known_agent(agent)) throw ConfigError("unknown agent '" + agent + "'");
  if (agents.empty()) throw ConfigError("agents list is empty");
  for (const auto& a : agents) {
    if (!known_agent(a)) throw ConfigError("unknown agent '" + a + "' in agents");
  }
  if (initial_weights != "cash" && initial_weights != "uniform") {
    throw ConfigError("initial_weights must be cash or uniform");
  }
  if (denoise_levels == 0) throw ConfigError("denoise_levels must be >= 1");
  if (denoise_window < (std::size_t{1} << denoise_levels)) {
    throw ConfigError("denoise_window must hold at least 2^denoise_levels samples");
  }
  try {
    Wavelet::get(denoise_wavelet);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (periods_per_year == 0) throw ConfigError("periods_per_year must be > 0");
  if (learner.batch_size == 0) throw ConfigError("batch_size must be > 0");
  if (learner.replay_capacity < learner.batch_size) {
    throw ConfigError("replay_capacity must be >= batch_size");
  }
  if (!(learner.tau >= 0.0 && learner.tau <= 1.0)) throw ConfigError("tau must lie in [0, 1]");
  if (!(learner.gdpg_alpha >= 0.0 && learner.gdpg_alpha <= 1.0)) {
    throw ConfigError("gdpg_alpha must lie in [0, 1]");
  }
  if (!(learner.ppo_clip > 0.0)) throw ConfigError("ppo_clip must be > 0");
  if (learner.ppo_epochs == 0) throw ConfigError("ppo_epochs must be >= 1");
  for (double lr : {learner.actor_lr, learner.critic_lr, learner.model_lr,
                    learner.ppo_policy_lr, learner.ppo_value_lr}) {
    if (!(lr > 0.0)) throw ConfigError("learning rates must be > 0");
  }
  if (learner.noise_sigma < 0.0 || noise_sigma_final < 0.0) {
    throw ConfigError("noise sigmas must be >= 0");
  }
  if (learner.sizes.conv_channels == 0 || learner.sizes.conv_kernel == 0 ||
      learner.sizes.feature_channels == 0 || learner.sizes.hidden == 0 ||
      learner.sizes.transition_hidden == 0) {
    throw ConfigError("network sizes must be > 0");
  }
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = trim(strip_comment(line));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const auto where = source + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const auto key = trim(std::string_view(body).substr(0, eq));
    const auto value = trim(std::string_view(body).substr(eq + 1));
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
      throw ConfigError(where + "duplicate key '" + key + "'");
    }
    seen.push_back(key);
    try {
      find_key(key).set(cfg, value, key);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string to_config_text(const RunConfig& config) {
  std::string out;
  for (const auto& k : keys()) out += k.name + " = " + k.get(config) + "\n";
  return out;
}

void set_config_value(RunConfig& config, const std::string& key,
                      const std::string& value) {
  find_key(key).set(config, trim(value), key);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : keys()) out.push_back(k.name);
  return out;
}

std::uint64_t agent_seed(std::uint64_t run_seed, const std::string& agent) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : agent) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return run_seed ^ h;
}

AgentConfig make_agent_config(const RunConfig& config, std::uint64_t seed) {
  AgentConfig a = config.learner;
  a.gamma = config.env.gamma;
  a.seed = seed;
  return a;
}

TrainConfig make_train_config(const RunConfig& config, std::uint64_t seed) {
  TrainConfig t;
  t.episodes = config.episodes;
  t.episode_length = config.episode_length;
  t.noise_sigma = config.learner.noise_sigma;
  t.noise_sigma_final = config.noise_sigma_final;
  t.updates_per_step = config.updates_per_step;
  t.warmup_steps = config.warmup_steps;
  t.initial_weights = config.initial_weights;
  t.seed = seed;
  return t;
}

DenoiseOptions make_denoise_options(const RunConfig& config) {
  DenoiseOptions d;
  d.levels = config.denoise_levels;
  d.wavelet = config.denoise_wavelet;
  d.window = config.denoise_window;
  return d;
}

}  // namespace folio
