#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "folio/config.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace folio;

namespace {

struct Run {
  int code = -1;
  std::string output;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    auto p = fs::temp_directory_path() / "folio_test_cli";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

Run folio_cli(const std::string& args) {
  const auto log = work_dir() / "stdout.txt";
  const std::string cmd = std::string("\"") + FOLIO_CLI_PATH + "\" " + args + " > \"" +
                          log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string quick_config() {
  auto cfg = load_config(test::source_dir() / "configs" / "quick.cfg");
  cfg.data_path = test::fixture_csv().string();
  cfg.episodes = 1;
  cfg.episode_length = 15;
  cfg.learner.batch_size = 4;
  const auto path = work_dir() / "quick.cfg";
  std::ofstream(path) << to_config_text(cfg);
  return path.string();
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(folio_cli("").code != 0);
  CHECK(folio_cli("frobnicate").code == 2);
  CHECK(folio_cli("ingest --in /nonexistent/prices.csv").code == 2);
  CHECK(folio_cli("select --in " + q(test::fixture_csv()) + " --k 2").code == 2);
  CHECK(folio_cli("backtest --config /nonexistent.cfg").code == 2);

  const auto bad = work_dir() / "bad.cfg";
  std::ofstream(bad) << "seed = 1\nmystery = 2\n";
  const auto r = folio_cli("backtest --config " + q(bad));
  CHECK(r.code == 2);
  CHECK(r.output.find("bad.cfg:2") != std::string::npos);
}

TEST_CASE("data errors exit with 3") {
  const auto bad = work_dir() / "bad_prices.csv";
  std::ofstream(bad) << "date,A_close\n2020-01-01,1\n2020-01-02,-4\n";
  CHECK(folio_cli("ingest --in " + q(bad) + " --out " + q(work_dir() / "ing_bad")).code == 3);
  CHECK(folio_cli("denoise --in " + q(test::fixture_csv()) +
                  " --column NOPE_close --out " + q(work_dir() / "x.csv"))
            .code == 3);
}

TEST_CASE("ingest writes a canonical csv") {
  const auto out = work_dir() / "ingest";
  const auto r = folio_cli("ingest --in " + q(test::fixture_csv()) + " --assets ALPHA,CHARLIE --out " +
                           q(out));
  REQUIRE(r.code == 0);
  const auto text = read_file(out / "prices.csv");
  CHECK(text.find("ALPHA_close") != std::string::npos);
  CHECK(text.find("BRAVO_close") == std::string::npos);
  const auto meta = nlohmann::json::parse(read_file(out / "ingest.json"));
  CHECK(meta.is_object());
}

TEST_CASE("denoise writes both columns") {
  const auto out = work_dir() / "den.csv";
  const auto r = folio_cli("denoise --in " + q(test::fixture_csv()) +
                           " --column ALPHA_close --levels 2 --wavelet db4 --window 64 --out " +
                           q(out));
  REQUIRE(r.code == 0);
  std::ifstream in(out);
  std::string header;
  std::getline(in, header);
  CHECK(header == "date,ALPHA_close,ALPHA_close_denoised");
  std::size_t rows = 0;
  for (std::string l; std::getline(in, l);) ++rows;
  CHECK(rows == 1200);
}

TEST_CASE("select reports a subset") {
  const auto out = work_dir() / "sel.json";
  const auto r = folio_cli("select --in " + q(test::fixture_csv()) +
                           " --k 2 --train-end 2016-12-31 --threads 1 --out " + q(out));
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(read_file(out));
  CHECK(j["subset"].size() == 2);
  CHECK(j["combinations_visited"].get<int>() == 6);
  double total = 0.0;
  for (double w : j["weights"]) total += w;
  CHECK(total == doctest::Approx(1.0));
  CHECK(folio_cli("select --in " + q(test::fixture_csv()) + " --k 9 --train-end 2016-12-31").code ==
        2);
}

TEST_CASE("train then backtest from the checkpoint") {
  const auto cfg = quick_config();
  const auto ckpt = work_dir() / "ckpt";
  REQUIRE(folio_cli("train --config " + q(cfg) + " --agent gdpg --seed 5 --out " + q(ckpt)).code ==
          0);
  CHECK(fs::exists(ckpt / "training_log.csv"));
  CHECK(fs::exists(ckpt / "run.cfg"));
  CHECK(folio_cli("train --config " + q(cfg) + " --agent ucrp").code == 2);

  const auto a = work_dir() / "bt_a";
  const auto b = work_dir() / "bt_b";
  REQUIRE(folio_cli("backtest --config " + q(cfg) + " --agent gdpg --seed 5 --checkpoint " +
                    q(ckpt) + " --out " + q(a))
              .code == 0);
  REQUIRE(folio_cli("backtest --config " + q(ckpt / "run.cfg") + " --checkpoint " + q(ckpt) +
                    " --out " + q(b))
              .code == 0);
  CHECK(read_file(a / "gdpg_report.csv") == read_file(b / "gdpg_report.csv"));
  CHECK(fs::exists(a / "plot.csv"));
  CHECK(fs::exists(a / "summary.json"));
}

TEST_CASE("compare writes every report") {
  const auto cfg = quick_config();
  const auto out = work_dir() / "cmp";
  const auto r = folio_cli("compare --config " + q(cfg) + " --threads 1 --out " + q(out));
  REQUIRE(r.code == 0);
  for (const char* a : {"ucrp", "winner", "loser", "ddpg", "gdpg", "ppo"}) {
    CAPTURE(a);
    CHECK(fs::exists(out / (std::string(a) + "_report.csv")));
  }
  const auto summary = nlohmann::json::parse(read_file(out / "summary.json"));
  CHECK(summary["agents"].size() == 6);
  CHECK(to_config_text(load_config(out / "run.cfg")) == to_config_text(load_config(cfg)));
}
