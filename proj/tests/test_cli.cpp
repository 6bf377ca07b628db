//------------------------------------------------------------------------------
//
//   Copyright 2026 The Tempora Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

// Drives the tempora executable end to end.

#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run
{
  int         code;
  std::string output;  // stdout and stderr interleaved
};

Run tempora(std::string const &args)
{
  std::string const cmd  = std::string(TEMPORA_CLI) + " " + args + " 2>&1";
  FILE             *pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string             out;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe) != nullptr)
  {
    out += buf.data();
  }
  int const status = ::pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(fs::path const &p)
{
  std::ifstream      in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json manifest(fs::path const &p) { return nlohmann::json::parse(slurp(p)); }

void write(fs::path const &p, std::string const &text) { std::ofstream(p) << text; }

constexpr char const *kTinyConfig = "lstm units = 4, 3\n"
                                    "batch size = 16\n"
                                    "evaluation interval = 3\n"
                                    "epochs = 2\n"
                                    "eval stride = 16\n";

struct Scratch
{
  fs::path dir;
  explicit Scratch(std::string const &name) : dir(fs::absolute("cli_" + name))
  {
    fs::remove_all(dir);
    fs::create_directories(dir);
    write(dir / "tiny.cfg", kTinyConfig);
  }
  std::string operator/(std::string const &leaf) const { return (dir / leaf).string(); }
};

}  // namespace

TEST_CASE("prepare synthesizes nine 365-day years")
{
  Scratch    s("prepare");
  auto const r = tempora("prepare --synthetic seed=2024 --out " + s.dir.string());
  CHECK(r.code == 0);
  CHECK(r.output.find("rows: 78840") != std::string::npos);
  CHECK(fs::exists(s / "data/prepared.csv"));
  CHECK(fs::exists(s / "data/stats.csv"));
  auto const m = manifest(s / "manifests/prepare.json");
  CHECK(m["data_source"]["calendar"].get<std::string>().find("365") != std::string::npos);
}

TEST_CASE("prepare reports replacements and is idempotent")
{
  Scratch s("na");
  write(s.dir / "raw.csv", "datetime,temp,hum\n"
                           "2020-01-01T00:00,1.5,N/A\n"
                           "2020-01-01T01:00,N/A,80\n"
                           "2020-01-01T02:00,2.5,81\n"
                           "2020-01-01T04:00,3,82\n");
  auto const first = tempora("prepare --data " + (s / "raw.csv") + " --out " + (s / "one"));
  CHECK(first.code == 0);
  CHECK(first.output.find("replaced: 2") != std::string::npos);
  CHECK(first.output.find("2020-01-01T03:00") != std::string::npos);

  auto const again = tempora("prepare --data " + (s / "one/data/prepared.csv") + " --out " + (s / "two"));
  CHECK(again.code == 0);
  CHECK(again.output.find("replaced: 0") != std::string::npos);

  auto const bad = tempora("prepare --data " + (s / "missing.csv") + " --out " + (s / "x"));
  CHECK(bad.code == 3);
  write(s.dir / "broken.csv", "datetime,temp\n2020-01-01T00:00,1\n2020-01-01T01:00,warm\n");
  auto const broken = tempora("prepare --data " + (s / "broken.csv") + " --out " + (s / "x"));
  CHECK(broken.code == 3);
  CHECK(broken.output.find("line 3") != std::string::npos);
}

TEST_CASE("presets resolve to their tables")
{
  Scratch s("presets");
  auto    r = tempora("train --preset run3-12hour --config " + (s / "tiny.cfg") +
                      " --synthetic days=40 --out " + s.dir.string());
  REQUIRE(r.code == 0);
  CHECK(r.output.find("historical data = 48") != std::string::npos);
  CHECK(r.output.find("future steps = 12") != std::string::npos);
  CHECK(r.output.find("l2 kernel = 0.005") != std::string::npos);
  CHECK(r.output.find("l2 recurrent = 0.005") != std::string::npos);
  CHECK(r.output.find("l2 bias = 0.005") != std::string::npos);
  CHECK(r.output.find("features = temp, hum, airpr, solrad, windvel\n") != std::string::npos);

  auto const m = manifest(s / "manifests/train_run3-12hour.json");
  CHECK(m["overrides"].get<std::string>().find("batch size = 16") != std::string::npos);
  CHECK(m["config_hash"].get<std::string>().size() == 64);
  CHECK(m["artifacts"].size() == 3);
  CHECK(fs::exists(s / "reports/loss_run3-12hour.csv"));
  CHECK(fs::exists(s / "reports/loss_run3-12hour.svg"));

  r = tempora("train --preset run1-7day --config " + (s / "tiny.cfg") + " --synthetic days=80 --out " +
              (s / "seven"));
  REQUIRE(r.code == 0);
  CHECK(r.output.find("future steps = 168") != std::string::npos);
  CHECK(r.output.find("winddir") != std::string::npos);
}

TEST_CASE("same seed and preset give identical artifacts")
{
  Scratch     s("determinism");
  std::string args = "train --preset run3-12hour --config " + (s / "tiny.cfg") + " --synthetic days=40 --seed 7";
  REQUIRE(tempora(args + " --out " + (s / "a")).code == 0);
  REQUIRE(tempora(args + " --out " + (s / "b")).code == 0);
  CHECK(slurp(s / "a/checkpoints/run3-12hour.json") == slurp(s / "b/checkpoints/run3-12hour.json"));
  CHECK(slurp(s / "a/reports/loss_run3-12hour.csv") == slurp(s / "b/reports/loss_run3-12hour.csv"));

  // replay from the manifest's argv
  auto const m    = manifest(s / "a/manifests/train_run3-12hour.json");
  std::string replay;
  auto const  argv = m["argv"].get<std::vector<std::string>>();
  for (std::size_t i = 1; i < argv.size(); ++i)
  {
    replay += (argv[i] == (s / "a") ? (s / "c") : argv[i]) + " ";
  }
  REQUIRE(tempora(replay).code == 0);
  CHECK(slurp(s / "a/checkpoints/run3-12hour.json") == slurp(s / "c/checkpoints/run3-12hour.json"));

  REQUIRE(tempora("train --preset run3-12hour --config " + (s / "tiny.cfg") +
                  " --synthetic days=40 --seed 8 --out " + (s / "d"))
              .code == 0);
  CHECK(slurp(s / "a/checkpoints/run3-12hour.json") != slurp(s / "d/checkpoints/run3-12hour.json"));
}

TEST_CASE("forecast and evaluate from a checkpoint")
{
  Scratch s("forecast");
  REQUIRE(tempora("train --preset run3-12hour --config " + (s / "tiny.cfg") + " --synthetic days=40 --out " +
                  s.dir.string())
              .code == 0);
  std::string const ckpt = s / "checkpoints/run3-12hour.json";

  auto f = tempora("forecast " + ckpt + " --synthetic days=40 --out " + s.dir.string());
  CHECK(f.code == 0);
  CHECK(f.output.find("K: 12") != std::string::npos);
  CHECK(fs::exists(s / "reports/plots/forecast_run3-12hour_test-start.svg"));
  CHECK(fs::exists(s / "reports/plots/forecast_run3-12hour_test-start.csv"));

  f = tempora("forecast " + ckpt + " --synthetic days=40 --at 2010-01-10T12:00 --out " + s.dir.string());
  CHECK(f.code == 0);
  f = tempora("forecast " + ckpt + " --synthetic days=40 --at 2011-01-10T12:00 --out " + s.dir.string());
  CHECK(f.code == 3);
  CHECK(f.output.find("not in the data") != std::string::npos);

  write(s.dir / "two.csv", "datetime,temp,hum\n2020-01-01T00:00,1,50\n2020-01-01T01:00,2,50\n");
  f = tempora("forecast " + ckpt + " --data " + (s / "two.csv") + " --out " + s.dir.string());
  CHECK(f.code == 3);
  CHECK(f.output.find("expected [temp, hum, airpr, solrad, windvel]") != std::string::npos);
  CHECK(f.output.find("found [temp, hum]") != std::string::npos);

  auto e = tempora("evaluate " + ckpt + " --synthetic days=40 --out " + s.dir.string());
  CHECK(e.code == 0);
  e = tempora("evaluate " + ckpt + " --synthetic days=40 --out " + s.dir.string());
  CHECK(e.code == 0);
  auto const metrics = slurp(s / "reports/metrics.csv");
  CHECK(metrics.starts_with("model,K,rmse,mae,me,p50_rmse,p90_rmse\nrun3-12hour,12,"));
  // same checkpoint and data: identical rows
  auto const first  = metrics.find('\n') + 1;
  auto const second = metrics.find('\n', first) + 1;
  CHECK(metrics.substr(first, second - first) == metrics.substr(second));
  CHECK(fs::exists(s / "manifests/evaluate_run3-12hour.json"));
}

TEST_CASE("invalid configuration lists each violation with exit code 2")
{
  Scratch s("invalid");
  write(s.dir / "bad.cfg", "batch size = 0\nepochs = 0\nfeatures = temp, rain\n");
  auto const r = tempora("train --config " + (s / "bad.cfg") + " --synthetic days=10 --out " + s.dir.string());
  CHECK(r.code == 2);
  CHECK(r.output.find("batch size must be positive") != std::string::npos);
  CHECK(r.output.find("epochs must be positive") != std::string::npos);
  CHECK(r.output.find("unknown feature 'rain'") != std::string::npos);
  CHECK(tempora("train --preset run9").code == 2);
  CHECK(tempora("frobnicate").code == 2);
  CHECK(tempora("--help").code == 0);
}

TEST_CASE("divergence exits with code 4")
{
  Scratch s("diverge");
  write(s.dir / "hot.cfg", std::string(kTinyConfig) + "learning rate = 1e300\nclip norm = 0\n");
  auto const r = tempora("train --preset run3-12hour --config " + (s / "hot.cfg") +
                         " --synthetic days=20 --out " + s.dir.string());
  CHECK(r.code == 4);
}

TEST_CASE("check passes on a clean build and names an injected fault")
{
  auto const ok = tempora("check --seeds 20");
  CHECK(ok.code == 0);
  CHECK(ok.output.find("all oracles passed") != std::string::npos);
  auto const bad = tempora("check --seeds 3 --inject-fault lstm.w_x_o");
  CHECK(bad.code == 5);
  CHECK(bad.output.find("lstm.w_x_o") != std::string::npos);
  CHECK(bad.output.find("FAIL") != std::string::npos);
}
