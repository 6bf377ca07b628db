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

// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.
//
// Training criteria use the desk profile (two synthetic years, smaller
// batches) unless TEMPORA_FULL_SCALE=1 selects nine years at preset scale.

#include "tempora/config.hpp"
#include "tempora/data.hpp"
#include "tempora/evaluate.hpp"
#include "tempora/hash.hpp"
#include "tempora/layers.hpp"
#include "tempora/oracle.hpp"
#include "tempora/pipeline.hpp"
#include "tempora/training.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace tempora;
using namespace tempora::oracle;
namespace fs = std::filesystem;

namespace {

// pinned tolerances
constexpr double      kGradRel          = 1e-4;
constexpr double      kGradEps          = 1e-5;
constexpr std::size_t kGradSeeds        = 20;
constexpr double      kGradSeconds      = 30.0;
constexpr double      kOracleTol        = 1e-12;
constexpr std::size_t kOracleConfigs    = 100;
constexpr double      kOracleSeconds    = 5.0;
constexpr double      kScaleTol         = 1e-9;
constexpr double      kDeskGap          = 0.05;
constexpr double      kFullGap          = 0.10;
constexpr std::size_t kWindowShapes     = 200;
constexpr double      kSplitTolHours    = 1.0;
constexpr std::uint64_t kSyntheticSeed  = 2024;  // data
constexpr std::uint64_t kTrainingSeed   = 42;    // weights and batch order
constexpr std::uint64_t kCliSeed        = 7;

bool full_scale()
{
  char const *v = std::getenv("TEMPORA_FULL_SCALE");
  return v != nullptr && std::string(v) == "1";
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(char const *f, auto... args)
{
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Verdict
{
  bool        pass{false};
  std::string detail;
};

// ---- 1, 2: gradients and scalar oracle

Verdict gradients()
{
  if (GradCheckTolerance{}.eps != kGradEps || GradCheckTolerance{}.rel != kGradRel)
  {
    return {false, "gradient check tolerances drifted from the pinned values"};
  }
  auto const        t0     = std::chrono::steady_clock::now();
  auto const        suite  = run_suite(kGradSeeds);
  double const      dt     = seconds_since(t0);
  std::size_t       params = 0, failed = 0;
  double            worst  = 0.0;
  std::map<std::string, int> kinds;
  for (auto const &r : suite.gradient_reports)
  {
    kinds[r.label.substr(0, r.label.find('/'))] += 1;
    for (auto const &p : r.parameters)
    {
      ++params;
      failed += p.passed ? 0 : 1;
      worst = std::max(worst, p.max_rel_error);
    }
  }
  bool const all_kinds = kinds["dense"] >= int(kGradSeeds) && kinds["rnn"] >= int(kGradSeeds) &&
                         kinds["lstm"] >= int(kGradSeeds);
  return {failed == 0 && all_kinds && dt < kGradSeconds,
          fmt("%zu configs, %zu parameters, %zu failing, worst rel %.2e, %.1fs", suite.gradient_reports.size(),
              params, failed, worst, dt)};
}

Verdict scalar_oracle()
{
  auto const   t0 = std::chrono::steady_clock::now();
  auto const   r  = lstm_oracle_equivalence(kOracleConfigs, 0xacce, kOracleTol);
  double const dt = seconds_since(t0);
  return {r.passed && r.configs == kOracleConfigs && r.max_abs_diff <= kOracleTol && dt < kOracleSeconds,
          fmt("%zu configs, max |diff| %.2e, %.2fs", r.configs, r.max_abs_diff, dt)};
}

// ---- 3: threshold-unit XOR

Verdict xor_fixture()
{
  SequentialModel mlp;
  mlp.add(DenseLayer{Matrix{{1, 1}, {1, 1}}, Matrix{{-1.5, -0.5}}, Activation::Step});
  mlp.add(DenseLayer{Matrix{{-1}, {1}}, Matrix{{-0.5}}, Activation::Step});
  SequenceBatch const x(4, 1, 2, {0, 0, 1, 1, 1, 0, 0, 1});
  Matrix const        y = forward_sequence(mlp, x);
  bool const          ok = y == Matrix{{0}, {0}, {1}, {1}};
  return {ok, fmt("(0,0)->%g (1,1)->%g (1,0)->%g (0,1)->%g", y(0, 0), y(1, 0), y(2, 0), y(3, 0))};
}

// ---- 4: metrics

Verdict metrics()
{
  std::vector<double> const p{1, 3}, a{0, 0};
  bool examples = rmse(p, a) == std::sqrt(5.0) && mae(p, a) == 2.0 && max_error(p, a) == 3.0 &&
                  rmse(a, a) == 0.0 && mae(a, a) == 0.0 && max_error(a, a) == 0.0;

  Rng    rng(404);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial)
  {
    std::size_t const   n    = 1 + rng.index(64);
    double const        mean = rng.uniform(-30, 30);
    double const        sd   = rng.uniform(0.05, 25);
    std::vector<double> pz(n), az(n), pc(n), ac(n);
    for (std::size_t i = 0; i < n; ++i)
    {
      pz[i] = rng.normal();
      az[i] = rng.normal();
      pc[i] = pz[i] * sd + mean;
      ac[i] = az[i] * sd + mean;
    }
    for (auto [z, c] : {std::pair{rmse(pz, az), rmse(pc, ac)}, std::pair{mae(pz, az), mae(pc, ac)},
                        std::pair{max_error(pz, az), max_error(pc, ac)}})
    {
      worst = std::max(worst, std::abs(c - sd * z) / std::max(1.0, sd * z));
    }
  }
  return {examples && worst <= kScaleTol,
          fmt("[1,3] vs [0,0] -> %.17g, %g, %g; worst scale residual %.2e", rmse(p, a), mae(p, a),
              max_error(p, a), worst)};
}

// ---- 5, 6: preset ordering and regularization

struct PresetRun
{
  double rmse{0.0};
  double gap{0.0};
  double seconds{0.0};
};

ExperimentConfig scaled(std::string const &name)
{
  auto c = preset(name);
  c.seed = kTrainingSeed;
  if (!full_scale())
  {
    apply_desk_scale(c);
  }
  return c;
}

PresetRun train_and_score(ExperimentConfig const &c, SeriesFrame const &raw)
{
  auto const t0  = std::chrono::steady_clock::now();
  auto const out = run_experiment(c, raw, "synthetic");
  auto const rep = evaluate_checkpoint(out.checkpoint, raw, c.name);
  PresetRun  r{rep.rmse, out.history.val.back() - out.history.train.back(), seconds_since(t0)};
  std::printf("  %-12s l2 %-6g rmse %.4f degC, final val-train %.5f, %.0fs\n", c.name.c_str(), c.l2.kernel,
              r.rmse, r.gap, r.seconds);
  std::fflush(stdout);
  return r;
}

struct TrainingResults
{
  PresetRun run1, run2, run3, run3_no_l2;
};

TrainingResults training_runs()
{
  SyntheticWeatherSpec spec;
  spec.seed = kSyntheticSeed;
  spec.days = (full_scale() ? 9 : 2) * 365;
  auto const raw = generate_synthetic(spec);
  std::printf("  data: %s (%zu rows), %s profile\n", describe(spec).c_str(), raw.length(),
              full_scale() ? "full" : "desk");

  TrainingResults r;
  r.run3 = train_and_score(scaled("run3-12hour"), raw);
  r.run2 = train_and_score(scaled("run2-1day"), raw);
  r.run1 = train_and_score(scaled("run1-7day"), raw);
  auto ablation = scaled("run3-12hour");
  ablation.l2   = {};
  r.run3_no_l2  = train_and_score(ablation, raw);
  return r;
}

Verdict ordering(TrainingResults const &r)
{
  double const need = full_scale() ? kFullGap : kDeskGap;
  double const g32  = (r.run2.rmse - r.run3.rmse) / r.run2.rmse;
  double const g21  = (r.run1.rmse - r.run2.rmse) / r.run1.rmse;
  double const secs = r.run1.seconds + r.run2.seconds + r.run3.seconds;
  return {g32 >= need && g21 >= need && secs <= 15 * 60,
          fmt("rmse %.4f < %.4f < %.4f, gaps %.1f%% and %.1f%% (need %.0f%%), %.0fs", r.run3.rmse, r.run2.rmse,
              r.run1.rmse, 100 * g32, 100 * g21, 100 * need, secs)};
}

Verdict regularization(TrainingResults const &r)
{
  return {r.run3.gap < r.run2.gap && r.run3.gap < r.run3_no_l2.gap,
          fmt("gap run3 %.5f < run2 %.5f; lambda 0.005 %.5f < lambda 0 %.5f", r.run3.gap, r.run2.gap,
              r.run3.gap, r.run3_no_l2.gap)};
}

// ---- 7: overfitting detector

Verdict detector()
{
  LossHistory const seven{{1.0, 0.9, 0.8, 0.75, 0.70, 0.66, 0.63, 0.61, 0.59, 0.58},
                          {0.95, 0.88, 0.84, 0.81, 0.80, 0.78, 0.75, 0.73, 0.71, 0.70}};
  LossHistory const converged{{0.9, 0.6, 0.45, 0.35, 0.30, 0.28, 0.27, 0.26, 0.26, 0.26},
                              {0.8, 0.6, 0.47, 0.36, 0.31, 0.28, 0.27, 0.27, 0.26, 0.26}};
  auto const a = detect_overfitting(seven);
  auto const b = detect_overfitting(converged);
  return {a.overfitting && !b.overfitting,
          fmt("0.58/0.70 flagged=%d, 0.26/0.26 flagged=%d", int(a.overfitting), int(b.overfitting))};
}

// ---- 8: two CLI executions

int run_cli(std::string const &args)
{
  std::string const cmd = std::string(TEMPORA_CLI) + " " + args + " > /dev/null 2>&1";
  int const         st  = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(fs::path const &p)
{
  std::ifstream      in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism()
{
  auto const        t0   = std::chrono::steady_clock::now();
  std::string const args = "train --preset run2-1day --seed " + std::to_string(kCliSeed) +
                           (full_scale() ? "" : " --desk");
  fs::path const root = fs::absolute("acceptance_determinism");
  fs::remove_all(root);
  int const a = run_cli(args + " --out " + (root / "a").string());
  int const b = run_cli(args + " --out " + (root / "b").string());
  if (a != 0 || b != 0)
  {
    return {false, fmt("exit codes %d and %d", a, b)};
  }
  auto const loss_a = slurp(root / "a/reports/loss_run2-1day.csv");
  auto const loss_b = slurp(root / "b/reports/loss_run2-1day.csv");
  auto const ck_a   = sha256_file((root / "a/checkpoints/run2-1day.json").string());
  auto const ck_b   = sha256_file((root / "b/checkpoints/run2-1day.json").string());
  return {!loss_a.empty() && loss_a == loss_b && ck_a == ck_b,
          fmt("`%s`: loss csv %s, checkpoint %.16s.. vs %.16s.., %.0fs", args.c_str(),
              loss_a == loss_b ? "identical" : "differs", ck_a.c_str(), ck_b.c_str(), seconds_since(t0))};
}

// ---- 9: data pipeline

struct PipelineParts
{
  bool        windows{false};
  bool        fixtures{false};
  bool        split{false};
  std::size_t boundary{0};
  std::size_t seven_year_mark{0};
};

PipelineParts pipeline_parts()
{
  PipelineParts p;

  Rng  rng(909);
  bool windows = true;
  for (std::size_t trial = 0; trial < kWindowShapes; ++trial)
  {
    std::size_t const H = 1 + rng.index(48);
    std::size_t const K = 1 + rng.index(48);
    std::size_t const L = H + K + rng.index(300);
    std::vector<Hour>   hours(L);
    std::vector<double> temp(L);
    for (std::size_t i = 0; i < L; ++i)
    {
      hours[i] = static_cast<Hour>(i);
      temp[i]  = static_cast<double>(i);
    }
    std::vector<std::string> feats{"temp"};
    windows = windows && make_windows(SeriesFrame(hours, {"temp"}, {temp}), feats, H, K).samples() == L - H - K + 1;
  }
  p.windows = windows;

  std::istringstream na("datetime,temp,hum\n"
                        "2020-01-01T00:00,1.5,N/A\n"
                        "2020-01-01T01:00,N/A,80\n"
                        "2020-01-01T02:00,2.5,81\n");
  auto const         a = ingest_csv(na);
  std::istringstream empty("datetime,temp\n"
                           "2020-01-01T00:00,1\n"
                           "\n"
                           ",\n"
                           "2020-01-01T01:00,2\n");
  auto const         b = ingest_csv(empty);
  p.fixtures = a.report.replaced_na == 2 && a.frame.column("temp")[1] == 0.0 &&
               a.frame.column("hum")[0] == 0.0 && b.report.removed_empty == 2 && b.frame.length() == 2;

  SyntheticWeatherSpec spec;
  spec.seed             = kSyntheticSeed;
  auto const frame      = generate_synthetic(spec);
  auto const [train, _] = chronological_split(frame, 0.78);
  p.boundary            = train.length();
  p.seven_year_mark     = 7 * 365 * 24;
  p.split = std::abs(double(p.boundary) - double(p.seven_year_mark)) <= kSplitTolHours;
  return p;
}

Verdict pipeline(PipelineParts const &p)
{
  return {p.windows && p.fixtures && p.split,
          fmt("windows %s over %zu shapes, N/A and empty-row fixtures %s, split boundary row %zu vs "
              "seven-year mark %zu (off by %lld h, tolerance %g h)",
              p.windows ? "ok" : "FAIL", kWindowShapes, p.fixtures ? "ok" : "FAIL", p.boundary,
              p.seven_year_mark, static_cast<long long>(p.boundary) - static_cast<long long>(p.seven_year_mark),
              kSplitTolHours)};
}

// The 0.78 split of nine 365-day years lands at floor(78840 * 0.78) = 61495,
// 175 h past the seven-year mark at 61320; only a 7/9 fraction reaches it.
// That clause is recorded as unattainable. The run still fails on anything
// else, including any other split outcome.
bool known_unattainable(PipelineParts const &p)
{
  return p.windows && p.fixtures && !p.split && p.boundary == 61495 && p.seven_year_mark == 61320;
}

}  // namespace

int main()
{
  std::setvbuf(stdout, nullptr, _IOLBF, 0);
  std::vector<std::pair<int, Verdict>> results;
  auto report = [&](int id, char const *name, Verdict v)
  {
    std::printf("criterion %d %s: %s | %s\n", id, v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    results.emplace_back(id, std::move(v));
  };

  try
  {
    report(1, "gradient checks", gradients());
    report(2, "scalar LSTM oracle", scalar_oracle());
    report(3, "XOR threshold network", xor_fixture());
    report(4, "metric definitions", metrics());
    auto const runs = training_runs();
    report(5, "preset RMSE ordering", ordering(runs));
    report(6, "regularization narrows the gap", regularization(runs));
    report(7, "overfitting detector", detector());
    report(8, "CLI determinism", determinism());
    auto const parts = pipeline_parts();
    report(9, "data pipeline", pipeline(parts));

    int unexpected = 0, passed = 0;
    for (auto const &[id, v] : results)
    {
      if (v.pass)
      {
        ++passed;
      }
      else if (!(id == 9 && known_unattainable(parts)))
      {
        ++unexpected;
      }
    }
    std::printf("summary: %d/%zu PASS", passed, results.size());
    if (passed < int(results.size()))
    {
      std::printf(", %zu FAIL (%d unexpected", results.size() - passed, unexpected);
      std::printf(unexpected == 0 ? "; criterion 9 split clause recorded as unattainable)\n" : ")\n");
    }
    else
    {
      std::printf("\n");
    }
    return unexpected == 0 ? 0 : 1;
  }
  catch (std::exception const &e)
  {
    std::printf("acceptance aborted: %s\n", e.what());
    return 1;
  }
}
