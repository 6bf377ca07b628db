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

// Command-line front end. Talks to the engine only through the C API.

#include "tempora/tempora.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Carries a C API status up to main.
struct Failure
{
  tempora_status status;
  std::string    message;
};

void ok(tempora_status s, std::string const &what)
{
  if (s != TEMPORA_OK)
  {
    throw Failure{s, what + ": " + tempora_last_error()};
  }
}

std::string take(char *s)
{
  std::string out = s == nullptr ? "" : s;
  tempora_string_free(s);
  return out;
}

template <typename T, void (*Free)(T *)>
struct Deleter
{
  void operator()(T *p) const { Free(p); }
};
using Frame   = std::unique_ptr<tempora_frame, Deleter<tempora_frame, tempora_frame_free>>;
using Config  = std::unique_ptr<tempora_config, Deleter<tempora_config, tempora_config_free>>;
using Model   = std::unique_ptr<tempora_model, Deleter<tempora_model, tempora_model_free>>;
using History = std::unique_ptr<tempora_history, Deleter<tempora_history, tempora_history_free>>;

struct Options
{
  std::string                preset{"run1-7day"};
  std::string                config_file;
  std::string                data;
  std::string                synthetic;
  bool                       synthetic_set{false};
  std::string                out{"out"};
  std::optional<std::uint64_t> seed;
  std::string                at;
  std::string                checkpoint;
  bool                       desk{false};
  std::size_t                seeds{20};
  std::string                fault;
  std::vector<std::string>   argv;
};

/// Where the data came from, for manifests and checkpoints.
struct Source
{
  Frame       frame;
  std::string label;  // stored in the checkpoint
  json        manifest;
};

Source load_source(Options const &o)
{
  if (!o.data.empty() && o.synthetic_set)
  {
    throw Failure{TEMPORA_VALIDATION, "--data and --synthetic are mutually exclusive"};
  }
  Source src;
  if (!o.data.empty())
  {
    tempora_frame        *f = nullptr;
    tempora_ingest_report r{};
    ok(tempora_frame_load_csv(o.data.c_str(), &f, &r), "loading " + o.data);
    src.frame.reset(f);
    src.label = "csv:" + fs::path(o.data).filename().string();
    char *hex = nullptr;
    ok(tempora_sha256_file(o.data.c_str(), &hex), "hashing " + o.data);
    src.manifest = {{"kind", "csv"}, {"path", fs::absolute(o.data).string()}, {"sha256", take(hex)},
                    {"rows", r.rows}, {"replaced_na", r.replaced_na}};
    return src;
  }
  // Desk runs default to two synthetic years; full runs to the nine-year reference.
  std::string spec = o.synthetic;
  if (!o.synthetic_set && o.desk)
  {
    spec = "years=2";
  }
  char *desc = nullptr;
  ok(tempora_synthetic_describe(spec.c_str(), &desc), "synthetic spec");
  std::string const canonical = take(desc);
  tempora_frame    *f         = nullptr;
  ok(tempora_frame_synthetic(canonical.c_str(), &f), "generating synthetic data");
  src.frame.reset(f);
  src.label    = "synthetic:" + canonical;
  src.manifest = {{"kind", "synthetic"},
                  {"spec", canonical},
                  {"rows", tempora_frame_rows(f)},
                  {"calendar", "365-day years, leap days ignored"}};
  return src;
}

std::string sha_of(fs::path const &p)
{
  char *hex = nullptr;
  ok(tempora_sha256_file(p.string().c_str(), &hex), "hashing " + p.string());
  return take(hex);
}

void write_manifest(Options const &o, std::string const &command, std::string const &label, json body)
{
  fs::path const dir = fs::path(o.out) / "manifests";
  fs::create_directories(dir);
  body["command"]    = command;
  body["argv"]       = o.argv;
  body["output_dir"] = fs::absolute(o.out).string();
  body["threads_env"] = "TEMPORA_THREADS";
  fs::path const path = dir / (command + (label.empty() ? "" : "_" + label) + ".json");
  std::ofstream  out(path);
  out << body.dump(2) << '\n';
  if (!out)
  {
    throw Failure{TEMPORA_DATA, "cannot write manifest " + path.string()};
  }
  std::cout << "manifest: " << path.string() << '\n';
}

int cmd_prepare(Options const &o)
{
  if (!o.data.empty() && o.synthetic_set)
  {
    throw Failure{TEMPORA_VALIDATION, "--data and --synthetic are mutually exclusive"};
  }
  fs::path const dir = fs::path(o.out) / "data";
  fs::create_directories(dir);
  Source src = load_source(o);
  if (!o.data.empty())
  {
    // Re-read for the report; load_source keeps only counts.
    tempora_frame        *f = nullptr;
    tempora_ingest_report r{};
    ok(tempora_frame_load_csv(o.data.c_str(), &f, &r), "loading " + o.data);
    Frame owned(f);
    char *gaps = nullptr;
    ok(tempora_frame_gap_report(f, &gaps), "gap report");
    std::cout << "rows: " << r.rows << "\nreplaced: " << r.replaced_na
              << "\nremoved empty rows: " << r.removed_empty << "\nfilled hours: " << r.filled_hours
              << "\ngaps: " << r.gaps << '\n'
              << take(gaps);
  }
  else
  {
    std::cout << "rows: " << tempora_frame_rows(src.frame.get()) << "\nreplaced: 0\ngaps: 0\n";
  }
  fs::path const csv   = dir / "prepared.csv";
  fs::path const stats = dir / "stats.csv";
  ok(tempora_frame_save_csv(src.frame.get(), csv.string().c_str()), "writing " + csv.string());
  // Stats over the default training share; train recomputes them for its own split.
  double const fraction = 0.78;
  ok(tempora_frame_save_stats(src.frame.get(), fraction, stats.string().c_str()), "writing stats");
  std::cout << "prepared: " << csv.string() << "\nstats: " << stats.string() << '\n';
  write_manifest(o, "prepare", "",
                 {{"data_source", src.manifest},
                  {"train_fraction", fraction},
                  {"artifacts", {{csv.string(), sha_of(csv)}, {stats.string(), sha_of(stats)}}}});
  return 0;
}

Config resolve_config(Options const &o)
{
  tempora_config *c = nullptr;
  ok(tempora_config_preset(o.preset.c_str(), &c), "preset");
  Config cfg(c);
  if (!o.config_file.empty())
  {
    ok(tempora_config_load(c, o.config_file.c_str()), "config " + o.config_file);
  }
  if (o.desk)
  {
    ok(tempora_config_desk_scale(c), "desk scale");
  }
  if (o.seed)
  {
    ok(tempora_config_set(c, "seed", std::to_string(*o.seed).c_str()), "--seed");
  }
  return cfg;
}

std::string config_name(tempora_config const *c)
{
  char *text = nullptr;
  ok(tempora_config_text(c, &text), "config");
  std::string const t = take(text);
  auto const        b = t.find("name = ") + 7;
  return t.substr(b, t.find('\n', b) - b);
}

void on_epoch(size_t epoch, double train, double val, void *)
{
  std::printf("epoch %3zu  train_mse %.6f  val_mse %.6f\n", epoch, train, val);
  std::fflush(stdout);
}

int cmd_train(Options const &o)
{
  Config      cfg  = resolve_config(o);
  std::string name = config_name(cfg.get());
  Source      src  = load_source(o);

  char *text = nullptr, *hash = nullptr, *overrides = nullptr;
  ok(tempora_config_text(cfg.get(), &text), "config");
  ok(tempora_config_hash(cfg.get(), &hash), "config");
  ok(tempora_config_overrides(cfg.get(), &overrides), "config");
  std::string const config_text = take(text);
  std::cout << config_text;

  tempora_model   *m = nullptr;
  tempora_history *h = nullptr;
  ok(tempora_train(cfg.get(), src.frame.get(), src.label.c_str(), on_epoch, nullptr, &m, &h), "training");
  Model   model(m);
  History history(h);

  fs::path const reports = fs::path(o.out) / "reports";
  fs::path const ckdir   = fs::path(o.out) / "checkpoints";
  fs::create_directories(reports);
  fs::create_directories(ckdir);
  fs::path const loss_csv = reports / ("loss_" + name + ".csv");
  fs::path const loss_svg = reports / ("loss_" + name + ".svg");
  fs::path const ckpt     = ckdir / (name + ".json");
  ok(tempora_history_save_csv(h, loss_csv.string().c_str()), "loss csv");
  ok(tempora_history_save_svg(h, loss_svg.string().c_str(), ("MSE loss, " + name).c_str()), "loss svg");
  ok(tempora_model_save(m, ckpt.string().c_str()), "checkpoint");

  tempora_diagnosis d{};
  ok(tempora_history_diagnose(h, &d), "diagnosis");
  std::cout << "overfitting: " << (d.overfitting ? "yes" : "no") << " (final val-train gap " << d.final_gap
            << ")\ncheckpoint: " << ckpt.string() << '\n';

  std::string const ov = take(overrides);
  write_manifest(o, "train", name,
                 {{"config", config_text},
                  {"config_hash", take(hash)},
                  {"overrides", ov},
                  {"preset", o.preset},
                  {"desk_scale", o.desk},
                  {"seed", o.seed ? json(*o.seed) : json(nullptr)},
                  {"data_source", src.manifest},
                  {"diagnosis", {{"overfitting", d.overfitting != 0}, {"final_gap", d.final_gap}}},
                  {"artifacts",
                   {{ckpt.string(), sha_of(ckpt)},
                    {loss_csv.string(), sha_of(loss_csv)},
                    {loss_svg.string(), sha_of(loss_svg)}}}});
  return 0;
}

Model load_model(Options const &o)
{
  tempora_model *m = nullptr;
  ok(tempora_model_load(o.checkpoint.c_str(), &m), "loading checkpoint");
  return Model(m);
}

std::string model_name(tempora_model const *m)
{
  tempora_config *c = nullptr;
  ok(tempora_model_config(m, &c), "checkpoint config");
  Config cfg(c);
  return config_name(c);
}

int cmd_forecast(Options const &o)
{
  Model             model = load_model(o);
  std::string const name  = model_name(model.get());
  Source            src   = load_source(o);
  fs::path const    dir   = fs::path(o.out) / "reports" / "plots";
  fs::create_directories(dir);
  std::string stamp = o.at.empty() ? "test-start" : o.at;
  for (char &ch : stamp)
  {
    if (ch == ':' || ch == ' ' || ch == '/')
    {
      ch = '-';
    }
  }
  fs::path const svg = dir / ("forecast_" + name + "_" + stamp + ".svg");
  std::size_t    K   = 0;
  ok(tempora_forecast(model.get(), src.frame.get(), o.at.empty() ? nullptr : o.at.c_str(),
                      svg.string().c_str(), &K),
     "forecast");
  fs::path const csv = fs::path(svg).replace_extension(".csv");
  std::cout << "K: " << K << "\nplot: " << svg.string() << "\nseries: " << csv.string() << '\n';
  write_manifest(o, "forecast", name + "_" + stamp,
                 {{"checkpoint", {{"path", fs::absolute(o.checkpoint).string()}, {"sha256", sha_of(o.checkpoint)}}},
                  {"at", o.at.empty() ? json("start of test split") : json(o.at)},
                  {"horizon", K},
                  {"data_source", src.manifest},
                  {"artifacts", {{svg.string(), sha_of(svg)}, {csv.string(), sha_of(csv)}}}});
  return 0;
}

int cmd_evaluate(Options const &o)
{
  Model             model = load_model(o);
  std::string const name  = model_name(model.get());
  Source            src   = load_source(o);
  fs::path const    dir   = fs::path(o.out) / "reports";
  fs::create_directories(dir);
  fs::path const  metrics = dir / "metrics.csv";
  tempora_metrics r{};
  ok(tempora_evaluate(model.get(), src.frame.get(), name.c_str(), metrics.string().c_str(), &r), "evaluate");
  std::printf("model %s  K %zu  windows %zu\nRMSE %.4f  MAE %.4f  ME %.4f  (p50 RMSE %.4f, p90 RMSE %.4f)\n",
              name.c_str(), r.horizon, r.windows, r.rmse, r.mae, r.me, r.p50_rmse, r.p90_rmse);
  write_manifest(o, "evaluate", name,
                 {{"checkpoint", {{"path", fs::absolute(o.checkpoint).string()}, {"sha256", sha_of(o.checkpoint)}}},
                  {"data_source", src.manifest},
                  {"metrics", {{"rmse", r.rmse}, {"mae", r.mae}, {"me", r.me}, {"p50_rmse", r.p50_rmse},
                               {"p90_rmse", r.p90_rmse}, {"windows", r.windows}, {"K", r.horizon}}},
                  {"artifacts", {{metrics.string(), sha_of(metrics)}}}});
  return 0;
}

int cmd_check(Options const &o)
{
  char          *report = nullptr;
  tempora_status s = tempora_check(o.seeds, o.fault.empty() ? nullptr : o.fault.c_str(), &report);
  std::cout << take(report);
  if (s == TEMPORA_ORACLE)
  {
    std::cerr << "check: FAILED\n";
    return TEMPORA_ORACLE;
  }
  ok(s, "check");
  std::cout << "check: all oracles passed\n";
  return 0;
}

}  // namespace

int main(int argc, char **argv)
{
  Options o;
  o.argv.assign(argv, argv + argc);

  CLI::App app{"tempora: LSTM multi-step temperature forecasting"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tempora_version());

  std::vector<CLI::Option *> synthetic_opts;
  auto add_data = [&](CLI::App *c) {
    c->add_option("--data", o.data, "Weather CSV (datetime plus feature columns)");
    synthetic_opts.push_back(
        c->add_option("--synthetic", o.synthetic, "Synthetic dataset spec, e.g. years=2,seed=2024")
            ->expected(0, 1));
    c->add_option("--out", o.out, "Output directory")->capture_default_str();
  };

  auto *prepare = app.add_subcommand("prepare", "Clean a CSV or synthesize data; write stats");
  add_data(prepare);

  auto *train = app.add_subcommand("train", "Train a preset or config file");
  add_data(train);
  train->add_option("--preset", o.preset, "run1-7day, run2-1day or run3-12hour")->capture_default_str();
  train->add_option("--config", o.config_file, "key = value overrides");
  train->add_option("--seed", o.seed, "Run seed");
  train->add_flag("--desk", o.desk, "Desk-scale profile (2 synthetic years, reduced batches)");

  auto *forecast = app.add_subcommand("forecast", "Forecast from a checkpoint");
  forecast->add_option("checkpoint", o.checkpoint)->required();
  add_data(forecast);
  forecast->add_option("--at", o.at, "Timestamp ending the history window (default: test split start)");
  forecast->add_flag("--desk", o.desk, "Default to the desk-scale synthetic data");

  auto *evaluate = app.add_subcommand("evaluate", "Accuracy over the test split");
  evaluate->add_option("checkpoint", o.checkpoint)->required();
  add_data(evaluate);
  evaluate->add_flag("--desk", o.desk, "Default to the desk-scale synthetic data");

  auto *check = app.add_subcommand("check", "Run gradient and oracle checks");
  check->add_option("--seeds", o.seeds, "Random configurations per layer type")->capture_default_str();
  check->add_option("--inject-fault", o.fault)->group("");

  try
  {
    app.parse(argc, argv);
  }
  catch (CLI::ParseError const &e)
  {
    int const code = app.exit(e);
    return code == 0 ? 0 : TEMPORA_VALIDATION;
  }
  for (auto const *opt : synthetic_opts)
  {
    o.synthetic_set = o.synthetic_set || opt->count() > 0;
  }

  try
  {
    if (*prepare)
    {
      return cmd_prepare(o);
    }
    if (*train)
    {
      return cmd_train(o);
    }
    if (*forecast)
    {
      return cmd_forecast(o);
    }
    if (*evaluate)
    {
      return cmd_evaluate(o);
    }
    return cmd_check(o);
  }
  catch (Failure const &f)
  {
    std::cerr << "error: " << f.message << '\n';
    return f.status;
  }
  catch (std::exception const &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return TEMPORA_DATA;
  }
}
