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

#include "tempora/tempora.h"

#include "tempora/config.hpp"
#include "tempora/hash.hpp"
#include "tempora/oracle.hpp"
#include "tempora/pipeline.hpp"
#include "tempora/plot.hpp"

#include <cstring>
#include <exception>
#include <filesystem>
#include <string>

struct tempora_frame
{
  tempora::SeriesFrame     frame;
  std::vector<std::string> gaps;
};

struct tempora_config
{
  tempora::ExperimentConfig                config;
  std::vector<tempora::ConfigOverride> overrides;
};

struct tempora_model
{
  tempora::Checkpoint ckpt;
};

struct tempora_history
{
  tempora::LossHistory history;
};

namespace {

thread_local std::string g_last_error;

char *dup_string(std::string const &s)
{
  auto *out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

/// Runs fn, translating exceptions into status codes and the thread's error text.
template <typename Fn>
tempora_status guarded(Fn &&fn) noexcept
{
  g_last_error.clear();
  try
  {
    fn();
    return TEMPORA_OK;
  }
  catch (tempora::DivergenceError const &e)
  {
    g_last_error = e.what();
    return TEMPORA_DIVERGENCE;
  }
  catch (tempora::DataError const &e)
  {
    g_last_error = e.what();
    return TEMPORA_DATA;
  }
  catch (std::filesystem::filesystem_error const &e)
  {
    g_last_error = e.what();
    return TEMPORA_DATA;
  }
  catch (tempora::NonFiniteError const &e)
  {
    g_last_error = e.what();
    return TEMPORA_DATA;
  }
  catch (std::invalid_argument const &e)
  {
    g_last_error = e.what();
    return TEMPORA_VALIDATION;
  }
  catch (std::exception const &e)
  {
    g_last_error = e.what();
    return TEMPORA_INTERNAL;
  }
  catch (...)
  {
    g_last_error = "unknown error";
    return TEMPORA_INTERNAL;
  }
}

template <typename T>
T &deref(T *p, char const *what)
{
  if (p == nullptr)
  {
    throw std::invalid_argument(std::string(what) + " is null");
  }
  return *p;
}

std::string str(char const *s, char const *what)
{
  if (s == nullptr)
  {
    throw std::invalid_argument(std::string(what) + " is null");
  }
  return s;
}

}  // namespace

extern "C" {

char const *tempora_last_error(void) { return g_last_error.c_str(); }

char const *tempora_version(void) { return "1.0.0"; }

void tempora_string_free(char *s) { delete[] s; }

tempora_status tempora_frame_load_csv(char const *path, tempora_frame **out, tempora_ingest_report *report)
{
  return guarded([&] {
    auto &slot   = deref(out, "out");
    auto  result = tempora::ingest_csv(str(path, "path"));
    if (report != nullptr)
    {
      *report = {result.report.rows, result.report.replaced_na, result.report.removed_empty,
                 result.report.filled_hours, result.report.gaps.size()};
    }
    slot = new tempora_frame{std::move(result.frame), std::move(result.report.gaps)};
  });
}

tempora_status tempora_frame_gap_report(tempora_frame const *frame, char **out)
{
  return guarded([&] {
    std::string text;
    for (auto const &g : deref(frame, "frame").gaps)
    {
      text += g + "\n";
    }
    deref(out, "out") = dup_string(text);
  });
}

tempora_status tempora_frame_synthetic(char const *spec, tempora_frame **out)
{
  return guarded([&] {
    auto &slot = deref(out, "out");
    auto  s    = tempora::parse_synthetic_spec(spec == nullptr ? "" : spec);
    slot       = new tempora_frame{tempora::generate_synthetic(s), {}};
  });
}

tempora_status tempora_synthetic_describe(char const *spec, char **out)
{
  return guarded([&] {
    auto &slot = deref(out, "out");
    slot       = dup_string(tempora::describe(tempora::parse_synthetic_spec(spec == nullptr ? "" : spec)));
  });
}

tempora_status tempora_frame_save_csv(tempora_frame const *frame, char const *path)
{
  return guarded([&] { tempora::write_csv(deref(frame, "frame").frame, str(path, "path")); });
}

size_t tempora_frame_rows(tempora_frame const *frame) { return frame == nullptr ? 0 : frame->frame.length(); }

tempora_status tempora_frame_save_stats(tempora_frame const *frame, double train_fraction, char const *path)
{
  return guarded([&] {
    auto const train = tempora::chronological_split(deref(frame, "frame").frame, train_fraction).first;
    tempora::NormalizationStats::compute(train).save(str(path, "path"));
  });
}

void tempora_frame_free(tempora_frame *frame) { delete frame; }

tempora_status tempora_config_preset(char const *name, tempora_config **out)
{
  return guarded([&] {
    auto &slot = deref(out, "out");
    slot       = new tempora_config{tempora::preset(str(name, "name")), {}};
  });
}

tempora_status tempora_config_load(tempora_config *cfg, char const *path)
{
  return guarded([&] {
    auto &c = deref(cfg, "config");
    std::vector<tempora::ConfigOverride> applied;
    c.config = tempora::load_config_file(str(path, "path"), c.config, &applied);
    c.overrides.insert(c.overrides.end(), applied.begin(), applied.end());
  });
}

tempora_status tempora_config_set(tempora_config *cfg, char const *key, char const *value)
{
  return guarded([&] {
    auto       &c   = deref(cfg, "config");
    auto const  k   = str(key, "key");
    auto const  v   = str(value, "value");
    auto        tmp = c.config;
    tempora::apply_setting(tmp, k, v);
    tempora::require_valid(tmp);
    c.config = std::move(tmp);
    c.overrides.push_back({tempora::normalize_key(k), v});
  });
}

tempora_status tempora_config_desk_scale(tempora_config *cfg)
{
  return guarded([&] { tempora::apply_desk_scale(deref(cfg, "config").config); });
}

tempora_status tempora_config_text(tempora_config const *cfg, char **out)
{
  return guarded([&] { deref(out, "out") = dup_string(tempora::to_text(deref(cfg, "config").config)); });
}

tempora_status tempora_config_hash(tempora_config const *cfg, char **out)
{
  return guarded([&] { deref(out, "out") = dup_string(tempora::config_hash(deref(cfg, "config").config)); });
}

tempora_status tempora_config_overrides(tempora_config const *cfg, char **out)
{
  return guarded([&] {
    std::string text;
    for (auto const &o : deref(cfg, "config").overrides)
    {
      text += o.key + " = " + o.value + "\n";
    }
    deref(out, "out") = dup_string(text);
  });
}

void tempora_config_free(tempora_config *cfg) { delete cfg; }

tempora_status tempora_train(tempora_config const *cfg, tempora_frame const *data, char const *data_source,
                             tempora_epoch_fn on_epoch, void *user, tempora_model **model,
                             tempora_history **history)
{
  return guarded([&] {
    auto &mslot = deref(model, "model");
    auto &hslot = deref(history, "history");
    auto const &c = deref(cfg, "config").config;
    tempora::require_valid(c);
    tempora::EpochObserver observer;
    if (on_epoch != nullptr)
    {
      observer = [=](std::size_t e, double tr, double va) { on_epoch(e, tr, va, user); };
    }
    auto outcome = tempora::run_experiment(c, deref(data, "data").frame,
                                           data_source == nullptr ? "" : data_source, observer);
    mslot = new tempora_model{std::move(outcome.checkpoint)};
    hslot = new tempora_history{std::move(outcome.history)};
  });
}

size_t tempora_history_epochs(tempora_history const *h) { return h == nullptr ? 0 : h->history.epochs(); }

tempora_status tempora_history_save_csv(tempora_history const *h, char const *path)
{
  return guarded([&] { deref(h, "history").history.save_csv(str(path, "path")); });
}

tempora_status tempora_history_save_svg(tempora_history const *h, char const *path, char const *title)
{
  return guarded([&] {
    tempora::emit_loss_plot(deref(h, "history").history, str(path, "path"), title == nullptr ? "" : title);
  });
}

tempora_status tempora_history_diagnose(tempora_history const *h, tempora_diagnosis *out)
{
  return guarded([&] {
    auto const &hist = deref(h, "history").history;
    auto       &slot = deref(out, "out");
    if (hist.epochs() < 2)
    {
      slot = {0, 0, 0, hist.epochs() == 1 ? hist.val[0] - hist.train[0] : 0.0};
      return;
    }
    auto const d = tempora::detect_overfitting(hist);
    slot         = {d.overfitting, d.persistent_gap, d.rising_validation, d.final_gap};
  });
}

void tempora_history_free(tempora_history *h) { delete h; }

tempora_status tempora_model_save(tempora_model const *m, char const *path)
{
  return guarded([&] { tempora::save_checkpoint(deref(m, "model").ckpt, str(path, "path")); });
}

tempora_status tempora_model_load(char const *path, tempora_model **out)
{
  return guarded([&] {
    auto &slot = deref(out, "out");
    slot       = new tempora_model{tempora::load_checkpoint(str(path, "path"))};
  });
}

tempora_status tempora_model_config(tempora_model const *m, tempora_config **out)
{
  return guarded([&] {
    auto &slot = deref(out, "out");
    slot       = new tempora_config{deref(m, "model").ckpt.config, {}};
  });
}

size_t tempora_model_horizon(tempora_model const *m) { return m == nullptr ? 0 : m->ckpt.config.n_output(); }

void tempora_model_free(tempora_model *m) { delete m; }

tempora_status tempora_forecast(tempora_model const *m, tempora_frame const *data, char const *at,
                                char const *svg_path, size_t *horizon)
{
  return guarded([&] {
    auto const &ckpt = deref(m, "model").ckpt;
    std::optional<tempora::Hour> when;
    if (at != nullptr && *at != '\0')
    {
      try
      {
        when = tempora::parse_timestamp(at);
      }
      catch (std::exception const &e)
      {
        throw std::invalid_argument(std::string("--at: ") + e.what());
      }
    }
    auto const r = tempora::forecast_at(ckpt, deref(data, "data").frame, when);
    tempora::emit_forecast_plot(r, str(svg_path, "svg_path"), ckpt.config.name + " forecast");
    if (horizon != nullptr)
    {
      *horizon = r.predicted.size();
    }
  });
}

tempora_status tempora_evaluate(tempora_model const *m, tempora_frame const *data, char const *label,
                                char const *metrics_csv, tempora_metrics *out)
{
  return guarded([&] {
    auto const &ckpt = deref(m, "model").ckpt;
    auto const  r    = tempora::evaluate_checkpoint(ckpt, deref(data, "data").frame,
                                                    label == nullptr ? ckpt.config.name : std::string(label));
    if (metrics_csv != nullptr)
    {
      tempora::append_metrics_csv(r, metrics_csv);
    }
    if (out != nullptr)
    {
      *out = {r.horizon, r.windows, r.rmse, r.mae, r.me, r.p50_rmse, r.p90_rmse};
    }
  });
}

tempora_status tempora_check(size_t seeds, char const *fault, char **report)
{
  bool           passed = false;
  tempora_status s      = guarded([&] {
    auto const result = tempora::oracle::run_suite(seeds, fault == nullptr ? "" : fault);
    passed            = result.passed();
    if (report != nullptr)
    {
      *report = dup_string(tempora::oracle::format_report(result));
    }
  });
  if (s == TEMPORA_OK && !passed)
  {
    g_last_error = "oracle suite reported failures";
    return TEMPORA_ORACLE;
  }
  return s;
}

tempora_status tempora_sha256_file(char const *path, char **hex)
{
  return guarded([&] { deref(hex, "hex") = dup_string(tempora::sha256_file(str(path, "path"))); });
}

}  // extern "C"
