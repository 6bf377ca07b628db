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

/*
 * C interface to the tempora forecasting engine.
 *
 * Every function returns a tempora_status. On failure the message for the
 * calling thread is available from tempora_last_error() until the next call.
 * Handles are opaque and owned by the caller; free them with the matching
 * *_free function. Strings returned through `char **` are freed with
 * tempora_string_free.
 */

#ifndef TEMPORA_H
#define TEMPORA_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define TEMPORA_API __declspec(dllexport)
#else
#define TEMPORA_API __attribute__((visibility("default")))
#endif

typedef enum tempora_status
{
  TEMPORA_OK         = 0,
  TEMPORA_INTERNAL   = 1, /* unexpected failure */
  TEMPORA_VALIDATION = 2, /* invalid config, arguments or shapes */
  TEMPORA_DATA       = 3, /* unreadable or inconsistent data, checkpoints, files */
  TEMPORA_DIVERGENCE = 4, /* training loss became non-finite */
  TEMPORA_ORACLE     = 5  /* gradient or equivalence check failed */
} tempora_status;

typedef struct tempora_frame   tempora_frame;
typedef struct tempora_config  tempora_config;
typedef struct tempora_model   tempora_model;
typedef struct tempora_history tempora_history;

typedef struct tempora_ingest_report
{
  size_t rows;
  size_t replaced_na;
  size_t removed_empty;
  size_t filled_hours;
  size_t gaps;
} tempora_ingest_report;

typedef struct tempora_metrics
{
  size_t horizon;
  size_t windows;
  double rmse;
  double mae;
  double me;
  double p50_rmse;
  double p90_rmse;
} tempora_metrics;

typedef struct tempora_diagnosis
{
  int    overfitting;
  int    persistent_gap;
  int    rising_validation;
  double final_gap;
} tempora_diagnosis;

typedef void (*tempora_epoch_fn)(size_t epoch, double train_mse, double val_mse, void *user);

TEMPORA_API char const *tempora_last_error(void);
TEMPORA_API char const *tempora_version(void);
TEMPORA_API void        tempora_string_free(char *s);

/* Data */
TEMPORA_API tempora_status tempora_frame_load_csv(char const *path, tempora_frame **out,
                                                  tempora_ingest_report *report);
/* Gap descriptions from the last load, one per line; may be empty. */
TEMPORA_API tempora_status tempora_frame_gap_report(tempora_frame const *frame, char **out);
/* spec: "key=value,..." such as "years=2,seed=2024"; NULL or "" for defaults. */
TEMPORA_API tempora_status tempora_frame_synthetic(char const *spec, tempora_frame **out);
TEMPORA_API tempora_status tempora_synthetic_describe(char const *spec, char **out);
TEMPORA_API tempora_status tempora_frame_save_csv(tempora_frame const *frame, char const *path);
TEMPORA_API size_t         tempora_frame_rows(tempora_frame const *frame);
/* Stats of the first floor(rows * train_fraction) rows, written as CSV. */
TEMPORA_API tempora_status tempora_frame_save_stats(tempora_frame const *frame, double train_fraction,
                                                    char const *path);
TEMPORA_API void           tempora_frame_free(tempora_frame *frame);

/* Config */
TEMPORA_API tempora_status tempora_config_preset(char const *name, tempora_config **out);
/* Applies a `key = value` file on top of `cfg` (a `preset` line replaces the base). */
TEMPORA_API tempora_status tempora_config_load(tempora_config *cfg, char const *path);
TEMPORA_API tempora_status tempora_config_set(tempora_config *cfg, char const *key, char const *value);
TEMPORA_API tempora_status tempora_config_desk_scale(tempora_config *cfg);
TEMPORA_API tempora_status tempora_config_text(tempora_config const *cfg, char **out);
TEMPORA_API tempora_status tempora_config_hash(tempora_config const *cfg, char **out);
/* Overrides applied so far as `key = value` lines, in order. */
TEMPORA_API tempora_status tempora_config_overrides(tempora_config const *cfg, char **out);
TEMPORA_API void           tempora_config_free(tempora_config *cfg);

/* Training */
TEMPORA_API tempora_status tempora_train(tempora_config const *cfg, tempora_frame const *data,
                                         char const *data_source, tempora_epoch_fn on_epoch,
                                         void *user, tempora_model **model, tempora_history **history);
TEMPORA_API size_t         tempora_history_epochs(tempora_history const *h);
TEMPORA_API tempora_status tempora_history_save_csv(tempora_history const *h, char const *path);
TEMPORA_API tempora_status tempora_history_save_svg(tempora_history const *h, char const *path,
                                                    char const *title);
TEMPORA_API tempora_status tempora_history_diagnose(tempora_history const *h, tempora_diagnosis *out);
TEMPORA_API void           tempora_history_free(tempora_history *h);

/* Models */
TEMPORA_API tempora_status tempora_model_save(tempora_model const *m, char const *path);
TEMPORA_API tempora_status tempora_model_load(char const *path, tempora_model **out);
TEMPORA_API tempora_status tempora_model_config(tempora_model const *m, tempora_config **out);
TEMPORA_API size_t         tempora_model_horizon(tempora_model const *m);
TEMPORA_API void           tempora_model_free(tempora_model *m);

/* at: timestamp text, or NULL for the first hour of the test split. Writes
 * the SVG to svg_path and a CSV with the same stem. */
TEMPORA_API tempora_status tempora_forecast(tempora_model const *m, tempora_frame const *data,
                                            char const *at, char const *svg_path, size_t *horizon);
TEMPORA_API tempora_status tempora_evaluate(tempora_model const *m, tempora_frame const *data,
                                            char const *label, char const *metrics_csv,
                                            tempora_metrics *out);

/* Oracle suite: gradient checks over `seeds` configurations plus scalar
 * LSTM equivalence. fault, if non-NULL, perturbs analytic gradients whose
 * names end with it. The report table is returned in *report. Returns
 * TEMPORA_ORACLE when any check fails. */
TEMPORA_API tempora_status tempora_check(size_t seeds, char const *fault, char **report);

TEMPORA_API tempora_status tempora_sha256_file(char const *path, char **hex);

#ifdef __cplusplus
}
#endif

#endif /* TEMPORA_H */
