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

#pragma once

#include "tempora/data.hpp"
#include "tempora/layers.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tempora {

/// Temperatures in degrees Celsius around one forecast origin.
struct ForecastResult
{
  std::vector<double> history;    // last H observed values
  std::vector<double> predicted;  // K values
  std::vector<double> actual;     // K observed values
  Hour                origin{0};  // timestamp of the last history value
};

// Series metrics. Both spans must have the same non-zero length.
double      rmse(std::span<double const> predicted, std::span<double const> actual);
double      mae(std::span<double const> predicted, std::span<double const> actual);
double      max_error(std::span<double const> predicted, std::span<double const> actual);
/// Index of the largest absolute deviation; the earliest one on ties.
std::size_t max_error_index(std::span<double const> predicted, std::span<double const> actual);

/**
 * Runs the model on one raw-unit window (H x F, columns in `features`
 * order) and returns the K outputs converted back to degrees Celsius.
 */
std::vector<double> predict_window(SequentialModel const &model, Matrix const &raw_window,
                                   std::span<std::string const> features,
                                   NormalizationStats const &stats);

/**
 * Forecast from the `history` rows ending at `end_row` of a raw frame. The
 * K rows after it supply `actual`; they must exist.
 */
ForecastResult forecast(SequentialModel const &model, SeriesFrame const &raw, std::size_t end_row,
                        std::size_t history, std::span<std::string const> features,
                        NormalizationStats const &stats);

struct AccuracyReport
{
  std::string label;
  std::size_t horizon{0};
  double      rmse{0.0};      // mean over windows
  double      mae{0.0};       // mean over windows
  double      me{0.0};        // max over windows
  double      p50_rmse{0.0};  // per-window RMSE percentiles
  double      p90_rmse{0.0};
  std::size_t windows{0};
};

/// q-th quantile (0..1) with linear interpolation between order statistics.
double percentile(std::vector<double> values, double q);

/**
 * Metrics in degrees Celsius over every window of a normalized dataset.
 * Per-window RMSE and MAE are averaged; ME is the largest per-window ME.
 */
AccuracyReport evaluate_model(SequentialModel const &model, WindowedDataset const &test_ds,
                              NormalizationStats const &stats, std::string label);

/// Appends `model,K,rmse,mae,me,p50_rmse,p90_rmse`, writing the header to a new file.
void append_metrics_csv(AccuracyReport const &report, std::string const &path);

}  // namespace tempora
