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

#include "tempora/checkpoint.hpp"
#include "tempora/evaluate.hpp"
#include "tempora/training.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tempora {

/// Model inputs plus the temp target, in the config's feature order.
std::vector<std::string> required_columns(ExperimentConfig const &config);

/**
 * The named columns of `raw`. Throws DataError naming the expected and the
 * available features when any is missing.
 */
SeriesFrame select_columns(SeriesFrame const &raw, std::vector<std::string> const &names);

/// Chronological split with z-score stats from the training part only.
struct PreparedSplit
{
  SeriesFrame        train;  // normalized
  SeriesFrame        test;   // normalized
  NormalizationStats stats;
  std::size_t        boundary{0};  // first test row of the raw frame
};

PreparedSplit prepare_split(SeriesFrame const &raw, ExperimentConfig const &config);

struct TrainOutcome
{
  Checkpoint  checkpoint;
  LossHistory history;
  Diagnosis   diagnosis;
};

/**
 * Split, standardize, window, build the LSTM stack from the config seed and
 * train. The test split serves as validation data.
 */
TrainOutcome run_experiment(ExperimentConfig const &config, SeriesFrame const &raw,
                            std::string const &data_source, EpochObserver const &observer = {});

/**
 * Forecast whose history window ends at `at` (inclusive). Defaults to the
 * first hour of the test split.
 */
ForecastResult forecast_at(Checkpoint const &ckpt, SeriesFrame const &raw,
                           std::optional<Hour> at = std::nullopt);

/// Accuracy over every window of the test split, normalized with the checkpoint stats.
AccuracyReport evaluate_checkpoint(Checkpoint const &ckpt, SeriesFrame const &raw,
                                   std::string const &label);

}  // namespace tempora
