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

#include "tempora/evaluate.hpp"
#include "tempora/training.hpp"

#include <string>

namespace tempora {

/**
 * Writes an SVG of the forecast (history line, predicted and actual
 * points, legend, axes in hours and degrees Celsius) and a sibling CSV
 * with the same stem. The CSV has one row per plotted hour (H + K rows
 * after the header) with values at round-trip precision.
 */
void emit_forecast_plot(ForecastResult const &result, std::string const &svg_path,
                        std::string const &title);

/// CSV half of emit_forecast_plot: `offset,timestamp,history,predicted,actual`.
void write_forecast_csv(ForecastResult const &result, std::string const &csv_path);

/// Train and validation MSE per epoch as an SVG line chart.
void emit_loss_plot(LossHistory const &history, std::string const &svg_path, std::string const &title);

}  // namespace tempora
