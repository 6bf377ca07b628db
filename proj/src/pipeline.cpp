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

#include "tempora/pipeline.hpp"

#include "tempora/random.hpp"

#include <algorithm>

namespace tempora {

namespace {

std::string join(std::vector<std::string> const &v)
{
  std::string out;
  for (auto const &s : v)
  {
    out += (out.empty() ? "" : ", ") + s;
  }
  return out;
}

}  // namespace

std::vector<std::string> required_columns(ExperimentConfig const &config)
{
  std::vector<std::string> cols = config.features;
  if (std::find(cols.begin(), cols.end(), "temp") == cols.end())
  {
    cols.emplace_back("temp");
  }
  return cols;
}

SeriesFrame select_columns(SeriesFrame const &raw, std::vector<std::string> const &names)
{
  std::vector<std::string> missing;
  for (auto const &n : names)
  {
    if (!raw.has(n))
    {
      missing.push_back(n);
    }
  }
  if (!missing.empty())
  {
    throw DataError("incompatible features: expected [" + join(names) + "], found [" +
                    join(raw.names()) + "] (missing " + join(missing) + ")");
  }
  std::vector<std::vector<double>> cols;
  for (auto const &n : names)
  {
    auto const c = raw.column(n);
    cols.emplace_back(c.begin(), c.end());
  }
  return SeriesFrame(raw.hours(), names, std::move(cols));
}

PreparedSplit prepare_split(SeriesFrame const &raw, ExperimentConfig const &config)
{
  SeriesFrame const picked = select_columns(raw, required_columns(config));
  auto [train, test]       = chronological_split(picked, config.train_fraction);
  PreparedSplit out;
  out.boundary = train.length();
  out.stats    = NormalizationStats::compute(train);
  out.train    = normalize(train, out.stats);
  out.test     = normalize(test, out.stats);
  return out;
}

TrainOutcome run_experiment(ExperimentConfig const &config, SeriesFrame const &raw,
                            std::string const &data_source, EpochObserver const &observer)
{
  if (auto v = config.violations(); !v.empty())
  {
    throw std::invalid_argument("invalid config: " + join(v));
  }
  PreparedSplit const   split   = prepare_split(raw, config);
  WindowedDataset const train_w = make_windows(split.train, config.features, config.history, config.horizon);
  WindowedDataset const test_w  = make_windows(split.test, config.features, config.history, config.horizon);

  StackSpec spec;
  spec.input_width = config.features.size();
  spec.cell        = StackSpec::Cell::Lstm;
  spec.units       = config.units;
  spec.activations = config.activations;
  spec.n_output    = config.n_output();
  Rng init(derive_seed(config.seed, 0));

  TrainResult trained = train(build_stack(spec, init), config, train_w, test_w, observer);

  TrainOutcome out;
  out.checkpoint = {config, split.stats, std::move(trained.model), data_source};
  out.history    = std::move(trained.history);
  if (out.history.epochs() >= 2)
  {
    out.diagnosis = detect_overfitting(out.history);
  }
  else
  {
    out.diagnosis.reason = "too few epochs to judge overfitting";
  }
  return out;
}

ForecastResult forecast_at(Checkpoint const &ckpt, SeriesFrame const &raw, std::optional<Hour> at)
{
  SeriesFrame const picked = select_columns(raw, required_columns(ckpt.config));
  std::size_t       row    = 0;
  if (at)
  {
    auto const &hours = picked.hours();
    auto const  it    = std::lower_bound(hours.begin(), hours.end(), *at);
    if (it == hours.end() || *it != *at)
    {
      std::string range = hours.empty() ? std::string("empty data")
                                        : format_timestamp(hours.front()) + " .. " +
                                              format_timestamp(hours.back());
      throw DataError("timestamp " + format_timestamp(*at) + " is not in the data (" + range + ")");
    }
    row = static_cast<std::size_t>(it - hours.begin());
  }
  else
  {
    row = chronological_split(picked, ckpt.config.train_fraction).first.length();
  }
  return forecast(ckpt.model, picked, row, ckpt.config.history, ckpt.config.features, ckpt.stats);
}

AccuracyReport evaluate_checkpoint(Checkpoint const &ckpt, SeriesFrame const &raw,
                                   std::string const &label)
{
  SeriesFrame const picked = select_columns(raw, required_columns(ckpt.config));
  SeriesFrame const test   = chronological_split(picked, ckpt.config.train_fraction).second;
  WindowedDataset const ds =
      make_windows(normalize(test, ckpt.stats), ckpt.config.features, ckpt.config.history,
                   ckpt.config.horizon);
  return evaluate_model(ckpt.model, ds, ckpt.stats, label);
}

}  // namespace tempora
