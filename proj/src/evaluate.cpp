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

#include "tempora/evaluate.hpp"

#include "tempora/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

namespace tempora {

namespace {

void require_pair(std::span<double const> p, std::span<double const> a, char const *what)
{
  if (p.size() != a.size())
  {
    throw ShapeError(std::string(what) + ": length mismatch " + std::to_string(p.size()) + " vs " +
                     std::to_string(a.size()));
  }
  if (p.empty())
  {
    throw ShapeError(std::string(what) + ": empty series");
  }
}

}  // namespace

double rmse(std::span<double const> p, std::span<double const> a)
{
  require_pair(p, a, "rmse");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
  {
    s += (p[i] - a[i]) * (p[i] - a[i]);
  }
  return std::sqrt(s / static_cast<double>(p.size()));
}

double mae(std::span<double const> p, std::span<double const> a)
{
  require_pair(p, a, "mae");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
  {
    s += std::abs(p[i] - a[i]);
  }
  return s / static_cast<double>(p.size());
}

std::size_t max_error_index(std::span<double const> p, std::span<double const> a)
{
  require_pair(p, a, "max_error");
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i)
  {
    if (std::abs(p[i] - a[i]) > std::abs(p[best] - a[best]))
    {
      best = i;
    }
  }
  return best;
}

double max_error(std::span<double const> p, std::span<double const> a)
{
  auto const i = max_error_index(p, a);
  return std::abs(p[i] - a[i]);
}

std::vector<double> predict_window(SequentialModel const &model, Matrix const &raw_window,
                                   std::span<std::string const> features,
                                   NormalizationStats const &stats)
{
  if (raw_window.cols() != features.size() || raw_window.cols() != model.input_width())
  {
    throw ShapeError("forecast: window has " + std::to_string(raw_window.cols()) +
                     " columns, model expects " + std::to_string(model.input_width()));
  }
  if (raw_window.rows() == 0)
  {
    throw ShapeError("forecast: empty window");
  }
  require_finite(raw_window, "forecast window");

  std::size_t const H = raw_window.rows();
  SequenceBatch     x(1, H, features.size());
  for (std::size_t f = 0; f < features.size(); ++f)
  {
    auto const s = stats.index_of(features[f]);
    for (std::size_t t = 0; t < H; ++t)
    {
      x.at(0, t, f) = (raw_window(t, f) - stats.mean[s]) / stats.stddev[s];
    }
  }
  Matrix const        out = forward_sequence(model, x);
  std::vector<double> pred(out.cols());
  for (std::size_t k = 0; k < out.cols(); ++k)
  {
    pred[k] = stats.denormalize("temp", out(0, k));
  }
  return pred;
}

ForecastResult forecast(SequentialModel const &model, SeriesFrame const &raw, std::size_t end_row,
                        std::size_t history, std::span<std::string const> features,
                        NormalizationStats const &stats)
{
  std::size_t const K = model.output_width();
  if (end_row >= raw.length())
  {
    throw DataError("forecast origin row " + std::to_string(end_row) + " is outside the data");
  }
  if (history == 0 || end_row + 1 < history)
  {
    throw DataError("forecast needs " + std::to_string(history) + " hours of history before " +
                    format_timestamp(raw.hours()[end_row]) + ", only " +
                    std::to_string(end_row + 1) + " available");
  }
  if (end_row + 1 + K > raw.length())
  {
    throw DataError("forecast needs " + std::to_string(K) + " observed hours after " +
                    format_timestamp(raw.hours()[end_row]));
  }
  std::size_t const first = end_row + 1 - history;
  Matrix            window(history, features.size());
  for (std::size_t f = 0; f < features.size(); ++f)
  {
    auto const col = raw.column(features[f]);
    for (std::size_t t = 0; t < history; ++t)
    {
      window(t, f) = col[first + t];
    }
  }

  ForecastResult r;
  r.origin        = raw.hours()[end_row];
  auto const temp = raw.column("temp");
  auto const at   = [&](std::size_t i) { return temp.begin() + static_cast<std::ptrdiff_t>(i); };
  r.history.assign(at(first), at(end_row + 1));
  r.actual.assign(at(end_row + 1), at(end_row + 1 + K));
  r.predicted = predict_window(model, window, features, stats);
  return r;
}

double percentile(std::vector<double> values, double q)
{
  if (values.empty())
  {
    throw std::invalid_argument("percentile of an empty set");
  }
  std::sort(values.begin(), values.end());
  double const      pos = q * static_cast<double>(values.size() - 1);
  std::size_t const lo  = static_cast<std::size_t>(std::floor(pos));
  std::size_t const hi  = std::min(lo + 1, values.size() - 1);
  double const      w   = pos - static_cast<double>(lo);
  return values[lo] + w * (values[hi] - values[lo]);
}

AccuracyReport evaluate_model(SequentialModel const &model, WindowedDataset const &test_ds,
                              NormalizationStats const &stats, std::string label)
{
  std::size_t const n = test_ds.samples();
  if (n == 0)
  {
    throw DataError("evaluate: empty test set");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Matrix const pred   = predict(model, test_ds, idx, worker_threads());
  Matrix const target = test_ds.targets(idx);

  auto const   s    = stats.index_of("temp");
  double const mean = stats.mean[s];
  double const sd   = stats.stddev[s];

  AccuracyReport r;
  r.label   = std::move(label);
  r.horizon = test_ds.horizon();
  r.windows = n;
  std::vector<double> per_rmse(n);
  std::vector<double> p(pred.cols());
  std::vector<double> a(pred.cols());
  double              sum_rmse = 0.0;
  double              sum_mae  = 0.0;
  for (std::size_t w = 0; w < n; ++w)
  {
    for (std::size_t k = 0; k < pred.cols(); ++k)
    {
      p[k] = pred(w, k) * sd + mean;
      a[k] = target(w, k) * sd + mean;
    }
    per_rmse[w] = rmse(p, a);
    sum_rmse += per_rmse[w];
    sum_mae += mae(p, a);
    r.me = std::max(r.me, max_error(p, a));
  }
  r.rmse     = sum_rmse / static_cast<double>(n);
  r.mae      = sum_mae / static_cast<double>(n);
  r.p50_rmse = percentile(per_rmse, 0.5);
  r.p90_rmse = percentile(per_rmse, 0.9);
  return r;
}

void append_metrics_csv(AccuracyReport const &r, std::string const &path)
{
  namespace fs     = std::filesystem;
  bool const fresh = !fs::exists(path) || fs::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out)
  {
    throw DataError("cannot write metrics file '" + path + "'");
  }
  if (fresh)
  {
    out << "model,K,rmse,mae,me,p50_rmse,p90_rmse\n";
  }
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%zu,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.label.c_str(), r.horizon,
                r.rmse, r.mae, r.me, r.p50_rmse, r.p90_rmse);
  out << buf;
}

}  // namespace tempora
