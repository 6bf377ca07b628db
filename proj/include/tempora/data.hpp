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

#include "tempora/layers.hpp"
#include "tempora/numerics.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tempora {

/// Raised for malformed or inconsistent input data.
class DataError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Recognised feature columns, in canonical order.
inline constexpr std::array<std::string_view, 6> kFeatureNames{"temp",  "hum",     "airpr",
                                                               "solrad", "windvel", "winddir"};

/// Hours since 1970-01-01T00:00 (UTC, no DST).
using Hour = std::int64_t;

/// Accepts "YYYY-MM-DDTHH[:MM[:SS]]", "YYYY-MM-DD HH:MM[:SS]" and "DD.MM.YYYY HH:MM[:SS]".
/// Minutes and seconds must be zero.
Hour        parse_timestamp(std::string_view text);
/// "YYYY-MM-DDTHH:00"
std::string format_timestamp(Hour h);
/// "DD.MM.YYYY HH" (day, month, year, hour)
std::string format_dmyh(Hour h);

/**
 * Hourly multivariate observations.
 *
 * All columns have one value per timestamp and timestamps are strictly
 * increasing. Raw frames from ingestion or synthesis additionally satisfy the
 * physical ranges checked by `validate_ranges`.
 */
class SeriesFrame
{
public:
  SeriesFrame() = default;
  SeriesFrame(std::vector<Hour> hours, std::vector<std::string> names,
              std::vector<std::vector<double>> columns);

  std::size_t                     length() const noexcept { return hours_.size(); }
  std::vector<Hour> const        &hours() const noexcept { return hours_; }
  std::vector<std::string> const &names() const noexcept { return names_; }

  bool                    has(std::string_view name) const noexcept;
  std::size_t             index_of(std::string_view name) const;
  std::span<double const> column(std::string_view name) const;
  std::span<double const> column(std::size_t index) const { return columns_.at(index); }

  /// Rows [first, first + count).
  SeriesFrame slice(std::size_t first, std::size_t count) const;
  /// Same timestamps, column values replaced.
  SeriesFrame with_columns(std::vector<std::vector<double>> columns) const;

  /// Throws DataError on hourly spacing or physical range violations.
  void validate_ranges() const;

  friend bool operator==(SeriesFrame const &, SeriesFrame const &) = default;

private:
  std::vector<Hour>                hours_;
  std::vector<std::string>         names_;
  std::vector<std::vector<double>> columns_;
};

/// Maps header spellings onto canonical names ("datetime" plus the six features).
struct HeaderSchema
{
  std::map<std::string, std::string> aliases;  // lower-case spelling -> canonical

  static HeaderSchema defaults();
  std::optional<std::string> canonical(std::string_view header) const;
};

struct IngestReport
{
  std::size_t              rows{0};
  std::size_t              replaced_na{0};
  std::size_t              removed_empty{0};
  std::size_t              filled_hours{0};
  std::vector<std::string> gaps;  // one line per forward-filled gap
};

struct IngestResult
{
  SeriesFrame  frame;
  IngestReport report;
};

/// Largest gap, in missing hours, that ingestion forward-fills.
inline constexpr std::size_t kMaxFillHours = 3;

/**
 * Reads a weather CSV: header row, `datetime` column plus any of the six
 * features (temp required). Empty rows are dropped, "N/A" cells become 0,
 * gaps of up to `kMaxFillHours` missing hours are forward-filled.
 */
IngestResult ingest_csv(std::string const &path, HeaderSchema const &schema = HeaderSchema::defaults());
IngestResult ingest_csv(std::istream &in, HeaderSchema const &schema = HeaderSchema::defaults());

/// Writes `datetime,<features...>` with 9 significant digits.
void write_csv(SeriesFrame const &frame, std::string const &path);
void write_csv(SeriesFrame const &frame, std::ostream &out);

/// Per-feature z-score parameters computed from a training split.
struct NormalizationStats
{
  std::vector<std::string> names;
  std::vector<double>      mean;
  std::vector<double>      stddev;

  static NormalizationStats compute(SeriesFrame const &frame);

  std::size_t index_of(std::string_view name) const;
  double      normalize(std::string_view feature, double v) const;
  double      denormalize(std::string_view feature, double z) const;
  /// Fingerprint of the exact values, for leakage checks.
  std::uint64_t fingerprint() const noexcept;

  void                      save(std::string const &path) const;
  static NormalizationStats load(std::string const &path);

  friend bool operator==(NormalizationStats const &, NormalizationStats const &) = default;
};

SeriesFrame normalize(SeriesFrame const &frame, NormalizationStats const &stats);
SeriesFrame denormalize(SeriesFrame const &frame, NormalizationStats const &stats);

/**
 * Supervised windows over a frame: sample s has inputs at rows
 * [s, s + H) over the chosen features and targets temp at rows
 * [s + H, s + H + K). samples = L - H - K + 1.
 */
class WindowedDataset
{
public:
  WindowedDataset(Matrix features, std::vector<double> target, std::vector<Hour> hours,
                  std::vector<std::string> names, std::size_t history, std::size_t horizon);

  std::size_t samples() const noexcept { return target_.size() + 1 - history_ - horizon_; }
  std::size_t history() const noexcept { return history_; }
  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t feature_count() const noexcept { return features_.cols(); }
  std::vector<std::string> const &feature_names() const noexcept { return names_; }

  SequenceBatch inputs(std::span<std::size_t const> samples) const;
  Matrix        targets(std::span<std::size_t const> samples) const;
  /// Absolute row of the first target of sample s.
  std::size_t target_row(std::size_t s) const noexcept { return s + history_; }
  Hour        target_hour(std::size_t s) const { return hours_.at(s + history_); }

private:
  Matrix                   features_;  // L x F
  std::vector<double>      target_;    // L
  std::vector<Hour>        hours_;
  std::vector<std::string> names_;
  std::size_t              history_;
  std::size_t              horizon_;
};

WindowedDataset make_windows(SeriesFrame const &frame, std::span<std::string const> features,
                             std::size_t history, std::size_t horizon);

/// Prefix/suffix split at floor(L * train_fraction); no shuffling.
std::pair<SeriesFrame, SeriesFrame> chronological_split(SeriesFrame const &frame,
                                                        double             train_fraction);

struct SyntheticWeatherSpec
{
  std::uint64_t seed{2024};
  std::size_t   days{9 * 365};
  Hour          start{parse_timestamp("2010-01-01T00:00")};

  double base_temp{9.0};
  double seasonal_amplitude{9.0};
  double seasonal_phase{-1.83};  // coldest mid-January
  double diurnal_amplitude{4.0};
  double diurnal_phase{-2.36};  // warmest mid-afternoon

  // noise
  double temp_noise{0.2};
  double anomaly_std{2.5};     // persistent weather-driven temperature anomaly
  double anomaly_hours{48.0};  // correlation time of the anomaly
  double pressure_std{8.0};
  double pressure_hours{72.0};
  double hum_noise{3.0};
  double airpr_noise{0.3};
  double solrad_noise{15.0};
  double windvel_noise{0.6};

  // coupling
  double anomaly_pressure_coupling{0.25};  // degC of anomaly drive per hPa
  double hum_temp_coupling{-2.0};          // % per degC of diurnal swing
  double solrad_peak{650.0};
  double windvel_pressure_coupling{0.12};

  /// Throws std::invalid_argument listing violated constraints.
  void validate() const;
};

/// Parses "key=value,key=value" (keys as in the struct, plus `years` = 365-day years).
SyntheticWeatherSpec parse_synthetic_spec(std::string_view text);
std::string          describe(SyntheticWeatherSpec const &spec);

SeriesFrame generate_synthetic(SyntheticWeatherSpec const &spec);

struct Histogram
{
  double                   lo{0.0};
  double                   hi{0.0};
  std::vector<std::size_t> counts;
};

/// Fixed-width bins over the natural range: [0,360) for winddir, [0,100] for
/// hum, the observed [min,max] otherwise.
Histogram feature_histogram(SeriesFrame const &frame, std::string_view feature,
                            std::size_t bins = 36);

}  // namespace tempora
