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

#include "tempora/data.hpp"

#include "tempora/random.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace tempora {

namespace {

std::string_view trim(std::string_view s)
{
  auto const first = s.find_first_not_of(" \t\r\n\"");
  if (first == std::string_view::npos)
  {
    return {};
  }
  auto const last = s.find_last_not_of(" \t\r\n\"");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string_view s)
{
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string_view> split(std::string_view line, char sep)
{
  std::vector<std::string_view> out;
  std::size_t                   start = 0;
  while (true)
  {
    auto const pos = line.find(sep, start);
    if (pos == std::string_view::npos)
    {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::optional<double> parse_double(std::string_view s)
{
  double v{};
  if (!s.empty() && s.front() == '+')
  {
    s.remove_prefix(1);
  }
  auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
  {
    return std::nullopt;
  }
  return v;
}

std::optional<int> parse_int(std::string_view s)
{
  int v{};
  auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
  {
    return std::nullopt;
  }
  return v;
}

bool is_missing(std::string_view cell)
{
  return cell.empty() || lower(cell) == "n/a";
}

[[noreturn]] void bad_timestamp(std::string_view text)
{
  throw DataError("unparseable timestamp '" + std::string(text) + "'");
}

// "HH", "HH:MM" or "HH:MM:SS" with zero minutes and seconds
int parse_clock(std::string_view text, std::string_view whole)
{
  auto const parts = split(text, ':');
  if (parts.empty() || parts.size() > 3)
  {
    bad_timestamp(whole);
  }
  auto const hour = parse_int(parts[0]);
  if (!hour || *hour < 0 || *hour > 23)
  {
    bad_timestamp(whole);
  }
  for (std::size_t k = 1; k < parts.size(); ++k)
  {
    auto const v = parse_int(parts[k]);
    if (!v || *v != 0)
    {
      throw DataError("timestamp '" + std::string(whole) + "' is not on the hour");
    }
  }
  return *hour;
}

Hour to_hours(int y, int m, int d, int hour, std::string_view whole)
{
  using namespace std::chrono;
  year_month_day const ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok())
  {
    bad_timestamp(whole);
  }
  auto const days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<Hour>(days) * 24 + hour;
}

std::uint64_t fnv1a(std::uint64_t h, void const *data, std::size_t n)
{
  auto const *p = static_cast<unsigned char const *>(data);
  for (std::size_t i = 0; i < n; ++i)
  {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Hour parse_timestamp(std::string_view text)
{
  auto const t = trim(text);
  if (t.size() >= 10 && t[4] == '-' && t[7] == '-')
  {
    auto const y = parse_int(t.substr(0, 4));
    auto const m = parse_int(t.substr(5, 2));
    auto const d = parse_int(t.substr(8, 2));
    if (!y || !m || !d)
    {
      bad_timestamp(t);
    }
    int hour = 0;
    if (t.size() > 10)
    {
      if (t[10] != 'T' && t[10] != ' ')
      {
        bad_timestamp(t);
      }
      auto clock = t.substr(11);
      if (!clock.empty() && clock.back() == 'Z')
      {
        clock.remove_suffix(1);
      }
      hour = parse_clock(clock, t);
    }
    return to_hours(*y, *m, *d, hour, t);
  }
  if (t.size() >= 10 && t[2] == '.' && t[5] == '.')
  {
    auto const d = parse_int(t.substr(0, 2));
    auto const m = parse_int(t.substr(3, 2));
    auto const y = parse_int(t.substr(6, 4));
    if (!y || !m || !d)
    {
      bad_timestamp(t);
    }
    int hour = 0;
    if (t.size() > 10)
    {
      if (t[10] != ' ')
      {
        bad_timestamp(t);
      }
      hour = parse_clock(trim(t.substr(11)), t);
    }
    return to_hours(*y, *m, *d, hour, t);
  }
  bad_timestamp(t);
}

namespace {

std::chrono::year_month_day civil(Hour h, int &hour_of_day)
{
  using namespace std::chrono;
  Hour days = h / 24;
  Hour rem  = h % 24;
  if (rem < 0)
  {
    rem += 24;
    days -= 1;
  }
  hour_of_day = static_cast<int>(rem);
  return year_month_day{sys_days{std::chrono::days{days}}};
}

}  // namespace

std::string format_timestamp(Hour h)
{
  int        hod = 0;
  auto const ymd = civil(h, hod);
  char       buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:00", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), hod);
  return buf;
}

std::string format_dmyh(Hour h)
{
  int        hod = 0;
  auto const ymd = civil(h, hod);
  char       buf[32];
  std::snprintf(buf, sizeof buf, "%02u.%02u.%04d %02d", static_cast<unsigned>(ymd.day()),
                static_cast<unsigned>(ymd.month()), static_cast<int>(ymd.year()), hod);
  return buf;
}

SeriesFrame::SeriesFrame(std::vector<Hour> hours, std::vector<std::string> names,
                         std::vector<std::vector<double>> columns)
  : hours_(std::move(hours))
  , names_(std::move(names))
  , columns_(std::move(columns))
{
  if (names_.size() != columns_.size())
  {
    throw DataError("SeriesFrame: " + std::to_string(names_.size()) + " names for " +
                    std::to_string(columns_.size()) + " columns");
  }
  for (std::size_t k = 0; k < columns_.size(); ++k)
  {
    if (columns_[k].size() != hours_.size())
    {
      throw DataError("SeriesFrame: column '" + names_[k] + "' has " +
                      std::to_string(columns_[k].size()) + " values for " +
                      std::to_string(hours_.size()) + " timestamps");
    }
    for (double v : columns_[k])
    {
      if (!std::isfinite(v))
      {
        throw DataError("SeriesFrame: non-finite value in column '" + names_[k] + "'");
      }
    }
    if (std::count(names_.begin(), names_.end(), names_[k]) != 1)
    {
      throw DataError("SeriesFrame: duplicate column '" + names_[k] + "'");
    }
  }
  for (std::size_t i = 1; i < hours_.size(); ++i)
  {
    if (hours_[i] <= hours_[i - 1])
    {
      throw DataError("SeriesFrame: timestamps not strictly increasing at row " +
                      std::to_string(i));
    }
  }
}

bool SeriesFrame::has(std::string_view name) const noexcept
{
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t SeriesFrame::index_of(std::string_view name) const
{
  auto const it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end())
  {
    throw DataError("unknown feature '" + std::string(name) + "'");
  }
  return static_cast<std::size_t>(it - names_.begin());
}

std::span<double const> SeriesFrame::column(std::string_view name) const
{
  return columns_[index_of(name)];
}

SeriesFrame SeriesFrame::slice(std::size_t first, std::size_t count) const
{
  if (first + count > length())
  {
    throw DataError("SeriesFrame::slice out of range");
  }
  auto const b = static_cast<std::ptrdiff_t>(first);
  auto const e = static_cast<std::ptrdiff_t>(first + count);
  std::vector<std::vector<double>> cols;
  for (auto const &c : columns_)
  {
    cols.emplace_back(c.begin() + b, c.begin() + e);
  }
  return SeriesFrame({hours_.begin() + b, hours_.begin() + e}, names_, std::move(cols));
}

SeriesFrame SeriesFrame::with_columns(std::vector<std::vector<double>> columns) const
{
  return SeriesFrame(hours_, names_, std::move(columns));
}

void SeriesFrame::validate_ranges() const
{
  for (std::size_t i = 1; i < hours_.size(); ++i)
  {
    if (hours_[i] - hours_[i - 1] != 1)
    {
      throw DataError("timestamps not hourly between " + format_timestamp(hours_[i - 1]) +
                      " and " + format_timestamp(hours_[i]));
    }
  }
  auto check = [&](std::string_view name, auto ok, char const *range) {
    if (!has(name))
    {
      return;
    }
    auto const col = column(name);
    for (std::size_t i = 0; i < col.size(); ++i)
    {
      if (!ok(col[i]))
      {
        throw DataError(std::string(name) + " value " + std::to_string(col[i]) + " at " +
                        format_timestamp(hours_[i]) + " outside " + range);
      }
    }
  };
  check("winddir", [](double v) { return v >= 0.0 && v < 360.0; }, "[0, 360)");
  check("hum", [](double v) { return v >= 0.0 && v <= 100.0; }, "[0, 100]");
  check("solrad", [](double v) { return v >= 0.0; }, "[0, inf)");
  check("windvel", [](double v) { return v >= 0.0; }, "[0, inf)");
}

HeaderSchema HeaderSchema::defaults()
{
  HeaderSchema s;
  auto add = [&](std::string canon, std::initializer_list<char const *> spellings) {
    s.aliases[canon] = canon;
    for (auto const *sp : spellings)
    {
      s.aliases[sp] = canon;
    }
  };
  add("datetime", {"date", "time", "timestamp", "date_time", "date time"});
  add("temp", {"temperature", "air_temperature", "t"});
  add("hum", {"humidity", "relative_humidity", "rh"});
  add("airpr", {"pressure", "air_pressure", "airpressure"});
  add("solrad", {"solar_radiation", "radiation", "solarradiation"});
  add("windvel", {"wind_velocity", "wind_speed", "windspeed"});
  add("winddir", {"wind_direction", "winddirection"});
  return s;
}

std::optional<std::string> HeaderSchema::canonical(std::string_view header) const
{
  auto const it = aliases.find(lower(trim(header)));
  if (it == aliases.end())
  {
    return std::nullopt;
  }
  return it->second;
}

IngestResult ingest_csv(std::string const &path, HeaderSchema const &schema)
{
  std::ifstream in(path);
  if (!in)
  {
    throw DataError("cannot open '" + path + "'");
  }
  return ingest_csv(in, schema);
}

IngestResult ingest_csv(std::istream &in, HeaderSchema const &schema)
{
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line))
  {
    ++line_no;
    if (!trim(line).empty())
    {
      break;
    }
  }
  if (line_no == 0 || trim(line).empty())
  {
    throw DataError("CSV has no header row");
  }
  if (line.rfind("\xEF\xBB\xBF", 0) == 0)
  {
    line.erase(0, 3);
  }

  // header -> canonical column slots
  auto const               header = split(line, ',');
  std::vector<int>         slot(header.size(), -1);  // -1 datetime, else feature index
  std::vector<std::size_t> feature_of_col(header.size(), 0);
  std::optional<std::size_t> datetime_col;
  std::array<std::optional<std::size_t>, kFeatureNames.size()> present;
  for (std::size_t c = 0; c < header.size(); ++c)
  {
    auto const canon = schema.canonical(header[c]);
    if (!canon)
    {
      throw DataError("line " + std::to_string(line_no) + ": unmappable header '" +
                      std::string(trim(header[c])) + "'");
    }
    if (*canon == "datetime")
    {
      if (datetime_col)
      {
        throw DataError("duplicate datetime column");
      }
      datetime_col = c;
      continue;
    }
    auto const it = std::find(kFeatureNames.begin(), kFeatureNames.end(), *canon);
    auto const k  = static_cast<std::size_t>(it - kFeatureNames.begin());
    if (present[k])
    {
      throw DataError("duplicate column for feature '" + *canon + "'");
    }
    present[k]        = c;
    slot[c]           = static_cast<int>(k);
    feature_of_col[c] = k;
  }
  if (!datetime_col)
  {
    throw DataError("CSV header lacks a datetime column");
  }
  if (!present[0])
  {
    throw DataError("CSV header lacks a temp column");
  }

  std::vector<std::string> names;
  std::vector<std::size_t> feature_cols;  // column index per kept feature, canonical order
  for (std::size_t k = 0; k < kFeatureNames.size(); ++k)
  {
    if (present[k])
    {
      names.emplace_back(kFeatureNames[k]);
      feature_cols.push_back(*present[k]);
    }
  }

  IngestReport                     report;
  std::vector<Hour>                hours;
  std::vector<std::vector<double>> cols(names.size());
  std::vector<double>              row(names.size());

  while (std::getline(in, line))
  {
    ++line_no;
    auto const cells = split(line, ',');
    bool const blank = std::all_of(cells.begin(), cells.end(),
                                   [](std::string_view c) { return trim(c).empty(); });
    if (blank)
    {
      ++report.removed_empty;
      continue;
    }
    if (cells.size() != header.size())
    {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(cells.size()));
    }
    Hour h{};
    try
    {
      h = parse_timestamp(cells[*datetime_col]);
    }
    catch (DataError const &e)
    {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
    for (std::size_t k = 0; k < feature_cols.size(); ++k)
    {
      auto const cell = trim(cells[feature_cols[k]]);
      if (is_missing(cell))
      {
        row[k] = 0.0;
        ++report.replaced_na;
        continue;
      }
      auto const v = parse_double(cell);
      if (!v)
      {
        throw DataError("line " + std::to_string(line_no) + ": bad number '" + std::string(cell) +
                        "' in column " + names[k]);
      }
      row[k] = *v;
      if (names[k] == "winddir")
      {
        row[k] = std::fmod(row[k], 360.0);
        if (row[k] < 0.0)
        {
          row[k] += 360.0;
        }
      }
    }

    if (!hours.empty())
    {
      Hour const prev = hours.back();
      if (h <= prev)
      {
        throw DataError("line " + std::to_string(line_no) + ": timestamp " + format_timestamp(h) +
                        " does not follow " + format_timestamp(prev));
      }
      auto const missing = static_cast<std::size_t>(h - prev - 1);
      if (missing > kMaxFillHours)
      {
        throw DataError("line " + std::to_string(line_no) + ": gap of " + std::to_string(missing) +
                        " hours after " + format_timestamp(prev) + " exceeds the " +
                        std::to_string(kMaxFillHours) + "-hour forward-fill limit");
      }
      if (missing > 0)
      {
        report.gaps.push_back(format_timestamp(prev + 1) + " .. " + format_timestamp(h - 1) +
                              ": " + std::to_string(missing) + " hour(s) forward-filled");
        for (std::size_t m = 1; m <= missing; ++m)
        {
          hours.push_back(prev + static_cast<Hour>(m));
          for (auto &c : cols)
          {
            c.push_back(c.back());
          }
        }
        report.filled_hours += missing;
      }
    }
    hours.push_back(h);
    for (std::size_t k = 0; k < cols.size(); ++k)
    {
      cols[k].push_back(row[k]);
    }
  }

  report.rows = hours.size();
  SeriesFrame frame(std::move(hours), std::move(names), std::move(cols));
  frame.validate_ranges();
  return {std::move(frame), std::move(report)};
}

void write_csv(SeriesFrame const &frame, std::ostream &out)
{
  out << "datetime";
  for (auto const &n : frame.names())
  {
    out << ',' << n;
  }
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < frame.length(); ++i)
  {
    out << format_timestamp(frame.hours()[i]);
    for (std::size_t k = 0; k < frame.names().size(); ++k)
    {
      std::snprintf(buf, sizeof buf, "%.9g", frame.column(k)[i]);
      out << ',' << buf;
    }
    out << '\n';
  }
}

void write_csv(SeriesFrame const &frame, std::string const &path)
{
  std::ofstream out(path);
  if (!out)
  {
    throw DataError("cannot write '" + path + "'");
  }
  write_csv(frame, out);
  if (!out)
  {
    throw DataError("failed writing '" + path + "'");
  }
}

NormalizationStats NormalizationStats::compute(SeriesFrame const &frame)
{
  if (frame.length() == 0)
  {
    throw DataError("cannot compute normalization stats of an empty frame");
  }
  NormalizationStats s;
  s.names = frame.names();
  for (std::size_t k = 0; k < frame.names().size(); ++k)
  {
    auto const col  = frame.column(k);
    double     mean = 0.0;
    for (double v : col)
    {
      mean += v;
    }
    mean /= static_cast<double>(col.size());
    double var = 0.0;
    for (double v : col)
    {
      var += (v - mean) * (v - mean);
    }
    var /= static_cast<double>(col.size());
    s.mean.push_back(mean);
    s.stddev.push_back(std::sqrt(var));
  }
  return s;
}

std::size_t NormalizationStats::index_of(std::string_view name) const
{
  auto const it = std::find(names.begin(), names.end(), name);
  if (it == names.end())
  {
    throw DataError("normalization stats do not cover feature '" + std::string(name) + "'");
  }
  return static_cast<std::size_t>(it - names.begin());
}

double NormalizationStats::normalize(std::string_view feature, double v) const
{
  auto const k = index_of(feature);
  if (!(stddev[k] > 0.0))
  {
    throw DataError("feature '" + std::string(feature) + "' has zero standard deviation");
  }
  return (v - mean[k]) / stddev[k];
}

double NormalizationStats::denormalize(std::string_view feature, double z) const
{
  auto const k = index_of(feature);
  return z * stddev[k] + mean[k];
}

std::uint64_t NormalizationStats::fingerprint() const noexcept
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t k = 0; k < names.size(); ++k)
  {
    h = fnv1a(h, names[k].data(), names[k].size());
    h = fnv1a(h, &mean[k], sizeof(double));
    h = fnv1a(h, &stddev[k], sizeof(double));
  }
  return h;
}

void NormalizationStats::save(std::string const &path) const
{
  std::ofstream out(path);
  if (!out)
  {
    throw DataError("cannot write '" + path + "'");
  }
  out << "feature,mean,std\n";
  char buf[96];
  for (std::size_t k = 0; k < names.size(); ++k)
  {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", mean[k], stddev[k]);
    out << names[k] << ',' << buf << '\n';
  }
}

NormalizationStats NormalizationStats::load(std::string const &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw DataError("cannot open '" + path + "'");
  }
  std::string        line;
  NormalizationStats s;
  std::getline(in, line);
  while (std::getline(in, line))
  {
    if (trim(line).empty())
    {
      continue;
    }
    auto const f = split(line, ',');
    auto const m = f.size() == 3 ? parse_double(trim(f[1])) : std::nullopt;
    auto const d = f.size() == 3 ? parse_double(trim(f[2])) : std::nullopt;
    if (!m || !d)
    {
      throw DataError("malformed stats line '" + line + "'");
    }
    s.names.emplace_back(trim(f[0]));
    s.mean.push_back(*m);
    s.stddev.push_back(*d);
  }
  return s;
}

SeriesFrame normalize(SeriesFrame const &frame, NormalizationStats const &stats)
{
  std::vector<std::vector<double>> cols;
  for (std::size_t k = 0; k < frame.names().size(); ++k)
  {
    auto const &name = frame.names()[k];
    auto const  s    = stats.index_of(name);
    if (!(stats.stddev[s] > 0.0))
    {
      throw DataError("feature '" + name + "' has zero standard deviation");
    }
    auto const          col = frame.column(k);
    std::vector<double> out(col.size());
    for (std::size_t i = 0; i < col.size(); ++i)
    {
      out[i] = (col[i] - stats.mean[s]) / stats.stddev[s];
    }
    cols.push_back(std::move(out));
  }
  return frame.with_columns(std::move(cols));
}

SeriesFrame denormalize(SeriesFrame const &frame, NormalizationStats const &stats)
{
  std::vector<std::vector<double>> cols;
  for (std::size_t k = 0; k < frame.names().size(); ++k)
  {
    auto const          s   = stats.index_of(frame.names()[k]);
    auto const          col = frame.column(k);
    std::vector<double> out(col.size());
    for (std::size_t i = 0; i < col.size(); ++i)
    {
      out[i] = col[i] * stats.stddev[s] + stats.mean[s];
    }
    cols.push_back(std::move(out));
  }
  return frame.with_columns(std::move(cols));
}

WindowedDataset::WindowedDataset(Matrix features, std::vector<double> target,
                                 std::vector<Hour> hours, std::vector<std::string> names,
                                 std::size_t history, std::size_t horizon)
  : features_(std::move(features))
  , target_(std::move(target))
  , hours_(std::move(hours))
  , names_(std::move(names))
  , history_{history}
  , horizon_{horizon}
{
  if (history_ == 0 || horizon_ == 0)
  {
    throw DataError("history and horizon must be positive");
  }
  if (target_.size() < history_ + horizon_)
  {
    throw DataError("frame of length " + std::to_string(target_.size()) +
                    " is too short for history " + std::to_string(history_) + " + horizon " +
                    std::to_string(horizon_));
  }
}

SequenceBatch WindowedDataset::inputs(std::span<std::size_t const> samples) const
{
  std::size_t const   F = features_.cols();
  std::vector<double> data;
  data.reserve(samples.size() * history_ * F);
  for (auto s : samples)
  {
    if (s >= this->samples())
    {
      throw DataError("sample index out of range");
    }
    auto const src = features_.data().subspan(s * F, history_ * F);
    data.insert(data.end(), src.begin(), src.end());
  }
  return SequenceBatch(samples.size(), history_, F, std::move(data));
}

Matrix WindowedDataset::targets(std::span<std::size_t const> samples) const
{
  Matrix y(samples.size(), horizon_);
  for (std::size_t r = 0; r < samples.size(); ++r)
  {
    auto const s = samples[r];
    if (s >= this->samples())
    {
      throw DataError("sample index out of range");
    }
    for (std::size_t k = 0; k < horizon_; ++k)
    {
      y(r, k) = target_[s + history_ + k];
    }
  }
  return y;
}

WindowedDataset make_windows(SeriesFrame const &frame, std::span<std::string const> features,
                             std::size_t history, std::size_t horizon)
{
  if (!frame.has("temp"))
  {
    throw DataError("frame has no temp column");
  }
  if (features.empty())
  {
    throw DataError("no input features selected");
  }
  std::vector<std::size_t> idx;
  for (auto const &f : features)
  {
    idx.push_back(frame.index_of(f));
  }
  if (history == 0 || horizon == 0)
  {
    throw DataError("history and horizon must be positive");
  }
  if (frame.length() < history + horizon)
  {
    throw DataError("frame of length " + std::to_string(frame.length()) +
                    " is too short for history " + std::to_string(history) + " + horizon " +
                    std::to_string(horizon));
  }
  std::size_t const L = frame.length();
  Matrix            x(L, idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k)
  {
    auto const col = frame.column(idx[k]);
    for (std::size_t i = 0; i < L; ++i)
    {
      x(i, k) = col[i];
    }
  }
  auto const temp = frame.column("temp");
  return WindowedDataset(std::move(x), {temp.begin(), temp.end()}, frame.hours(),
                         {features.begin(), features.end()}, history, horizon);
}

std::pair<SeriesFrame, SeriesFrame> chronological_split(SeriesFrame const &frame,
                                                        double             train_fraction)
{
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
  {
    throw std::invalid_argument("train fraction must lie in (0, 1), got " +
                                std::to_string(train_fraction));
  }
  auto const boundary =
    static_cast<std::size_t>(std::floor(static_cast<double>(frame.length()) * train_fraction));
  return {frame.slice(0, boundary), frame.slice(boundary, frame.length() - boundary)};
}

namespace {

struct SpecField
{
  char const *name;
  double SyntheticWeatherSpec::*member;
};

constexpr SpecField kSpecFields[] = {
  {"base_temp", &SyntheticWeatherSpec::base_temp},
  {"seasonal_amplitude", &SyntheticWeatherSpec::seasonal_amplitude},
  {"seasonal_phase", &SyntheticWeatherSpec::seasonal_phase},
  {"diurnal_amplitude", &SyntheticWeatherSpec::diurnal_amplitude},
  {"diurnal_phase", &SyntheticWeatherSpec::diurnal_phase},
  {"temp_noise", &SyntheticWeatherSpec::temp_noise},
  {"anomaly_std", &SyntheticWeatherSpec::anomaly_std},
  {"anomaly_hours", &SyntheticWeatherSpec::anomaly_hours},
  {"pressure_std", &SyntheticWeatherSpec::pressure_std},
  {"pressure_hours", &SyntheticWeatherSpec::pressure_hours},
  {"hum_noise", &SyntheticWeatherSpec::hum_noise},
  {"airpr_noise", &SyntheticWeatherSpec::airpr_noise},
  {"solrad_noise", &SyntheticWeatherSpec::solrad_noise},
  {"windvel_noise", &SyntheticWeatherSpec::windvel_noise},
  {"anomaly_pressure_coupling", &SyntheticWeatherSpec::anomaly_pressure_coupling},
  {"hum_temp_coupling", &SyntheticWeatherSpec::hum_temp_coupling},
  {"solrad_peak", &SyntheticWeatherSpec::solrad_peak},
  {"windvel_pressure_coupling", &SyntheticWeatherSpec::windvel_pressure_coupling},
};

}  // namespace

void SyntheticWeatherSpec::validate() const
{
  std::vector<std::string> errors;
  if (days == 0)
  {
    errors.emplace_back("days must be positive");
  }
  for (auto const &f : kSpecFields)
  {
    double const v = this->*f.member;
    if (!std::isfinite(v))
    {
      errors.push_back(std::string(f.name) + " must be finite");
    }
  }
  for (double SyntheticWeatherSpec::*m :
       {&SyntheticWeatherSpec::temp_noise, &SyntheticWeatherSpec::anomaly_std,
        &SyntheticWeatherSpec::pressure_std, &SyntheticWeatherSpec::hum_noise,
        &SyntheticWeatherSpec::airpr_noise, &SyntheticWeatherSpec::solrad_noise,
        &SyntheticWeatherSpec::windvel_noise, &SyntheticWeatherSpec::solrad_peak})
  {
    if (this->*m < 0.0)
    {
      errors.emplace_back("noise standard deviations and solrad_peak must be >= 0");
      break;
    }
  }
  if (!(anomaly_hours > 0.0) || !(pressure_hours > 0.0))
  {
    errors.emplace_back("correlation times must be positive");
  }
  if (!errors.empty())
  {
    std::string msg = "invalid synthetic spec:";
    for (auto const &e : errors)
    {
      msg += " " + e + ";";
    }
    throw std::invalid_argument(msg);
  }
}

SyntheticWeatherSpec parse_synthetic_spec(std::string_view text)
{
  SyntheticWeatherSpec spec;
  for (auto item : split(text, ','))
  {
    item = trim(item);
    if (item.empty())
    {
      continue;
    }
    auto const eq = item.find('=');
    if (eq == std::string_view::npos)
    {
      throw std::invalid_argument("synthetic spec item '" + std::string(item) +
                                  "' is not key=value");
    }
    auto const key   = lower(trim(item.substr(0, eq)));
    auto const value = trim(item.substr(eq + 1));
    if (key == "start")
    {
      spec.start = parse_timestamp(value);
      continue;
    }
    auto const v = parse_double(value);
    if (!v)
    {
      throw std::invalid_argument("synthetic spec: bad value for '" + key + "'");
    }
    if (key == "seed")
    {
      spec.seed = static_cast<std::uint64_t>(*v);
    }
    else if (key == "years")
    {
      spec.days = static_cast<std::size_t>(*v * 365.0);
    }
    else if (key == "days")
    {
      spec.days = static_cast<std::size_t>(*v);
    }
    else
    {
      auto const it = std::find_if(std::begin(kSpecFields), std::end(kSpecFields),
                                   [&](SpecField const &f) { return key == f.name; });
      if (it == std::end(kSpecFields))
      {
        throw std::invalid_argument("synthetic spec: unknown key '" + key + "'");
      }
      spec.*(it->member) = *v;
    }
  }
  spec.validate();
  return spec;
}

std::string describe(SyntheticWeatherSpec const &spec)
{
  std::ostringstream os;
  os << "seed=" << spec.seed << ",days=" << spec.days << ",start=" << format_timestamp(spec.start);
  char buf[64];
  for (auto const &f : kSpecFields)
  {
    std::snprintf(buf, sizeof buf, "%.17g", spec.*f.member);
    os << ',' << f.name << '=' << buf;
  }
  return os.str();
}

SeriesFrame generate_synthetic(SyntheticWeatherSpec const &spec)
{
  spec.validate();
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  std::size_t const n = spec.days * 24;
  Rng               rng(spec.seed);

  double const phi_p = std::exp(-1.0 / spec.pressure_hours);
  double const phi_a = std::exp(-1.0 / spec.anomaly_hours);
  double const sd_p  = spec.pressure_std * std::sqrt(1.0 - phi_p * phi_p);
  double const sd_a  = spec.anomaly_std * std::sqrt(1.0 - phi_a * phi_a);

  std::vector<Hour>                hours(n);
  std::vector<std::vector<double>> cols(kFeatureNames.size(), std::vector<double>(n));

  double pressure = spec.pressure_std * rng.normal();
  double anomaly  = spec.anomaly_std * rng.normal();
  for (std::size_t t = 0; t < n; ++t)
  {
    Hour const h = spec.start + static_cast<Hour>(t);
    hours[t]     = h;
    auto const hod = static_cast<double>(((h % 24) + 24) % 24);

    // draw order is fixed: keep it stable for reproducibility
    double const n_p     = rng.normal();
    double const n_a     = rng.normal();
    double const n_temp  = rng.normal();
    double const n_hum   = rng.normal();
    double const n_airpr = rng.normal();
    double const n_sol   = rng.normal();
    double const n_wind  = rng.normal();
    double const u_dir   = rng.uniform();

    pressure = phi_p * pressure + sd_p * n_p;
    anomaly  = phi_a * anomaly + (1.0 - phi_a) * spec.anomaly_pressure_coupling * pressure +
              sd_a * n_a;

    double const season_wave = std::sin(kTwoPi * static_cast<double>(t) / 8760.0 + spec.seasonal_phase);
    double const day_wave    = std::sin(kTwoPi * hod / 24.0 + spec.diurnal_phase);
    double const seasonal    = spec.seasonal_amplitude * season_wave;
    double const diurnal     = spec.diurnal_amplitude * day_wave;

    double const temp = spec.base_temp + seasonal + diurnal + anomaly + spec.temp_noise * n_temp;

    double const hum = std::clamp(
      75.0 + spec.hum_temp_coupling * (diurnal + 0.5 * anomaly) + spec.hum_noise * n_hum, 0.0,
      100.0);

    double const airpr = 1013.0 + pressure + spec.airpr_noise * n_airpr;

    double const sun = std::sin(kTwoPi * (hod - 6.0) / 24.0);
    double       solrad = 0.0;
    if (sun > 0.0)
    {
      double const clear = spec.solrad_peak * sun * (0.55 + 0.45 * season_wave);
      double const cloud = 0.4 + 0.6 * sigmoid(0.2 * pressure);
      solrad             = std::max(0.0, clear * cloud + spec.solrad_noise * n_sol);
    }

    double const windvel =
      std::max(0.0, 3.0 + spec.windvel_pressure_coupling * std::abs(pressure) +
                      spec.windvel_noise * n_wind);

    double winddir = 360.0 * u_dir;
    if (winddir >= 360.0)
    {
      winddir = 0.0;
    }

    cols[0][t] = temp;
    cols[1][t] = hum;
    cols[2][t] = airpr;
    cols[3][t] = solrad;
    cols[4][t] = windvel;
    cols[5][t] = winddir;
  }
  SeriesFrame frame(std::move(hours), {kFeatureNames.begin(), kFeatureNames.end()}, std::move(cols));
  frame.validate_ranges();
  return frame;
}

Histogram feature_histogram(SeriesFrame const &frame, std::string_view feature, std::size_t bins)
{
  if (bins == 0)
  {
    throw std::invalid_argument("histogram needs at least one bin");
  }
  auto const col = frame.column(feature);
  Histogram  h;
  h.counts.assign(bins, 0);
  if (feature == "winddir")
  {
    h.lo = 0.0;
    h.hi = 360.0;
  }
  else if (feature == "hum")
  {
    h.lo = 0.0;
    h.hi = 100.0;
  }
  else if (!col.empty())
  {
    auto const [mn, mx] = std::minmax_element(col.begin(), col.end());
    h.lo                = *mn;
    h.hi                = *mx;
  }
  double const width = (h.hi - h.lo) / static_cast<double>(bins);
  for (double v : col)
  {
    std::size_t b = 0;
    if (width > 0.0)
    {
      double const pos = std::floor((v - h.lo) / width);
      b = pos <= 0.0 ? 0 : std::min(static_cast<std::size_t>(pos), bins - 1);
    }
    ++h.counts[b];
  }
  return h;
}

}  // namespace tempora
