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

#include "tempora/config.hpp"

#include "tempora/hash.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tempora {

namespace {

std::string join_problems(std::vector<std::string> const &problems)
{
  std::string msg = "invalid configuration";
  for (auto const &p : problems)
  {
    msg += "\n  - " + p;
  }
  return msg;
}

std::string_view trim(std::string_view s)
{
  auto const first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos)
  {
    return {};
  }
  auto const last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(std::string_view v)
{
  std::vector<std::string> out;
  std::string              cur;
  for (char ch : v)
  {
    if (ch == ',' || ch == ' ' || ch == '\t')
    {
      if (!cur.empty())
      {
        out.push_back(std::move(cur));
        cur.clear();
      }
    }
    else
    {
      cur.push_back(ch);
    }
  }
  if (!cur.empty())
  {
    out.push_back(std::move(cur));
  }
  return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view v)
{
  T value{};
  v = trim(v);
  auto const [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
  {
    throw ConfigError({"'" + std::string(key) + "': cannot parse '" + std::string(v) + "' as a number"});
  }
  return value;
}

std::size_t parse_count(std::string_view key, std::string_view v)
{
  v = trim(v);
  if (!v.empty() && v.front() == '-')
  {
    throw ConfigError({"'" + std::string(key) + "' must be a non-negative integer, got '" +
                       std::string(v) + "'"});
  }
  return parse_number<std::size_t>(key, v);
}

double parse_real(std::string_view key, std::string_view v)
{
  // from_chars for double is available in libstdc++ 11+.
  return parse_number<double>(key, v);
}

std::string fmt_real(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ExperimentConfig make_run1()
{
  ExperimentConfig c;
  c.name                = "run1-7day";
  c.features            = {"temp", "hum", "airpr", "solrad", "windvel", "winddir"};
  c.batch_size          = 256;
  c.evaluation_interval = 200;
  c.epochs              = 10;
  c.history             = 168;
  c.horizon             = 168;
  return c;
}

ExperimentConfig make_run2()
{
  ExperimentConfig c;
  c.name                = "run2-1day";
  c.features            = {"temp", "hum", "airpr", "solrad", "windvel"};
  c.batch_size          = 512;
  c.evaluation_interval = 100;
  c.epochs              = 20;
  c.history             = 168;
  c.horizon             = 24;
  return c;
}

ExperimentConfig make_run3()
{
  ExperimentConfig c;
  c.name                = "run3-12hour";
  c.features            = {"temp", "hum", "airpr", "solrad", "windvel"};
  c.batch_size          = 512;
  c.evaluation_interval = 150;
  c.epochs              = 30;
  c.history             = 48;
  c.horizon             = 12;
  c.l2                  = {0.005, 0.005, 0.005};
  return c;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::invalid_argument(join_problems(problems)), problems_(std::move(problems))
{
}

std::vector<std::string> preset_names() { return {"run1-7day", "run2-1day", "run3-12hour"}; }

ExperimentConfig preset(std::string_view name)
{
  if (name == "run1-7day")
  {
    return make_run1();
  }
  if (name == "run2-1day")
  {
    return make_run2();
  }
  if (name == "run3-12hour")
  {
    return make_run3();
  }
  throw ConfigError({"unknown preset '" + std::string(name) +
                     "' (expected run1-7day, run2-1day or run3-12hour)"});
}

std::string normalize_key(std::string_view key)
{
  std::string out;
  bool        space = false;
  for (char ch : trim(key))
  {
    if (ch == '_' || ch == '-' || ch == ' ' || ch == '\t')
    {
      space = !out.empty();
      continue;
    }
    if (space)
    {
      out.push_back(' ');
      space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return out;
}

void apply_setting(ExperimentConfig &c, std::string_view raw_key, std::string_view raw_value)
{
  std::string const key   = normalize_key(raw_key);
  std::string_view  value = trim(raw_value);

  if (key == "name")
  {
    c.name = std::string(value);
  }
  else if (key == "batch size")
  {
    c.batch_size = parse_count(key, value);
  }
  else if (key == "evaluation interval")
  {
    c.evaluation_interval = parse_count(key, value);
  }
  else if (key == "epochs")
  {
    c.epochs = parse_count(key, value);
  }
  else if (key == "historical data")
  {
    c.history = parse_count(key, value);
  }
  else if (key == "future steps" || key == "n output")
  {
    c.horizon = parse_count(key, value);
  }
  else if (key == "features")
  {
    c.features = split_list(value);
  }
  else if (key == "lstm units")
  {
    c.units.clear();
    for (auto const &u : split_list(value))
    {
      c.units.push_back(parse_count(key, u));
    }
  }
  else if (key == "lstm activations")
  {
    c.activations.clear();
    for (auto const &a : split_list(value))
    {
      try
      {
        c.activations.push_back(parse_activation(a));
      }
      catch (std::invalid_argument const &)
      {
        throw ConfigError({"'" + key + "': unknown activation '" + a + "'"});
      }
    }
  }
  else if (key == "l2")
  {
    double const v = parse_real(key, value);
    c.l2           = {v, v, v};
  }
  else if (key == "l2 kernel")
  {
    c.l2.kernel = parse_real(key, value);
  }
  else if (key == "l2 recurrent")
  {
    c.l2.recurrent = parse_real(key, value);
  }
  else if (key == "l2 bias")
  {
    c.l2.bias = parse_real(key, value);
  }
  else if (key == "learning rate")
  {
    c.learning_rate = parse_real(key, value);
  }
  else if (key == "clip norm")
  {
    c.clip_norm = parse_real(key, value);
  }
  else if (key == "train fraction")
  {
    c.train_fraction = parse_real(key, value);
  }
  else if (key == "seed")
  {
    c.seed = parse_number<std::uint64_t>(key, value);
  }
  else if (key == "eval stride")
  {
    c.eval_stride = parse_count(key, value);
  }
  else
  {
    throw ConfigError({"unknown key '" + std::string(trim(raw_key)) + "'"});
  }
}

ExperimentConfig parse_config_text(std::string_view text, ExperimentConfig base,
                                   std::vector<ConfigOverride> *applied)
{
  struct Line
  {
    std::size_t number;
    std::string key;
    std::string value;
  };
  std::vector<Line>        lines;
  std::vector<std::string> problems;

  std::size_t number = 0;
  std::size_t pos    = 0;
  while (pos <= text.size())
  {
    auto const       end  = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos                   = end + 1;
    ++number;
    if (auto const hash = line.find('#'); hash != std::string_view::npos)
    {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty())
    {
      if (end == text.size())
      {
        break;
      }
      continue;
    }
    auto const eq = line.find('=');
    if (eq == std::string_view::npos)
    {
      problems.push_back("line " + std::to_string(number) + ": expected 'key = value'");
      continue;
    }
    lines.push_back({number, std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1)))});
    if (end == text.size())
    {
      break;
    }
  }

  // A preset line picks the base regardless of where it appears.
  for (auto const &l : lines)
  {
    if (normalize_key(l.key) == "preset")
    {
      try
      {
        base = preset(l.value);
      }
      catch (ConfigError const &e)
      {
        problems.push_back("line " + std::to_string(l.number) + ": " + e.problems().front());
      }
    }
  }
  for (auto const &l : lines)
  {
    if (normalize_key(l.key) == "preset")
    {
      continue;
    }
    try
    {
      apply_setting(base, l.key, l.value);
      if (applied != nullptr)
      {
        applied->push_back({normalize_key(l.key), l.value});
      }
    }
    catch (ConfigError const &e)
    {
      for (auto const &p : e.problems())
      {
        problems.push_back("line " + std::to_string(l.number) + ": " + p);
      }
    }
  }
  for (auto const &v : base.violations())
  {
    problems.push_back(v);
  }
  if (!problems.empty())
  {
    throw ConfigError(std::move(problems));
  }
  return base;
}

ExperimentConfig load_config_file(std::string const &path, ExperimentConfig base,
                                  std::vector<ConfigOverride> *applied)
{
  std::ifstream in(path);
  if (!in)
  {
    throw ConfigError({"cannot read config file '" + path + "'"});
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), std::move(base), applied);
}

void require_valid(ExperimentConfig const &config)
{
  if (auto v = config.violations(); !v.empty())
  {
    throw ConfigError(std::move(v));
  }
}

std::string to_text(ExperimentConfig const &c)
{
  auto join = [](auto const &items, auto &&fmt) {
    std::string out;
    for (auto const &it : items)
    {
      if (!out.empty())
      {
        out += ", ";
      }
      out += fmt(it);
    }
    return out;
  };

  std::ostringstream os;
  os << "name = " << c.name << '\n'
     << "batch size = " << c.batch_size << '\n'
     << "evaluation interval = " << c.evaluation_interval << '\n'
     << "epochs = " << c.epochs << '\n'
     << "historical data = " << c.history << '\n'
     << "future steps = " << c.horizon << '\n'
     << "features = " << join(c.features, [](std::string const &s) { return s; }) << '\n'
     << "lstm units = " << join(c.units, [](std::size_t u) { return std::to_string(u); }) << '\n'
     << "lstm activations = "
     << join(c.activations, [](Activation a) { return std::string(activation_name(a)); }) << '\n'
     << "l2 kernel = " << fmt_real(c.l2.kernel) << '\n'
     << "l2 recurrent = " << fmt_real(c.l2.recurrent) << '\n'
     << "l2 bias = " << fmt_real(c.l2.bias) << '\n'
     << "learning rate = " << fmt_real(c.learning_rate) << '\n'
     << "clip norm = " << fmt_real(c.clip_norm) << '\n'
     << "train fraction = " << fmt_real(c.train_fraction) << '\n'
     << "seed = " << c.seed << '\n'
     << "eval stride = " << c.eval_stride << '\n';
  return os.str();
}

std::string config_hash(ExperimentConfig const &config) { return sha256_hex(to_text(config)); }

void apply_desk_scale(ExperimentConfig &c)
{
  c.batch_size          = std::max<std::size_t>(1, c.batch_size / 8);
  c.evaluation_interval = std::max<std::size_t>(1, c.evaluation_interval / 2);
  c.eval_stride         = 8;
}

}  // namespace tempora
