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

#include "tempora/training.hpp"

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tempora {

/// Raised for invalid configuration; carries every violated constraint.
class ConfigError : public std::invalid_argument
{
public:
  explicit ConfigError(std::vector<std::string> problems);
  std::vector<std::string> const &problems() const noexcept { return problems_; }

private:
  std::vector<std::string> problems_;
};

/// Names of the built-in presets: run1-7day, run2-1day, run3-12hour.
std::vector<std::string> preset_names();
ExperimentConfig         preset(std::string_view name);

/// Canonical form of a config key: lower case, '_' and '-' read as spaces.
std::string normalize_key(std::string_view key);

/**
 * Sets one field from its text form. Keys follow the preset tables
 * ("batch size", "evaluation interval", "epochs", "historical data",
 * "future steps") plus "features", "lstm units", "lstm activations",
 * "l2" (all groups), "l2 kernel", "l2 recurrent", "l2 bias",
 * "learning rate", "clip norm", "train fraction", "seed", "eval stride",
 * "name". Throws ConfigError.
 */
void apply_setting(ExperimentConfig &config, std::string_view key, std::string_view value);

struct ConfigOverride
{
  std::string key;
  std::string value;
};

/**
 * Parses `key = value` lines ('#' starts a comment). A `preset = <name>`
 * line selects the base; remaining keys override it. Every violation is
 * collected before throwing. `applied` receives the overrides in order.
 */
ExperimentConfig parse_config_text(std::string_view text, ExperimentConfig base,
                                   std::vector<ConfigOverride> *applied = nullptr);
ExperimentConfig load_config_file(std::string const &path, ExperimentConfig base,
                                  std::vector<ConfigOverride> *applied = nullptr);

/// Throws ConfigError unless config.violations() is empty.
void require_valid(ExperimentConfig const &config);

/// Canonical `key = value` text; parse_config_text(to_text(c)) reproduces c.
std::string to_text(ExperimentConfig const &config);
/// SHA-256 of to_text.
std::string config_hash(ExperimentConfig const &config);

/**
 * Desk-scale profile: the same architecture, horizons and epochs with a
 * reduced per-epoch budget (batch size / 8, evaluation interval / 2) and
 * per-epoch loss passes over every 8th window. Used with a 2-year
 * synthetic dataset to keep the three presets within minutes on one core.
 */
void apply_desk_scale(ExperimentConfig &config);

}  // namespace tempora
