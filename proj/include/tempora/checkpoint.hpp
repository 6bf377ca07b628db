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
#include "tempora/training.hpp"

#include <string>

namespace tempora {

/// Raised for unreadable, malformed or incompatible checkpoints.
class CheckpointError : public DataError
{
public:
  using DataError::DataError;
};

/**
 * A trained model with everything needed to use it on raw data: the
 * resolved config, the training-split normalization stats and a
 * description of the data it was trained on.
 */
struct Checkpoint
{
  static constexpr int kVersion = 1;

  ExperimentConfig   config;
  NormalizationStats stats;
  SequentialModel    model;
  std::string        data_source;
};

/**
 * JSON document: format tag, version, config text and hash, features,
 * stats, layer list with shapes, and flat parameter arrays. Doubles are
 * written with round-trip precision, so load(save(c)) reproduces c exactly.
 */
std::string checkpoint_to_json(Checkpoint const &ckpt);
Checkpoint  checkpoint_from_json(std::string const &text);

void       save_checkpoint(Checkpoint const &ckpt, std::string const &path);
Checkpoint load_checkpoint(std::string const &path);

}  // namespace tempora
