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

#include "tempora/checkpoint.hpp"

#include "tempora/config.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <type_traits>

namespace tempora {

namespace {

using nlohmann::json;

constexpr char const *kFormat = "tempora-checkpoint";

json layer_json(Layer const &layer)
{
  return std::visit(
      [](auto const &l) -> json {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, DenseLayer>)
        {
          return {{"type", "dense"},
                  {"inputs", l.inputs()},
                  {"units", l.outputs()},
                  {"activation", activation_name(l.activation)}};
        }
        else if constexpr (std::is_same_v<T, SimpleRnnLayer>)
        {
          return {{"type", "rnn"},
                  {"inputs", l.inputs()},
                  {"units", l.units()},
                  {"activation", activation_name(l.activation)},
                  {"return_sequences", l.return_sequences}};
        }
        else
        {
          return {{"type", "lstm"},
                  {"inputs", l.inputs()},
                  {"units", l.units()},
                  {"activation", activation_name(l.cell_activation)},
                  {"return_sequences", l.return_sequences}};
        }
      },
      layer);
}

Layer layer_from_json(json const &j)
{
  auto const type  = j.at("type").get<std::string>();
  auto const in    = j.at("inputs").get<std::size_t>();
  auto const units = j.at("units").get<std::size_t>();
  auto const act   = parse_activation(j.at("activation").get<std::string>());
  if (type == "dense")
  {
    return DenseLayer{Matrix(in, units), Matrix(1, units), act};
  }
  bool const seq = j.at("return_sequences").get<bool>();
  if (type == "rnn")
  {
    return SimpleRnnLayer{Matrix(in, units), Matrix(units, units), Matrix(1, units), act, seq};
  }
  if (type == "lstm")
  {
    LstmLayer l;
    for (auto &g : l.gates)
    {
      g = {Matrix(in, units), Matrix(units, units), Matrix(1, units)};
    }
    l.cell_activation  = act;
    l.return_sequences = seq;
    return l;
  }
  throw CheckpointError("unknown layer type '" + type + "'");
}

}  // namespace

std::string checkpoint_to_json(Checkpoint const &ckpt)
{
  json doc;
  doc["format"]      = kFormat;
  doc["version"]     = Checkpoint::kVersion;
  doc["config"]      = to_text(ckpt.config);
  doc["config_hash"] = config_hash(ckpt.config);
  doc["features"]    = ckpt.config.features;
  doc["data_source"] = ckpt.data_source;
  doc["stats"]       = {{"names", ckpt.stats.names},
                        {"mean", ckpt.stats.mean},
                        {"std", ckpt.stats.stddev}};

  json layers = json::array();
  for (auto const &l : ckpt.model.layers())
  {
    layers.push_back(layer_json(l));
  }
  doc["layers"] = std::move(layers);

  json params = json::array();
  for (auto const &p : ckpt.model.parameters())
  {
    auto const data = p.value->data();
    params.push_back({{"name", p.name},
                      {"rows", p.value->rows()},
                      {"cols", p.value->cols()},
                      {"data", std::vector<double>(data.begin(), data.end())}});
  }
  doc["parameters"] = std::move(params);
  return doc.dump(1) + "\n";
}

Checkpoint checkpoint_from_json(std::string const &text)
{
  try
  {
    json const doc = json::parse(text);
    if (doc.at("format").get<std::string>() != kFormat)
    {
      throw CheckpointError("not a tempora checkpoint");
    }
    if (auto const v = doc.at("version").get<int>(); v != Checkpoint::kVersion)
    {
      throw CheckpointError("unsupported checkpoint version " + std::to_string(v));
    }

    Checkpoint ckpt;
    ckpt.config = parse_config_text(doc.at("config").get<std::string>(), ExperimentConfig{});
    if (config_hash(ckpt.config) != doc.at("config_hash").get<std::string>())
    {
      throw CheckpointError("config hash mismatch");
    }
    ckpt.data_source  = doc.at("data_source").get<std::string>();
    ckpt.stats.names  = doc.at("stats").at("names").get<std::vector<std::string>>();
    ckpt.stats.mean   = doc.at("stats").at("mean").get<std::vector<double>>();
    ckpt.stats.stddev = doc.at("stats").at("std").get<std::vector<double>>();
    if (ckpt.stats.mean.size() != ckpt.stats.names.size() ||
        ckpt.stats.stddev.size() != ckpt.stats.names.size())
    {
      throw CheckpointError("stats arrays have inconsistent lengths");
    }

    for (auto const &l : doc.at("layers"))
    {
      ckpt.model.add(layer_from_json(l));
    }
    ckpt.model.validate();

    auto        refs   = ckpt.model.parameters();
    auto const &stored = doc.at("parameters");
    if (stored.size() != refs.size())
    {
      throw CheckpointError("expected " + std::to_string(refs.size()) + " parameter arrays, found " +
                            std::to_string(stored.size()));
    }
    for (std::size_t k = 0; k < refs.size(); ++k)
    {
      auto const &p    = stored[k];
      auto const  name = p.at("name").get<std::string>();
      auto const  rows = p.at("rows").get<std::size_t>();
      auto const  cols = p.at("cols").get<std::size_t>();
      if (name != refs[k].name || rows != refs[k].value->rows() || cols != refs[k].value->cols())
      {
        throw CheckpointError("parameter " + std::to_string(k) + " is " + name + " " +
                              std::to_string(rows) + "x" + std::to_string(cols) + ", expected " +
                              refs[k].name + " " + refs[k].value->shape_string());
      }
      *refs[k].value = Matrix(rows, cols, p.at("data").get<std::vector<double>>());
    }
    if (ckpt.model.output_width() != ckpt.config.n_output() ||
        ckpt.model.input_width() != ckpt.config.features.size())
    {
      throw CheckpointError("model shape disagrees with its config");
    }
    return ckpt;
  }
  catch (CheckpointError const &)
  {
    throw;
  }
  catch (std::exception const &e)
  {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(Checkpoint const &ckpt, std::string const &path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw CheckpointError("cannot write checkpoint '" + path + "'");
  }
  out << checkpoint_to_json(ckpt);
  if (!out)
  {
    throw CheckpointError("failed writing checkpoint '" + path + "'");
  }
}

Checkpoint load_checkpoint(std::string const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw CheckpointError("cannot open checkpoint '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_json(buf.str());
}

}  // namespace tempora
