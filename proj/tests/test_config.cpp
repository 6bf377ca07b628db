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

#include "test_util.hpp"

#include "tempora/checkpoint.hpp"
#include "tempora/config.hpp"
#include "tempora/hash.hpp"

#include <fstream>

using namespace tempora;

TEST_CASE("seven-day preset")
{
  auto const c = preset("run1-7day");
  CHECK(c.batch_size == 256);
  CHECK(c.evaluation_interval == 200);
  CHECK(c.epochs == 10);
  CHECK(c.history == 168);
  CHECK(c.horizon == 168);
  CHECK(c.n_output() == 168);
  CHECK(c.features.size() == 6);
  CHECK_FALSE(c.l2.any());
  CHECK(c.units == std::vector<std::size_t>{32, 16});
  CHECK(c.activations == std::vector<Activation>{Activation::Tanh, Activation::ReLU});
}

TEST_CASE("one-day preset drops wind direction")
{
  auto const c = preset("run2-1day");
  CHECK(c.batch_size == 512);
  CHECK(c.evaluation_interval == 100);
  CHECK(c.epochs == 20);
  CHECK(c.history == 168);
  CHECK(c.horizon == 24);
  CHECK(c.features == std::vector<std::string>{"temp", "hum", "airpr", "solrad", "windvel"});
  CHECK_FALSE(c.l2.any());
}

TEST_CASE("twelve-hour preset is regularized")
{
  auto const c = preset("run3-12hour");
  CHECK(c.batch_size == 512);
  CHECK(c.evaluation_interval == 150);
  CHECK(c.epochs == 30);
  CHECK(c.history == 48);
  CHECK(c.horizon == 12);
  CHECK(c.features.size() == 5);
  CHECK(c.l2.kernel == 0.005);
  CHECK(c.l2.recurrent == 0.005);
  CHECK(c.l2.bias == 0.005);
  CHECK_THROWS_AS(preset("run4"), ConfigError);
}

TEST_CASE("config text uses the table keys verbatim")
{
  auto const c = parse_config_text("# a comment\n"
                                   "batch size = 64\n"
                                   "evaluation interval = 7\n"
                                   "epochs = 3   # trailing comment\n"
                                   "historical data = 24\n"
                                   "future steps = 6\n"
                                   "features = temp, hum\n"
                                   "lstm_units = 8, 4\n"
                                   "l2 = 0.01\n",
                                   preset("run1-7day"));
  CHECK(c.batch_size == 64);
  CHECK(c.evaluation_interval == 7);
  CHECK(c.epochs == 3);
  CHECK(c.history == 24);
  CHECK(c.horizon == 6);
  CHECK(c.features == std::vector<std::string>{"temp", "hum"});
  CHECK(c.units == std::vector<std::size_t>{8, 4});
  CHECK(c.l2.recurrent == 0.01);
  CHECK(c.name == "run1-7day");
}

TEST_CASE("a preset line selects the base and overrides are recorded")
{
  std::vector<ConfigOverride> applied;
  auto const c = parse_config_text("epochs = 2\npreset = run3-12hour\nSeed = 9\n", ExperimentConfig{}, &applied);
  CHECK(c.history == 48);
  CHECK(c.epochs == 2);
  CHECK(c.seed == 9);
  REQUIRE(applied.size() == 2);
  CHECK(applied[0].key == "epochs");
  CHECK(applied[1].key == "seed");
  CHECK(applied[1].value == "9");
}

TEST_CASE("every violated constraint is listed")
{
  try
  {
    parse_config_text("batch size = 0\nfuture steps = -3\nbogus = 1\nfeatures = temp, rain\nno equals here\n",
                      preset("run2-1day"));
    FAIL("expected ConfigError");
  }
  catch (ConfigError const &e)
  {
    auto const &p = e.problems();
    CHECK(p.size() >= 5);
    std::string const all = e.what();
    CHECK(all.find("batch size must be positive") != std::string::npos);
    CHECK(all.find("line 2") != std::string::npos);
    CHECK(all.find("bogus") != std::string::npos);
    CHECK(all.find("rain") != std::string::npos);
    CHECK(all.find("line 5") != std::string::npos);
  }
}

TEST_CASE("canonical text round-trips and hashes are stable")
{
  for (auto const &name : preset_names())
  {
    auto c = preset(name);
    c.learning_rate = 0.1 + 0.2;  // not exactly representable in short form
    auto const back = parse_config_text(to_text(c), ExperimentConfig{});
    CHECK(to_text(back) == to_text(c));
    CHECK(back.learning_rate == c.learning_rate);
    CHECK(config_hash(back) == config_hash(c));
  }
  CHECK(config_hash(preset("run1-7day")) != config_hash(preset("run2-1day")));
  CHECK(config_hash(preset("run1-7day")).size() == 64);
}

TEST_CASE("desk scale keeps the experiment shape")
{
  auto c = preset("run2-1day");
  apply_desk_scale(c);
  CHECK(c.batch_size == 64);
  CHECK(c.evaluation_interval == 50);
  CHECK(c.epochs == 20);
  CHECK(c.history == 168);
  CHECK(c.horizon == 24);
  CHECK(c.eval_stride == 8);
  CHECK(c.violations().empty());
}

TEST_CASE("sha256 known answers")
{
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  std::ofstream("test_hash.txt", std::ios::binary) << "abc";
  CHECK(sha256_file("test_hash.txt") == sha256_hex("abc"));
  CHECK_THROWS_AS(sha256_file("no/such/file"), DataError);
}

TEST_CASE("checkpoint round trip is lossless")
{
  Rng        rng(77);
  Checkpoint ckpt;
  ckpt.config = preset("run3-12hour");
  ckpt.model  = build_stack({5, StackSpec::Cell::Lstm, {32, 16}, {Activation::Tanh, Activation::ReLU}, 12}, rng);
  ckpt.stats  = {{"temp", "hum", "airpr", "solrad", "windvel"},
                 {9.1, 74.2, 1013.0, 120.5, 4.0},
                 {6.3, 5.5, 8.1, 190.2, 1.1}};
  ckpt.data_source = "synthetic:seed=2024";
  for (auto &p : ckpt.model.parameters())
  {
    for (double &v : p.value->data())
    {
      v = rng.normal() / 3.0;  // full-precision values
    }
  }
  save_checkpoint(ckpt, "test_checkpoint.json");
  auto const back = load_checkpoint("test_checkpoint.json");
  CHECK(to_text(back.config) == to_text(ckpt.config));
  CHECK(back.stats == ckpt.stats);
  CHECK(back.data_source == ckpt.data_source);
  auto const a = ckpt.model.parameters();
  auto const b = back.model.parameters();
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k)
  {
    CHECK(a[k].name == b[k].name);
    CHECK(*a[k].value == *b[k].value);
  }
  CHECK(checkpoint_to_json(back) == checkpoint_to_json(ckpt));
  CHECK(sha256_file("test_checkpoint.json") == sha256_hex(checkpoint_to_json(ckpt)));
}

TEST_CASE("corrupt checkpoints are rejected")
{
  CHECK_THROWS_AS(checkpoint_from_json("{"), CheckpointError);
  CHECK_THROWS_AS(checkpoint_from_json(R"({"format":"other","version":1})"), CheckpointError);
  CHECK_THROWS_AS(load_checkpoint("missing.json"), CheckpointError);

  Rng        rng(1);
  Checkpoint ckpt;
  ckpt.config          = preset("run3-12hour");
  ckpt.config.units    = {2};
  ckpt.config.activations = {Activation::Tanh};
  ckpt.model  = build_stack({5, StackSpec::Cell::Lstm, {2}, {Activation::Tanh}, 12}, rng);
  ckpt.stats  = {{"temp"}, {0.0}, {1.0}};
  std::string text = checkpoint_to_json(ckpt);
  CHECK_NOTHROW(checkpoint_from_json(text));
  auto const pos = text.find("\"rows\": 5");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 9, "\"rows\": 4");
  CHECK_THROWS_AS(checkpoint_from_json(text), CheckpointError);
}
