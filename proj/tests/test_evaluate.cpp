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

#include "tempora/evaluate.hpp"
#include "tempora/plot.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <filesystem>
#include <fstream>
#include <numbers>

using namespace tempora;
using tempora::testing::random_matrix;

namespace {

SequentialModel zero_head_model(std::size_t features, std::size_t K, std::uint64_t seed)
{
  Rng  rng(seed);
  auto m    = build_stack({features, StackSpec::Cell::Lstm, {4, 3}, {Activation::Tanh, Activation::ReLU}, K}, rng);
  auto &head = std::get<DenseLayer>(m.layers().back());
  head.w.fill(0.0);
  head.b.fill(0.0);
  return m;
}

std::vector<std::string> read_lines(std::string const &path)
{
  std::ifstream            in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);)
  {
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

TEST_CASE("metric examples")
{
  std::vector<double> const p{1, 3}, a{0, 0};
  CHECK(rmse(p, a) == std::sqrt(5.0));
  CHECK(mae(p, a) == 2.0);
  CHECK(max_error(p, a) == 3.0);
  CHECK(rmse(a, a) == 0.0);
  CHECK(mae(a, a) == 0.0);
  CHECK(max_error(a, a) == 0.0);

  std::vector<double> const shifted{2.5, 3.5, 4.5};
  std::vector<double> const base{0.0, 1.0, 2.0};
  CHECK(rmse(shifted, base) == 2.5);
  CHECK(mae(shifted, base) == 2.5);
  CHECK(max_error(shifted, base) == 2.5);
  CHECK(max_error_index(shifted, base) == 0);  // ties go to the earliest index

  CHECK_THROWS_AS(rmse(p, std::vector<double>{1.0}), ShapeError);
  CHECK_THROWS_AS(mae(std::vector<double>{}, std::vector<double>{}), ShapeError);
}

TEST_CASE("metric inequalities, shift invariance and z-score scale equivariance")
{
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial)
  {
    std::size_t const   n = 1 + rng.index(40);
    std::vector<double> p(n), a(n);
    for (std::size_t i = 0; i < n; ++i)
    {
      p[i] = rng.uniform(-3, 3);
      a[i] = rng.uniform(-3, 3);
    }
    double const r = rmse(p, a), m = mae(p, a), e = max_error(p, a);
    CHECK(m >= 0.0);
    CHECK(r >= m - 1e-15);
    CHECK(e >= m - 1e-15);

    double const        shift = rng.uniform(-100, 100);
    double const        sd    = rng.uniform(0.1, 20);
    double const        mean  = rng.uniform(-30, 30);
    std::vector<double> ps(n), as(n), pd(n), ad(n);
    for (std::size_t i = 0; i < n; ++i)
    {
      ps[i] = p[i] + shift;
      as[i] = a[i] + shift;
      pd[i] = p[i] * sd + mean;  // denormalized
      ad[i] = a[i] * sd + mean;
    }
    CHECK(std::abs(rmse(ps, as) - r) <= 1e-9 * std::max(1.0, r));
    CHECK(std::abs(mae(ps, as) - m) <= 1e-9 * std::max(1.0, m));
    CHECK(std::abs(max_error(ps, as) - e) <= 1e-9 * std::max(1.0, e));
    CHECK(std::abs(rmse(pd, ad) - sd * r) <= 1e-9 * std::max(1.0, sd * r));
    CHECK(std::abs(mae(pd, ad) - sd * m) <= 1e-9 * std::max(1.0, sd * m));
    CHECK(std::abs(max_error(pd, ad) - sd * e) <= 1e-9 * std::max(1.0, sd * e));
  }
}

TEST_CASE("percentile interpolates between order statistics")
{
  CHECK(percentile({3, 1, 2}, 0.5) == 2.0);
  CHECK(percentile({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(percentile({0, 10}, 0.9) == doctest::Approx(9.0));
  CHECK(percentile({5}, 0.9) == 5.0);
  CHECK_THROWS(percentile({}, 0.5));
}

TEST_CASE("a zero head forecasts the training mean temperature")
{
  SyntheticWeatherSpec spec;
  spec.days    = 40;
  auto const f = generate_synthetic(spec);
  auto const s = NormalizationStats::compute(chronological_split(f, 0.78).first);
  std::vector<std::string> feats{"temp", "hum", "airpr", "solrad", "windvel"};
  auto const m = zero_head_model(feats.size(), 12, 3);
  auto const r = forecast(m, f, 400, 48, feats, s);
  REQUIRE(r.predicted.size() == 12);  // twelve-hour horizon
  CHECK(r.history.size() == 48);
  CHECK(r.actual.size() == 12);
  CHECK(r.origin == f.hours()[400]);
  CHECK(r.history.back() == f.column("temp")[400]);
  CHECK(r.actual.front() == f.column("temp")[401]);
  for (double v : r.predicted)
  {
    CHECK(v == doctest::Approx(s.mean[s.index_of("temp")]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(forecast(m, f, 10, 48, feats, s), DataError);
  CHECK_THROWS_AS(forecast(m, f, f.length() - 5, 48, feats, s), DataError);
}

TEST_CASE("predicting the mean of a pure daily sinusoid scores its RMS amplitude")
{
  double const        amplitude = 4.0;
  std::size_t const   L         = 60 * 24;
  std::vector<Hour>   hours(L);
  std::vector<double> temp(L), hum(L);
  for (std::size_t i = 0; i < L; ++i)
  {
    double const phase = 2.0 * std::numbers::pi * static_cast<double>(i) / 24.0 - 2.36;
    hours[i]           = static_cast<Hour>(i);
    temp[i]            = 9.0 + amplitude * std::sin(phase);
    hum[i]             = 75.0 - 8.0 * std::sin(phase);
  }
  SeriesFrame const        f(hours, {"temp", "hum"}, {temp, hum});
  auto const [train, test] = chronological_split(f, 0.78);
  auto const               stats = NormalizationStats::compute(train);
  std::vector<std::string> feats{"temp", "hum"};
  auto const               ds = make_windows(normalize(test, stats), feats, 4, 24);

  auto const   r   = evaluate_model(zero_head_model(2, 24, 5), ds, stats, "mean");
  double const rms = amplitude / std::numbers::sqrt2;
  CHECK(std::abs(r.rmse - rms) / rms < 0.01);
  CHECK(r.horizon == 24);
  CHECK(r.windows == ds.samples());
  CHECK(r.me >= r.mae);
  CHECK(r.rmse >= r.mae);
}

TEST_CASE("evaluation is deterministic and perfect predictions score zero")
{
  SyntheticWeatherSpec spec;
  spec.days    = 30;
  auto const               f  = generate_synthetic(spec);
  auto const               s  = NormalizationStats::compute(f);
  std::vector<std::string> feats{"temp"};
  auto const               ds = make_windows(normalize(f, s), feats, 6, 1);

  // One-step persistence is exactly representable by a linear RNN + identity head:
  // y_t = x_t, output = y_T.
  SequentialModel persist;
  persist.add(SimpleRnnLayer{Matrix{{1.0}}, Matrix{{0.0}}, Matrix{{0.0}}, Activation::Linear, false});
  persist.add(DenseLayer{Matrix{{1.0}}, Matrix{{0.0}}, Activation::Linear});
  auto const a = evaluate_model(persist, ds, s, "persist");
  auto const b = evaluate_model(persist, ds, s, "persist");
  CHECK(a.rmse == b.rmse);
  CHECK(a.me == b.me);
  CHECK(a.rmse > 0.0);

  // A dataset whose target equals the last input gives an exact fit.
  std::vector<Hour>   hours(20);
  std::vector<double> flat(20, 5.0);
  for (std::size_t i = 0; i < 20; ++i)
  {
    hours[i] = static_cast<Hour>(i);
  }
  NormalizationStats unit{{"temp"}, {0.0}, {1.0}};
  auto const         flat_ds = make_windows(SeriesFrame(hours, {"temp"}, {flat}), feats, 3, 1);
  auto const         zero    = evaluate_model(persist, flat_ds, unit, "persist");
  CHECK(zero.rmse == 0.0);
  CHECK(zero.mae == 0.0);
  CHECK(zero.me == 0.0);
}

TEST_CASE("metrics csv rows")
{
  std::filesystem::remove("test_metrics.csv");
  AccuracyReport r{"run3-12hour", 12, 0.24, 0.2, 0.6, 0.22, 0.4, 10};
  append_metrics_csv(r, "test_metrics.csv");
  r.label = "run2-1day";
  append_metrics_csv(r, "test_metrics.csv");
  auto const lines = read_lines("test_metrics.csv");
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "model,K,rmse,mae,me,p50_rmse,p90_rmse");
  CHECK(lines[1] == "run3-12hour,12,0.24,0.2,0.6,0.22,0.4");
  CHECK(lines[2].starts_with("run2-1day,12,"));
}

TEST_CASE("forecast plot is well-formed and its csv round-trips")
{
  ForecastResult r;
  r.origin = parse_timestamp("2017-01-01T00:00");
  Rng rng(8);
  for (int i = 0; i < 48; ++i)
  {
    r.history.push_back(rng.uniform(-5, 15));
  }
  for (int k = 0; k < 12; ++k)
  {
    r.predicted.push_back(rng.uniform(-5, 15));
    r.actual.push_back(rng.uniform(-5, 15));
  }
  emit_forecast_plot(r, "test_forecast.svg", "forecast <&> test");

  boost::property_tree::ptree tree;
  CHECK_NOTHROW(boost::property_tree::read_xml("test_forecast.svg", tree));
  CHECK(tree.get_child_optional("svg").has_value());

  auto const lines = read_lines("test_forecast.csv");
  REQUIRE(lines.size() == 1 + 48 + 12);
  CHECK(lines[0] == "offset,timestamp,history,predicted,actual");
  CHECK(lines[48].starts_with("0,2017-01-01T00:00,"));
  for (std::size_t i = 0; i < 48; ++i)
  {
    auto const &l     = lines[1 + i];
    auto const  comma = l.find(',', l.find(',') + 1);
    CHECK(std::strtod(l.c_str() + comma + 1, nullptr) == r.history[i]);
  }
  for (std::size_t k = 0; k < 12; ++k)
  {
    auto const &l    = lines[49 + k];
    auto const  last = l.rfind(',');
    auto const  prev = l.rfind(',', last - 1);
    CHECK(std::strtod(l.c_str() + prev + 1, nullptr) == r.predicted[k]);
    CHECK(std::strtod(l.c_str() + last + 1, nullptr) == r.actual[k]);
  }
}

TEST_CASE("loss plot is well-formed")
{
  LossHistory h{{0.5, 0.3, 0.2}, {0.6, 0.4, 0.35}};
  emit_loss_plot(h, "test_loss.svg", "MSE loss");
  boost::property_tree::ptree tree;
  CHECK_NOTHROW(boost::property_tree::read_xml("test_loss.svg", tree));
}
