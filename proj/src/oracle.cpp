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

#include "tempora/oracle.hpp"

#include "tempora/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace tempora::oracle {

namespace {

double scalar_sigmoid(double z)
{
  return 1.0 / (1.0 + std::exp(-z));
}

double scalar_act(Activation a, double z)
{
  switch (a)
  {
  case Activation::Tanh:
    return std::tanh(z);
  case Activation::Sigmoid:
    return scalar_sigmoid(z);
  case Activation::ReLU:
    return std::max(z, 0.0);
  case Activation::Linear:
    return z;
  case Activation::Step:
    return z < 0.0 ? 0.0 : 1.0;
  case Activation::Softmax:
    return 1.0;  // single-unit softmax
  }
  return z;
}

double projected_loss(Matrix const &out, Matrix const &projection)
{
  double acc = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i)
  {
    double const y = out.data()[i];
    acc += y * projection.data()[i] + 0.5 * y * y;
  }
  return acc;
}

std::vector<Matrix> snapshot(SequentialModel const &model)
{
  std::vector<Matrix> out;
  for (auto const &p : model.parameters())
  {
    out.push_back(*p.value);
  }
  return out;
}

void assign(SequentialModel &model, std::vector<Matrix> const &values)
{
  auto refs = model.parameters();
  for (std::size_t i = 0; i < refs.size(); ++i)
  {
    *refs[i].value = values[i];
  }
}

void randomise(SequentialModel &model, Rng &rng, double scale)
{
  for (auto &p : model.parameters())
  {
    for (auto &v : p.value->data())
    {
      v = rng.uniform(-scale, scale);
    }
  }
}

SequenceBatch random_batch(std::size_t batch, std::size_t time, std::size_t features, Rng &rng)
{
  SequenceBatch x(batch, time, features);
  for (std::size_t b = 0; b < batch; ++b)
  {
    for (std::size_t t = 0; t < time; ++t)
    {
      for (std::size_t f = 0; f < features; ++f)
      {
        x.at(b, t, f) = rng.uniform(-1.0, 1.0);
      }
    }
  }
  return x;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng &rng)
{
  Matrix m(rows, cols);
  for (auto &v : m.data())
  {
    v = rng.uniform(-1.0, 1.0);
  }
  return m;
}

Activation pick(Rng &rng, std::initializer_list<Activation> options)
{
  auto it = options.begin();
  std::advance(it, static_cast<std::ptrdiff_t>(rng.index(options.size())));
  return *it;
}

bool ends_with(std::string_view s, std::string_view suffix)
{
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::vector<Matrix> finite_diff_gradient(LossFn const &loss, std::vector<Matrix> params, double eps)
{
  if (!(eps > 0.0))
  {
    throw std::invalid_argument("finite_diff_gradient: eps must be positive");
  }
  std::vector<Matrix> grads;
  grads.reserve(params.size());
  for (auto const &p : params)
  {
    grads.emplace_back(p.rows(), p.cols());
  }
  for (std::size_t k = 0; k < params.size(); ++k)
  {
    auto values = params[k].data();
    for (std::size_t i = 0; i < values.size(); ++i)
    {
      double const orig = values[i];
      values[i]         = orig + eps;
      double const up   = loss(params);
      values[i]         = orig - eps;
      double const down = loss(params);
      values[i]         = orig;
      if (!std::isfinite(up) || !std::isfinite(down))
      {
        throw NonFiniteError("finite_diff_gradient: non-finite loss");
      }
      grads[k].data()[i] = (up - down) / (2.0 * eps);
    }
  }
  return grads;
}

double relative_error(double a, double b) noexcept
{
  double const denom = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / denom;
}

bool GradCheckReport::passed() const noexcept
{
  return std::all_of(parameters.begin(), parameters.end(),
                     [](ParameterCheck const &p) { return p.passed; });
}

GradientSet bptt_gradient(SequentialModel const &model, SequenceBatch const &x,
                          Matrix const &projection)
{
  ForwardCache cache;
  Matrix       out = forward_sequence(model, x, cache);
  Matrix       d   = projection + out;
  return backward_sequence(model, cache, d);
}

GradCheckReport check_model_gradients(std::string label, SequentialModel const &model,
                                      SequenceBatch const &x, Matrix const &projection,
                                      AnalyticGradientFn const &analytic,
                                      GradCheckTolerance const &tol)
{
  SequentialModel scratch = model;
  LossFn const    loss    = [&](std::vector<Matrix> const &values) {
    assign(scratch, values);
    return projected_loss(forward_sequence(scratch, x), projection);
  };
  auto const numeric = finite_diff_gradient(loss, snapshot(model), tol.eps);
  auto const exact   = analytic(model, x, projection);

  GradCheckReport report{std::move(label), {}};
  for (std::size_t k = 0; k < numeric.size(); ++k)
  {
    ParameterCheck pc;
    pc.name          = exact.names.at(k);
    auto const &a    = exact.grads.at(k);
    auto const &n    = numeric[k];
    double      worst = -1.0;
    for (std::size_t r = 0; r < n.rows(); ++r)
    {
      for (std::size_t c = 0; c < n.cols(); ++c)
      {
        double const abs_err = std::abs(a(r, c) - n(r, c));
        double const rel_err = relative_error(a(r, c), n(r, c));
        pc.max_abs_error     = std::max(pc.max_abs_error, abs_err);
        pc.max_rel_error     = std::max(pc.max_rel_error, rel_err);
        bool const ok        = rel_err <= tol.rel || abs_err <= tol.abs_floor;
        pc.passed            = pc.passed && ok;
        // rank coordinates by how far they are from passing
        double const badness = std::min(rel_err / tol.rel, abs_err / tol.abs_floor);
        if (badness > worst)
        {
          worst                = badness;
          pc.worst_row         = r;
          pc.worst_col         = c;
          pc.analytic_at_worst = a(r, c);
          pc.numeric_at_worst  = n(r, c);
        }
      }
    }
    report.parameters.push_back(std::move(pc));
  }
  return report;
}

ScalarLstmTrace scalar_lstm_oracle(ScalarLstm const &w, std::vector<double> const &inputs)
{
  ScalarLstmTrace trace;
  double          h = 0.0;
  double          c = 0.0;
  for (double x : inputs)
  {
    double const f = scalar_sigmoid(w.wx_f * x + w.wh_f * h + w.b_f);
    double const i = scalar_sigmoid(w.wx_i * x + w.wh_i * h + w.b_i);
    double const o = scalar_sigmoid(w.wx_o * x + w.wh_o * h + w.b_o);
    double const g = scalar_act(w.cell, w.wx_g * x + w.wh_g * h + w.b_g);
    c              = f * c + i * g;
    h              = o * scalar_act(w.cell, c);
    trace.h.push_back(h);
    trace.c.push_back(c);
  }
  return trace;
}

std::vector<double> scalar_rnn_oracle(ScalarRnn const &w, std::vector<double> const &inputs)
{
  std::vector<double> out;
  double              y = 0.0;
  for (double x : inputs)
  {
    y = scalar_act(w.activation, w.wx * x + w.wy * y + w.b);
    out.push_back(y);
  }
  return out;
}

LstmLayer to_layer(ScalarLstm const &w, bool return_sequences)
{
  LstmLayer layer;
  layer.cell_activation  = w.cell;
  layer.return_sequences = return_sequences;
  layer.gate(Gate::Main)   = {Matrix{{w.wx_g}}, Matrix{{w.wh_g}}, Matrix{{w.b_g}}};
  layer.gate(Gate::Forget) = {Matrix{{w.wx_f}}, Matrix{{w.wh_f}}, Matrix{{w.b_f}}};
  layer.gate(Gate::Input)  = {Matrix{{w.wx_i}}, Matrix{{w.wh_i}}, Matrix{{w.b_i}}};
  layer.gate(Gate::Output) = {Matrix{{w.wx_o}}, Matrix{{w.wh_o}}, Matrix{{w.b_o}}};
  return layer;
}

EquivalenceResult lstm_oracle_equivalence(std::size_t configs, std::uint64_t seed,
                                          double tolerance)
{
  EquivalenceResult result;
  Rng               rng(seed);
  for (std::size_t n = 0; n < configs; ++n)
  {
    ScalarLstm w;
    for (double *p : {&w.wx_g, &w.wh_g, &w.b_g, &w.wx_f, &w.wh_f, &w.b_f, &w.wx_i, &w.wh_i,
                      &w.b_i, &w.wx_o, &w.wh_o, &w.b_o})
    {
      *p = rng.uniform(-2.0, 2.0);
    }
    w.cell = n % 2 == 0 ? Activation::Tanh : Activation::ReLU;
    std::size_t const   steps = 1 + rng.index(4);
    std::vector<double> xs;
    for (std::size_t t = 0; t < steps; ++t)
    {
      xs.push_back(rng.uniform(-2.0, 2.0));
    }
    auto const expected = scalar_lstm_oracle(w, xs);

    // single steps through lstm_step
    auto const    layer = to_layer(w);
    LstmCellState state = LstmCellState::zeros(1, 1);
    for (std::size_t t = 0; t < steps; ++t)
    {
      auto const r = lstm_step(layer, Matrix{{xs[t]}}, state);
      state        = r.state;
      result.max_abs_diff =
        std::max({result.max_abs_diff, std::abs(r.output(0, 0) - expected.h[t]),
                  std::abs(state.c(0, 0) - expected.c[t])});
    }

    // unrolled through forward_sequence with an identity head
    SequentialModel model;
    model.add(layer);
    model.add(DenseLayer{Matrix{{1.0}}, Matrix{{0.0}}, Activation::Linear});
    SequenceBatch x(1, steps, 1, xs);
    double const  out = forward_sequence(model, x)(0, 0);
    result.max_abs_diff = std::max(result.max_abs_diff, std::abs(out - expected.h.back()));
    ++result.configs;
  }
  result.passed = result.max_abs_diff <= tolerance;
  return result;
}

bool SuiteResult::passed() const noexcept
{
  return equivalence.passed &&
         std::all_of(gradient_reports.begin(), gradient_reports.end(),
                     [](GradCheckReport const &r) { return r.passed(); });
}

SuiteResult run_suite(std::size_t seeds, std::string_view fault)
{
  AnalyticGradientFn analytic = [fault](SequentialModel const &m, SequenceBatch const &x,
                                        Matrix const &proj) {
    auto g = bptt_gradient(m, x, proj);
    if (!fault.empty())
    {
      for (std::size_t k = 0; k < g.size(); ++k)
      {
        if (ends_with(g.names[k], fault))
        {
          for (auto &v : g.grads[k].data())
          {
            v = v * 1.01 + 1e-3;
          }
        }
      }
    }
    return g;
  };

  SuiteResult result;
  for (std::size_t s = 0; s < seeds; ++s)
  {
    Rng               rng(derive_seed(0x5eed, s));
    std::size_t const batch    = 1 + rng.index(2);
    std::size_t const steps    = 1 + rng.index(3);
    std::size_t const features = 1 + rng.index(3);
    auto const        x        = random_batch(batch, steps, features, rng);

    // Dense stack reading the last timestep
    {
      std::size_t const hidden = 1 + rng.index(4);
      std::size_t const out    = 1 + rng.index(3);
      SequentialModel   model;
      model.add(DenseLayer::random_init(features, hidden,
                                   pick(rng, {Activation::Tanh, Activation::Sigmoid,
                                              Activation::ReLU, Activation::Linear}),
                                   rng));
      model.add(DenseLayer::random_init(hidden, out,
                                   pick(rng, {Activation::Linear, Activation::Softmax,
                                              Activation::Tanh}),
                                   rng));
      randomise(model, rng, 0.9);
      result.gradient_reports.push_back(check_model_gradients(
        "dense/seed" + std::to_string(s), model, x, random_matrix(batch, out, rng), analytic));
    }

    for (auto cell : {StackSpec::Cell::SimpleRnn, StackSpec::Cell::Lstm})
    {
      StackSpec spec;
      spec.input_width = features;
      spec.cell        = cell;
      spec.units       = {1 + rng.index(4), 1 + rng.index(4)};
      spec.activations = {
        pick(rng, {Activation::Tanh, Activation::Sigmoid, Activation::ReLU, Activation::Linear}),
        pick(rng, {Activation::Tanh, Activation::ReLU, Activation::Linear})};
      spec.n_output = 1 + rng.index(3);
      auto model    = build_stack(spec, rng);
      randomise(model, rng, 0.9);
      std::string const kind = cell == StackSpec::Cell::Lstm ? "lstm" : "rnn";
      result.gradient_reports.push_back(
        check_model_gradients(kind + "/seed" + std::to_string(s), model, x,
                              random_matrix(batch, spec.n_output, rng), analytic));
    }
  }
  result.equivalence = lstm_oracle_equivalence(100, 0x0c1e, 1e-12);
  return result;
}

std::string format_report(SuiteResult const &result)
{
  std::ostringstream os;
  char               line[256];
  std::snprintf(line, sizeof line, "%-16s %-22s %12s %12s %10s %s\n", "config", "parameter",
                "max_rel", "max_abs", "worst", "status");
  os << line;
  for (auto const &r : result.gradient_reports)
  {
    for (auto const &p : r.parameters)
    {
      std::snprintf(line, sizeof line, "%-16s %-22s %12.3e %12.3e %5zu,%-4zu %s\n",
                    r.label.c_str(), p.name.c_str(), p.max_rel_error, p.max_abs_error,
                    p.worst_row, p.worst_col, p.passed ? "ok" : "FAIL");
      os << line;
    }
  }
  std::snprintf(line, sizeof line, "scalar-oracle equivalence: %zu configs, max |diff| %.3e %s\n",
                result.equivalence.configs, result.equivalence.max_abs_diff,
                result.equivalence.passed ? "ok" : "FAIL");
  os << line;
  std::size_t failed = 0;
  for (auto const &r : result.gradient_reports)
  {
    for (auto const &p : r.parameters)
    {
      failed += p.passed ? 0 : 1;
    }
  }
  os << "gradient checks: " << result.gradient_reports.size() << " configs, " << failed
     << " failing parameters\n";
  return os.str();
}

}  // namespace tempora::oracle
