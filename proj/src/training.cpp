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

#include "tempora/training.hpp"

#include "tempora/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <thread>

namespace tempora {

namespace {

constexpr std::size_t kChunk = 64;

// Runs fn(chunk) for every chunk index, spreading chunks over threads.
template <typename Fn>
void for_each_chunk(std::size_t chunks, std::size_t threads, Fn &&fn)
{
  threads = std::max<std::size_t>(1, std::min(threads, chunks));
  if (threads == 1)
  {
    for (std::size_t c = 0; c < chunks; ++c)
    {
      fn(c);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr       failure;
  std::atomic<bool>        failed{false};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w)
  {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < chunks && !failed; c = next++)
      {
        try
        {
          fn(c);
        }
        catch (...)
        {
          if (!failed.exchange(true))
          {
            failure = std::current_exception();
          }
        }
      }
    });
  }
  for (auto &t : pool)
  {
    t.join();
  }
  if (failure)
  {
    std::rethrow_exception(failure);
  }
}

void check_same_shape(char const *op, Matrix const &a, Matrix const &b)
{
  if (!a.same_shape(b))
  {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                     b.shape_string());
  }
}

std::vector<std::size_t> strided(std::size_t n, std::size_t stride)
{
  std::vector<std::size_t> idx;
  for (std::size_t s = 0; s < n; s += std::max<std::size_t>(stride, 1))
  {
    idx.push_back(s);
  }
  return idx;
}

void shuffle(std::vector<std::size_t> &v, Rng &rng)
{
  for (std::size_t i = v.size(); i > 1; --i)
  {
    std::swap(v[i - 1], v[rng.index(i)]);
  }
}

}  // namespace

double L2Coefficients::for_group(ParamGroup g) const noexcept
{
  switch (g)
  {
  case ParamGroup::Kernel:
    return kernel;
  case ParamGroup::Recurrent:
    return recurrent;
  case ParamGroup::Bias:
    return bias;
  }
  return 0.0;
}

std::vector<std::string> ExperimentConfig::violations() const
{
  std::vector<std::string> out;
  if (units.empty())
  {
    out.emplace_back("at least one recurrent layer is required");
  }
  if (units.size() != activations.size())
  {
    out.emplace_back("need one activation per recurrent layer (" + std::to_string(units.size()) +
                     " layers, " + std::to_string(activations.size()) + " activations)");
  }
  if (std::any_of(units.begin(), units.end(), [](std::size_t u) { return u == 0; }))
  {
    out.emplace_back("layer units must be positive");
  }
  if (std::any_of(activations.begin(), activations.end(),
                  [](Activation a) { return a == Activation::Softmax; }))
  {
    out.emplace_back("softmax is not a valid recurrent activation");
  }
  if (features.empty())
  {
    out.emplace_back("at least one feature is required");
  }
  for (auto const &f : features)
  {
    if (std::find(kFeatureNames.begin(), kFeatureNames.end(), f) == kFeatureNames.end())
    {
      out.push_back("unknown feature '" + f + "'");
    }
    if (std::count(features.begin(), features.end(), f) > 1)
    {
      out.push_back("feature '" + f + "' listed twice");
    }
  }
  if (history == 0)
  {
    out.emplace_back("historical data must be positive");
  }
  if (horizon == 0)
  {
    out.emplace_back("future steps must be positive");
  }
  if (batch_size == 0)
  {
    out.emplace_back("batch size must be positive");
  }
  if (epochs == 0)
  {
    out.emplace_back("epochs must be positive");
  }
  if (evaluation_interval == 0)
  {
    out.emplace_back("evaluation interval must be positive");
  }
  if (l2.kernel < 0.0 || l2.recurrent < 0.0 || l2.bias < 0.0 || !std::isfinite(l2.kernel) ||
      !std::isfinite(l2.recurrent) || !std::isfinite(l2.bias))
  {
    out.emplace_back("l2 coefficients must be finite and >= 0");
  }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
  {
    out.emplace_back("learning rate must be finite and >= 0");
  }
  if (!std::isfinite(clip_norm))
  {
    out.emplace_back("clip norm must be finite");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
  {
    out.emplace_back("train fraction must lie in (0, 1)");
  }
  if (eval_stride == 0)
  {
    out.emplace_back("eval stride must be positive");
  }
  return out;
}

DivergenceError::DivergenceError(std::size_t epoch, std::string const &detail)
  : std::runtime_error("training diverged in epoch " + std::to_string(epoch) + ": " + detail)
  , epoch_{epoch}
{}

double mse(Matrix const &pred, Matrix const &target)
{
  check_same_shape("mse", pred, target);
  if (pred.empty())
  {
    throw ShapeError("mse: empty operands");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
  {
    double const d = pred.data()[i] - target.data()[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pred.size());
}

Matrix mse_gradient(Matrix const &pred, Matrix const &target)
{
  check_same_shape("mse_gradient", pred, target);
  Matrix       g     = pred - target;
  double const scale = 2.0 / static_cast<double>(pred.size());
  g *= scale;
  return g;
}

double l2_penalty(SequentialModel const &model, L2Coefficients const &coeffs)
{
  double total = 0.0;
  for (auto const &p : model.parameters())
  {
    if (p.layer != 0)
    {
      continue;
    }
    double const lambda = coeffs.for_group(p.group);
    if (lambda > 0.0)
    {
      total += lambda * sum_squares(*p.value);
    }
  }
  return total;
}

void add_l2_gradient(SequentialModel const &model, L2Coefficients const &coeffs, GradientSet &grads)
{
  auto const params = model.parameters();
  if (params.size() != grads.size())
  {
    throw ShapeError("add_l2_gradient: gradient set does not match model");
  }
  for (std::size_t k = 0; k < params.size(); ++k)
  {
    if (params[k].layer != 0)
    {
      continue;
    }
    double const lambda = coeffs.for_group(params[k].group);
    if (lambda <= 0.0)
    {
      continue;
    }
    auto const w = params[k].value->data();
    auto       g = grads.grads[k].data();
    for (std::size_t i = 0; i < w.size(); ++i)
    {
      g[i] += 2.0 * lambda * w[i];
    }
  }
}

double clip_global_norm(GradientSet &grads, double max_norm)
{
  double const norm = std::sqrt(grads.squared_norm());
  if (max_norm > 0.0 && norm > max_norm)
  {
    grads.scale(max_norm / norm);
  }
  return norm;
}

AdamState AdamState::for_parameters(std::span<ConstParameterRef const> params)
{
  AdamState s;
  for (auto const &p : params)
  {
    s.m.emplace_back(p.value->rows(), p.value->cols());
    s.v.emplace_back(p.value->rows(), p.value->cols());
  }
  return s;
}

AdamState AdamState::for_model(SequentialModel const &model)
{
  auto const params = model.parameters();
  return for_parameters(params);
}

void adam_step(std::span<ParameterRef const> params, GradientSet const &grads, AdamState &state,
               double learning_rate)
{
  if (params.size() != grads.size() || params.size() != state.m.size() ||
      params.size() != state.v.size())
  {
    throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameters, " +
                     std::to_string(grads.size()) + " gradients, " +
                     std::to_string(state.m.size()) + " moment slots");
  }
  for (std::size_t k = 0; k < params.size(); ++k)
  {
    if (!params[k].value->same_shape(grads.grads[k]) || !params[k].value->same_shape(state.m[k]))
    {
      throw ShapeError("adam_step: gradient for '" + params[k].name + "' has shape " +
                       grads.grads[k].shape_string() + ", parameter is " +
                       params[k].value->shape_string());
    }
  }
  state.t += 1;
  double const b1   = state.beta1;
  double const b2   = state.beta2;
  double const c1   = 1.0 - std::pow(b1, static_cast<double>(state.t));
  double const c2   = 1.0 - std::pow(b2, static_cast<double>(state.t));
  for (std::size_t k = 0; k < params.size(); ++k)
  {
    auto       p = params[k].value->data();
    auto const g = grads.grads[k].data();
    auto       m = state.m[k].data();
    auto       v = state.v[k].data();
    for (std::size_t i = 0; i < p.size(); ++i)
    {
      m[i]             = b1 * m[i] + (1.0 - b1) * g[i];
      v[i]             = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      double const mh  = m[i] / c1;
      double const vh  = v[i] / c2;
      p[i] -= learning_rate * mh / (std::sqrt(vh) + state.eps);
    }
  }
}

void LossHistory::save_csv(std::string const &path) const
{
  std::ofstream out(path);
  if (!out)
  {
    throw DataError("cannot write '" + path + "'");
  }
  out << "epoch,train_mse,val_mse\n";
  char buf[96];
  for (std::size_t e = 0; e < train.size(); ++e)
  {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", e + 1, train[e], val[e]);
    out << buf;
  }
}

Diagnosis detect_overfitting(LossHistory const &history, OverfitCriteria const &criteria)
{
  std::size_t const n = history.epochs();
  if (n < 2 || history.val.size() != n)
  {
    throw std::invalid_argument("overfitting diagnosis needs at least 2 epochs of train/val loss");
  }
  Diagnosis d;
  d.final_gap = history.val.back() - history.train.back();

  auto const tail = std::max<std::size_t>(
    1, static_cast<std::size_t>(std::ceil(criteria.tail_fraction * static_cast<double>(n))));
  d.persistent_gap = true;
  for (std::size_t e = n - tail; e < n; ++e)
  {
    if (!(history.val[e] > criteria.gap_ratio * history.train[e]))
    {
      d.persistent_gap = false;
      break;
    }
  }

  std::size_t const w = std::min(criteria.trend_epochs, n);
  if (w >= 2)
  {
    std::size_t const first = n - w;
    d.rising_validation     = history.val.back() > history.val[first] &&
                          history.train.back() < history.train[first];
  }

  d.overfitting = d.persistent_gap || d.rising_validation;
  char buf[256];
  if (d.persistent_gap)
  {
    std::snprintf(buf, sizeof buf,
                  "validation loss above %.2fx training loss over the last %zu epochs "
                  "(final %.4f vs %.4f)",
                  criteria.gap_ratio, tail, history.val.back(), history.train.back());
    d.reason = buf;
  }
  else if (d.rising_validation)
  {
    std::snprintf(buf, sizeof buf,
                  "validation loss rising while training loss falls over the last %zu epochs", w);
    d.reason = buf;
  }
  else
  {
    d.reason = "no overfitting detected";
  }
  return d;
}

std::size_t worker_threads()
{
  if (char const *env = std::getenv("TEMPORA_THREADS"))
  {
    char *end = nullptr;
    long  v   = std::strtol(env, &end, 10);
    if (end != env && v > 0)
    {
      return static_cast<std::size_t>(v);
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

BatchGradient batch_gradient(SequentialModel const &model, WindowedDataset const &ds,
                             std::span<std::size_t const> samples, std::size_t threads)
{
  if (samples.empty())
  {
    throw std::invalid_argument("batch_gradient: empty batch");
  }
  std::size_t const chunks = (samples.size() + kChunk - 1) / kChunk;
  double const      total  = static_cast<double>(samples.size() * ds.horizon());
  std::vector<GradientSet> partial(chunks);
  std::vector<double>      sq(chunks, 0.0);

  for_each_chunk(chunks, threads, [&](std::size_t c) {
    auto const   part = samples.subspan(c * kChunk, std::min(kChunk, samples.size() - c * kChunk));
    ForwardCache cache;
    Matrix const pred   = forward_sequence(model, ds.inputs(part), cache);
    Matrix const target = ds.targets(part);
    Matrix       d      = pred - target;
    sq[c]               = sum_squares(d);
    d *= 2.0 / total;
    partial[c] = backward_sequence(model, cache, d);
  });

  BatchGradient out{0.0, std::move(partial[0])};
  double        sum = sq[0];
  for (std::size_t c = 1; c < chunks; ++c)
  {
    out.grads += partial[c];
    sum += sq[c];
  }
  out.loss = sum / total;
  return out;
}

Matrix predict(SequentialModel const &model, WindowedDataset const &ds,
               std::span<std::size_t const> samples, std::size_t threads)
{
  constexpr std::size_t kEvalChunk = 128;
  std::size_t const     chunks     = (samples.size() + kEvalChunk - 1) / kEvalChunk;
  Matrix                out(samples.size(), model.output_width());
  for_each_chunk(chunks, threads, [&](std::size_t c) {
    std::size_t const first = c * kEvalChunk;
    auto const part = samples.subspan(first, std::min(kEvalChunk, samples.size() - first));
    Matrix const pred = forward_sequence(model, ds.inputs(part));
    for (std::size_t r = 0; r < pred.rows(); ++r)
    {
      std::copy(pred.row(r).begin(), pred.row(r).end(), out.row(first + r).begin());
    }
  });
  return out;
}

double dataset_mse(SequentialModel const &model, WindowedDataset const &ds, std::size_t stride,
                   std::size_t threads)
{
  auto const idx = strided(ds.samples(), stride);
  if (idx.empty())
  {
    throw std::invalid_argument("dataset_mse: empty dataset");
  }
  return mse(predict(model, ds, idx, threads), ds.targets(idx));
}

TrainResult train(SequentialModel model, ExperimentConfig const &config,
                  WindowedDataset const &train_ds, WindowedDataset const &val_ds,
                  EpochObserver const &observer)
{
  if (auto const v = config.violations(); !v.empty())
  {
    throw std::invalid_argument("invalid config: " + v.front());
  }
  if (train_ds.samples() == 0 || val_ds.samples() == 0)
  {
    throw std::invalid_argument("train: empty dataset");
  }
  if (model.output_width() != config.n_output() || train_ds.horizon() != config.n_output())
  {
    throw ShapeError("train: model output, dataset horizon and n_output disagree");
  }

  TrainResult       result{std::move(model), {}};
  std::size_t const threads = worker_threads();
  AdamState         adam    = AdamState::for_model(result.model);
  Rng               rng(derive_seed(config.seed, 1));

  std::vector<std::size_t> order(train_ds.samples());
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order, rng);
  std::size_t       cursor = 0;
  std::size_t const batch  = std::min(config.batch_size, order.size());

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch)
  {
    try
    {
      for (std::size_t step = 0; step < config.evaluation_interval; ++step)
      {
        if (cursor + batch > order.size())
        {
          shuffle(order, rng);
          cursor = 0;
        }
        std::span<std::size_t const> idx(order.data() + cursor, batch);
        cursor += batch;

        auto bg = batch_gradient(result.model, train_ds, idx, threads);
        if (!std::isfinite(bg.loss))
        {
          throw DivergenceError(epoch, "non-finite batch loss");
        }
        add_l2_gradient(result.model, config.l2, bg.grads);
        double const norm = clip_global_norm(bg.grads, config.clip_norm);
        if (!std::isfinite(norm))
        {
          throw DivergenceError(epoch, "non-finite gradient norm");
        }
        auto const params = result.model.parameters();
        adam_step(params, bg.grads, adam, config.learning_rate);
      }
      double const train_mse = dataset_mse(result.model, train_ds, config.eval_stride, threads);
      double const val_mse   = dataset_mse(result.model, val_ds, config.eval_stride, threads);
      if (!std::isfinite(train_mse) || !std::isfinite(val_mse))
      {
        throw DivergenceError(epoch, "non-finite epoch loss");
      }
      result.history.train.push_back(train_mse);
      result.history.val.push_back(val_mse);
      if (observer)
      {
        observer(epoch, train_mse, val_mse);
      }
    }
    catch (NonFiniteError const &e)
    {
      throw DivergenceError(epoch, e.what());
    }
  }
  return result;
}

}  // namespace tempora
