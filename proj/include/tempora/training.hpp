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
#include "tempora/numerics.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tempora {

/// L2 coefficients per parameter group of the input layer.
struct L2Coefficients
{
  double kernel{0.0};
  double recurrent{0.0};
  double bias{0.0};

  bool any() const noexcept { return kernel > 0.0 || recurrent > 0.0 || bias > 0.0; }
  double for_group(ParamGroup g) const noexcept;
};

/// One training regime.
struct ExperimentConfig
{
  std::string              name{"custom"};
  std::vector<std::size_t> units{32, 16};
  std::vector<Activation>  activations{Activation::Tanh, Activation::ReLU};
  std::vector<std::string> features{"temp", "hum", "airpr", "solrad", "windvel", "winddir"};
  std::size_t              history{168};
  std::size_t              horizon{168};  // n_output
  std::size_t              batch_size{256};
  std::size_t              epochs{10};
  std::size_t              evaluation_interval{200};  // training batches per epoch
  L2Coefficients           l2;
  double                   learning_rate{0.001};
  double                   clip_norm{5.0};  // <= 0 disables clipping
  double                   train_fraction{0.78};
  std::uint64_t            seed{42};
  std::size_t              eval_stride{1};  // every n-th window in per-epoch loss passes

  std::size_t n_output() const noexcept { return horizon; }

  /// One message per violated constraint; empty when valid.
  std::vector<std::string> violations() const;
};

/// Thrown when the training loss stops being finite.
class DivergenceError : public std::runtime_error
{
public:
  DivergenceError(std::size_t epoch, std::string const &detail);
  std::size_t epoch() const noexcept { return epoch_; }

private:
  std::size_t epoch_;
};

/// Mean over all entries of (pred - target)^2.
double mse(Matrix const &pred, Matrix const &target);
/// d mse / d pred.
Matrix mse_gradient(Matrix const &pred, Matrix const &target);

/**
 * Sum over groups of lambda_group * sum(w^2) over the parameters of the input
 * layer (layer 0) only.
 */
double l2_penalty(SequentialModel const &model, L2Coefficients const &coeffs);
/// Adds 2 * lambda * w to the matching gradients.
void add_l2_gradient(SequentialModel const &model, L2Coefficients const &coeffs, GradientSet &grads);

/// Rescales so the global L2 norm is at most max_norm. Returns the norm before clipping.
double clip_global_norm(GradientSet &grads, double max_norm);

struct AdamState
{
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::int64_t        t{0};
  double              beta1{0.9};
  double              beta2{0.999};
  double              eps{1e-8};

  static AdamState for_parameters(std::span<ConstParameterRef const> params);
  static AdamState for_model(SequentialModel const &model);
};

/// One bias-corrected Adam update in place.
void adam_step(std::span<ParameterRef const> params, GradientSet const &grads, AdamState &state,
               double learning_rate);

struct LossHistory
{
  std::vector<double> train;
  std::vector<double> val;

  std::size_t epochs() const noexcept { return train.size(); }

  /// `epoch,train_mse,val_mse` with round-trip precision.
  void save_csv(std::string const &path) const;
};

struct OverfitCriteria
{
  double      gap_ratio{1.15};     // val > ratio * train ...
  double      tail_fraction{0.5};  // ... over this final share of epochs
  std::size_t trend_epochs{3};     // or val up while train down over these
};

struct Diagnosis
{
  bool        overfitting{false};
  bool        persistent_gap{false};
  bool        rising_validation{false};
  double      final_gap{0.0};  // val - train at the last epoch
  std::string reason;
};

Diagnosis detect_overfitting(LossHistory const &history, OverfitCriteria const &criteria = {});

/// Worker threads from TEMPORA_THREADS, else hardware concurrency.
std::size_t worker_threads();

struct BatchGradient
{
  double      loss{0.0};  // MSE over the batch
  GradientSet grads;
};

/**
 * MSE loss and its gradient over the given samples. Work is split into
 * fixed 64-sample chunks reduced in chunk order, so the result does not
 * depend on the thread count.
 */
BatchGradient batch_gradient(SequentialModel const &model, WindowedDataset const &ds,
                             std::span<std::size_t const> samples, std::size_t threads);

/// Full-pass MSE over every `stride`-th sample.
double dataset_mse(SequentialModel const &model, WindowedDataset const &ds, std::size_t stride,
                   std::size_t threads);

/// Forward predictions for the given samples, in order.
Matrix predict(SequentialModel const &model, WindowedDataset const &ds,
               std::span<std::size_t const> samples, std::size_t threads);

struct TrainResult
{
  SequentialModel model;
  LossHistory     history;
};

using EpochObserver = std::function<void(std::size_t epoch, double train_mse, double val_mse)>;

/**
 * Each epoch consumes `evaluation_interval` batches of `batch_size` samples
 * taken in order from a seeded shuffle (reshuffled when exhausted), then
 * records full-pass train and validation MSE.
 */
TrainResult train(SequentialModel model, ExperimentConfig const &config,
                  WindowedDataset const &train_ds, WindowedDataset const &val_ds,
                  EpochObserver const &observer = {});

}  // namespace tempora
