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

#include "tempora/layers.hpp"
#include "tempora/numerics.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace tempora::oracle {

/// Loss as a pure function of a full parameter list.
using LossFn = std::function<double(std::vector<Matrix> const &)>;

/// Central differences (L(p+eps) - L(p-eps)) / (2 eps), one coordinate at a time.
std::vector<Matrix> finite_diff_gradient(LossFn const &loss, std::vector<Matrix> params,
                                         double eps = 1e-5);

/// |a - b| / max(|a|, |b|, 1e-8)
double relative_error(double a, double b) noexcept;

struct ParameterCheck
{
  std::string name;
  double      max_rel_error{0.0};
  double      max_abs_error{0.0};
  std::size_t worst_row{0};
  std::size_t worst_col{0};
  double      analytic_at_worst{0.0};
  double      numeric_at_worst{0.0};
  bool        passed{true};
};

struct GradCheckReport
{
  std::string                 label;
  std::vector<ParameterCheck> parameters;

  bool passed() const noexcept;
};

struct GradCheckTolerance
{
  double eps{1e-5};
  double rel{1e-4};
  double abs_floor{1e-6};
};

/// Computes analytic gradients of a model for given data.
using AnalyticGradientFn =
  std::function<GradientSet(SequentialModel const &, SequenceBatch const &, Matrix const &)>;

/**
 * Compares analytic gradients against central differences for every
 * coordinate of every parameter. The loss is
 *   L = sum(out * projection) + 0.5 * sum(out^2)
 * so dL/dout = projection + out.
 */
GradCheckReport check_model_gradients(std::string label, SequentialModel const &model,
                                      SequenceBatch const &x, Matrix const &projection,
                                      AnalyticGradientFn const &analytic,
                                      GradCheckTolerance const &tol = {});

/// Analytic gradient via forward_sequence + backward_sequence.
GradientSet bptt_gradient(SequentialModel const &model, SequenceBatch const &x,
                          Matrix const &projection);

/// Weights of a one-unit, one-feature LSTM.
struct ScalarLstm
{
  // per sub-layer: input weight, recurrent weight, bias
  double     wx_g{0}, wh_g{0}, b_g{0};
  double     wx_f{0}, wh_f{0}, b_f{0};
  double     wx_i{0}, wh_i{0}, b_i{0};
  double     wx_o{0}, wh_o{0}, b_o{0};
  Activation cell{Activation::Tanh};
};

struct ScalarLstmTrace
{
  std::vector<double> h;
  std::vector<double> c;
};

/// Plain scalar evaluation of the gate equations from h = c = 0.
ScalarLstmTrace scalar_lstm_oracle(ScalarLstm const &w, std::vector<double> const &inputs);

struct ScalarRnn
{
  double     wx{0}, wy{0}, b{0};
  Activation activation{Activation::Tanh};
};

std::vector<double> scalar_rnn_oracle(ScalarRnn const &w, std::vector<double> const &inputs);

/// Builds the equivalent 1x1 matrix layer.
LstmLayer to_layer(ScalarLstm const &w, bool return_sequences = false);

struct EquivalenceResult
{
  std::size_t configs{0};
  double      max_abs_diff{0.0};
  bool        passed{true};
};

/// Random 1-unit LSTM configs compared against lstm_step and forward_sequence.
EquivalenceResult lstm_oracle_equivalence(std::size_t configs, std::uint64_t seed,
                                          double tolerance = 1e-12);

struct SuiteResult
{
  std::vector<GradCheckReport> gradient_reports;
  EquivalenceResult            equivalence;
  bool                         passed() const noexcept;
};

/**
 * Full check: Dense, SimpleRNN and LSTM stacks over `seeds` random small
 * configurations, plus scalar-oracle equivalence on 100 LSTM configs.
 *
 * `fault` names a parameter suffix (e.g. "lstm.w_h_f") whose analytic
 * gradient is perturbed before comparison; empty means no fault.
 */
SuiteResult run_suite(std::size_t seeds = 20, std::string_view fault = {});

/// Human-readable table of a suite result.
std::string format_report(SuiteResult const &result);

}  // namespace tempora::oracle
