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

#include "tempora/numerics.hpp"
#include "tempora/random.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace tempora {

/// batch x time x features block of sequences, stored contiguously.
class SequenceBatch
{
public:
  SequenceBatch() = default;
  SequenceBatch(std::size_t batch, std::size_t time, std::size_t features);
  SequenceBatch(std::size_t batch, std::size_t time, std::size_t features, std::vector<double> data);

  std::size_t batch() const noexcept { return batch_; }
  std::size_t time() const noexcept { return time_; }
  std::size_t features() const noexcept { return features_; }

  double &at(std::size_t b, std::size_t t, std::size_t f)
  {
    return data_[(b * time_ + t) * features_ + f];
  }
  double at(std::size_t b, std::size_t t, std::size_t f) const
  {
    return data_[(b * time_ + t) * features_ + f];
  }

  /// batch x features matrix of timestep t.
  Matrix step(std::size_t t) const;

private:
  std::size_t         batch_{0};
  std::size_t         time_{0};
  std::size_t         features_{0};
  std::vector<double> data_;
};

struct DenseLayer
{
  Matrix     w;  // in x out
  Matrix     b;  // 1 x out
  Activation activation{Activation::Linear};

  std::size_t inputs() const noexcept { return w.rows(); }
  std::size_t outputs() const noexcept { return w.cols(); }

  static DenseLayer random_init(std::size_t in, std::size_t out, Activation a, Rng &rng);
};

struct SimpleRnnLayer
{
  Matrix     w_x;  // in x units
  Matrix     w_y;  // units x units
  Matrix     b;    // 1 x units
  Activation activation{Activation::Tanh};
  bool       return_sequences{false};

  std::size_t inputs() const noexcept { return w_x.rows(); }
  std::size_t units() const noexcept { return w_x.cols(); }

  static SimpleRnnLayer random_init(std::size_t in, std::size_t units, Activation a,
                               bool return_sequences, Rng &rng);
};

/// Index of each LSTM sub-layer: the main layer g and the three gates.
enum class Gate : std::size_t
{
  Main   = 0,
  Forget = 1,
  Input  = 2,
  Output = 3
};

inline constexpr std::array<Gate, 4> kAllGates{Gate::Main, Gate::Forget, Gate::Input,
                                               Gate::Output};

char gate_letter(Gate g);

struct LstmGateWeights
{
  Matrix w_x;  // in x units
  Matrix w_h;  // units x units
  Matrix b;    // 1 x units
};

/**
 * LSTM layer without peepholes.
 *
 *   f = sigmoid(x W_xf + h W_hf + b_f)      forget gate
 *   i = sigmoid(x W_xi + h W_hi + b_i)      input gate
 *   o = sigmoid(x W_xo + h W_ho + b_o)      output gate
 *   g = act(x W_xg + h W_hg + b_g)          main layer
 *   c' = f * c + i * g
 *   h' = o * act(c')
 *
 * `cell_activation` is `act`; the gates are always sigmoid.
 */
struct LstmLayer
{
  std::array<LstmGateWeights, 4> gates;
  Activation                     cell_activation{Activation::Tanh};
  bool                           return_sequences{false};

  LstmGateWeights       &gate(Gate g) { return gates[static_cast<std::size_t>(g)]; }
  LstmGateWeights const &gate(Gate g) const { return gates[static_cast<std::size_t>(g)]; }

  std::size_t inputs() const noexcept { return gates[0].w_x.rows(); }
  std::size_t units() const noexcept { return gates[0].w_x.cols(); }

  /// Glorot-uniform input kernel and orthogonal recurrent kernel (both over the
  /// packed four-gate matrix), zero biases, forget bias 1.
  static LstmLayer random_init(std::size_t in, std::size_t units, Activation cell_activation,
                          bool return_sequences, Rng &rng);
};

struct LstmCellState
{
  Matrix h;  // batch x units, short-term
  Matrix c;  // batch x units, long-term

  static LstmCellState zeros(std::size_t batch, std::size_t units)
  {
    return {Matrix(batch, units), Matrix(batch, units)};
  }
};

struct LstmStepResult
{
  Matrix        output;
  LstmCellState state;
};

/// phi(x_t W_x + y_prev W_y + b)
Matrix rnn_step(SimpleRnnLayer const &layer, Matrix const &x_t, Matrix const &y_prev);

LstmStepResult lstm_step(LstmLayer const &layer, Matrix const &x_t, LstmCellState const &state);

using Layer = std::variant<DenseLayer, SimpleRnnLayer, LstmLayer>;

/// Which L2 group a parameter belongs to.
enum class ParamGroup
{
  Kernel,
  Recurrent,
  Bias
};

struct ParameterRef
{
  std::string name;
  std::size_t layer;
  ParamGroup  group;
  Matrix     *value;
};

struct ConstParameterRef
{
  std::string   name;
  std::size_t   layer;
  ParamGroup    group;
  Matrix const *value;
};

/**
 * Ordered stack of layers.
 *
 * Recurrent layers consume sequences. A Dense layer that receives a sequence
 * uses only the last timestep. The final output must be a batch x n matrix,
 * so the last layer is either Dense or a recurrent layer with
 * return_sequences off.
 */
class SequentialModel
{
public:
  SequentialModel() = default;
  explicit SequentialModel(std::vector<Layer> layers);

  void add(Layer layer);

  std::vector<Layer>       &layers() noexcept { return layers_; }
  std::vector<Layer> const &layers() const noexcept { return layers_; }

  /// Throws ShapeError describing the first broken invariant.
  void validate() const;

  std::size_t input_width() const;
  std::size_t output_width() const;

  std::vector<ParameterRef>      parameters();
  std::vector<ConstParameterRef> parameters() const;
  std::size_t                    parameter_count() const;

private:
  std::vector<Layer> layers_;
};

/// One gradient per model parameter, in `SequentialModel::parameters()` order.
struct GradientSet
{
  std::vector<std::string> names;
  std::vector<Matrix>      grads;

  static GradientSet zeros_like(SequentialModel const &model);

  std::size_t size() const noexcept { return grads.size(); }
  GradientSet &operator+=(GradientSet const &other);
  double       squared_norm() const noexcept;
  void         scale(double s);
};

/// Per-layer activations recorded by a forward pass for use in backward.
struct ForwardCache
{
  struct Dense
  {
    Matrix      input;
    Matrix      z;
    Matrix      y;
    std::size_t input_steps{0};  // >0 when the input was a sequence
  };
  struct Rnn
  {
    std::vector<Matrix> x;  // per timestep
    std::vector<Matrix> y;  // per timestep
  };
  struct Lstm
  {
    std::vector<Matrix> x;      // per timestep
    std::vector<Matrix> act;    // batch x 4u activated [g f i o] per timestep
    std::vector<Matrix> c;      // c_1..c_T
    std::vector<Matrix> act_c;  // act(c_t)
    std::vector<Matrix> h;      // h_1..h_T
  };
  using Entry = std::variant<Dense, Rnn, Lstm>;

  std::vector<Entry> entries;
  std::size_t        batch{0};
  std::size_t        steps{0};

  bool empty() const noexcept { return entries.empty(); }
};

/// Runs every timestep through the stack from zero initial states.
Matrix forward_sequence(SequentialModel const &model, SequenceBatch const &x);
Matrix forward_sequence(SequentialModel const &model, SequenceBatch const &x, ForwardCache &cache);

/// Backpropagation through time from dL/d(output).
GradientSet backward_sequence(SequentialModel const &model, ForwardCache const &cache,
                              Matrix const &d_output);
void        backward_sequence_accumulate(SequentialModel const &model, ForwardCache const &cache,
                                         Matrix const &d_output, GradientSet &into);

/// Architecture of a recurrent stack with a Dense head.
struct StackSpec
{
  enum class Cell
  {
    Lstm,
    SimpleRnn
  };
  std::size_t              input_width{0};
  Cell                     cell{Cell::Lstm};
  std::vector<std::size_t> units;        // per recurrent layer
  std::vector<Activation>  activations;  // per recurrent layer
  std::size_t              n_output{0};
  Activation               head_activation{Activation::Linear};
};

/// Builds recurrent layers (all but the last returning sequences) plus a Dense head.
SequentialModel build_stack(StackSpec const &spec, Rng &rng);

}  // namespace tempora
