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

#include "tempora/layers.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tempora {

namespace {

Matrix glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng &rng)
{
  double const limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix       m(fan_in, fan_out);
  for (auto &v : m.data())
  {
    v = rng.uniform(-limit, limit);
  }
  return m;
}

// rows x cols with orthonormal rows (rows <= cols) or columns (rows >= cols).
Matrix orthogonal(std::size_t rows, std::size_t cols, Rng &rng)
{
  auto const      n = static_cast<Eigen::Index>(std::max(rows, cols));
  auto const      k = static_cast<Eigen::Index>(std::min(rows, cols));
  Eigen::MatrixXd a(n, k);
  for (Eigen::Index i = 0; i < n; ++i)
  {
    for (Eigen::Index j = 0; j < k; ++j)
    {
      a(i, j) = rng.normal();
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
  // sign fix makes the decomposition unique
  Eigen::MatrixXd const r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < k; ++j)
  {
    if (r(j, j) < 0.0)
    {
      q.col(j) *= -1.0;
    }
  }
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
  {
    for (std::size_t j = 0; j < cols; ++j)
    {
      auto const ii = static_cast<Eigen::Index>(i);
      auto const jj = static_cast<Eigen::Index>(j);
      m(i, j)       = rows >= cols ? q(ii, jj) : q(jj, ii);
    }
  }
  return m;
}

// Derivative of act at a pre-activation whose activated value is y. For ReLU
// the sign of y equals the sign of z, so y stands in for z.
inline double derivative_from_output(Activation a, double y)
{
  return activation_derivative(a, y, y);
}

// The four gate kernels packed side by side, columns ordered [g f i o].
struct PackedLstm
{
  Matrix      w_x;  // in x 4u
  Matrix      w_h;  // u x 4u
  Matrix      b;    // 1 x 4u
  std::size_t units{0};
};

PackedLstm pack(LstmLayer const &layer)
{
  std::size_t const in = layer.inputs();
  std::size_t const u  = layer.units();
  PackedLstm        p{Matrix(in, 4 * u), Matrix(u, 4 * u), Matrix(1, 4 * u), u};
  for (std::size_t k = 0; k < 4; ++k)
  {
    auto const &g = layer.gates[k];
    for (std::size_t r = 0; r < in; ++r)
    {
      for (std::size_t j = 0; j < u; ++j)
      {
        p.w_x(r, k * u + j) = g.w_x(r, j);
      }
    }
    for (std::size_t r = 0; r < u; ++r)
    {
      for (std::size_t j = 0; j < u; ++j)
      {
        p.w_h(r, k * u + j) = g.w_h(r, j);
      }
    }
    for (std::size_t j = 0; j < u; ++j)
    {
      p.b(0, k * u + j) = g.b(0, j);
    }
  }
  return p;
}

struct LstmStepOutputs
{
  Matrix act;    // batch x 4u, activated [g f i o]
  Matrix c;      // new long-term state
  Matrix act_c;  // act(c)
  Matrix h;      // new short-term state
};

LstmStepOutputs lstm_cell(PackedLstm const &p, Activation cell_act, Matrix const &x,
                          Matrix const &h, Matrix const &c)
{
  std::size_t const u = p.units;
  Matrix            z = matmul(x, p.w_x);
  add_matmul(z, h, p.w_h);
  z = add_row_broadcast(std::move(z), p.b);

  std::size_t const batch = x.rows();
  LstmStepOutputs   out{Matrix(batch, 4 * u), Matrix(batch, u), Matrix(batch, u), Matrix(batch, u)};
  for (std::size_t r = 0; r < batch; ++r)
  {
    auto const zr = z.row(r);
    auto       ar = out.act.row(r);
    for (std::size_t j = 0; j < u; ++j)
    {
      double const g  = activate(cell_act, zr[j]);
      double const f  = sigmoid(zr[u + j]);
      double const i  = sigmoid(zr[2 * u + j]);
      double const o  = sigmoid(zr[3 * u + j]);
      double const cn = f * c(r, j) + i * g;
      double const ac = activate(cell_act, cn);
      ar[j]           = g;
      ar[u + j]       = f;
      ar[2 * u + j]   = i;
      ar[3 * u + j]   = o;
      out.c(r, j)     = cn;
      out.act_c(r, j) = ac;
      out.h(r, j)     = o * ac;
    }
  }
  require_finite(out.h, "lstm_step");
  require_finite(out.c, "lstm_step");
  return out;
}

Matrix rnn_cell(SimpleRnnLayer const &layer, Matrix const &x, Matrix const &y_prev)
{
  Matrix z = matmul(x, layer.w_x);
  add_matmul(z, y_prev, layer.w_y);
  z      = add_row_broadcast(std::move(z), layer.b);
  auto y = apply_activation(z, layer.activation);
  require_finite(y, "rnn_step");
  return y;
}

void check_step_shapes(std::string_view what, std::size_t in, std::size_t units, Matrix const &x,
                       Matrix const &state)
{
  if (x.cols() != in || state.cols() != units || state.rows() != x.rows())
  {
    std::ostringstream os;
    os << what << ": expected x batch x " << in << " and state batch x " << units << ", got "
       << x.shape_string() << " and " << state.shape_string();
    throw ShapeError(os.str());
  }
}

[[noreturn]] void layer_error(std::size_t k, std::string const &msg)
{
  throw ShapeError("layer " + std::to_string(k) + ": " + msg);
}

void append_matrix_params(std::vector<ParameterRef> &out, std::size_t k, std::string const &prefix,
                          std::string const &name, ParamGroup group, Matrix &m)
{
  out.push_back({"layer" + std::to_string(k) + "." + prefix + "." + name, k, group, &m});
}

// Flow of activations between layers: either a sequence of per-step
// matrices or a single batch matrix.
struct Flow
{
  bool                seq{true};
  std::vector<Matrix> steps;
  Matrix              flat;
};

Flow forward_impl(SequentialModel const &model, SequenceBatch const &x, ForwardCache *cache)
{
  model.validate();
  if (x.time() == 0)
  {
    throw ShapeError("forward_sequence: empty sequence");
  }
  if (x.batch() == 0)
  {
    throw ShapeError("forward_sequence: empty batch");
  }
  if (x.features() != model.input_width())
  {
    throw ShapeError("forward_sequence: input has " + std::to_string(x.features()) +
                     " features, model expects " + std::to_string(model.input_width()));
  }

  Flow flow;
  flow.steps.reserve(x.time());
  for (std::size_t t = 0; t < x.time(); ++t)
  {
    flow.steps.push_back(x.step(t));
  }
  if (cache != nullptr)
  {
    cache->entries.clear();
    cache->batch = x.batch();
    cache->steps = x.time();
  }

  std::size_t const batch = x.batch();
  for (auto const &layer : model.layers())
  {
    if (auto const *dense = std::get_if<DenseLayer>(&layer))
    {
      std::size_t const steps = flow.seq ? flow.steps.size() : 0;
      Matrix            input = flow.seq ? std::move(flow.steps.back()) : std::move(flow.flat);
      Matrix z = add_row_broadcast(matmul(input, dense->w), dense->b);
      Matrix y = apply_activation(z, dense->activation);
      require_finite(y, "dense layer");
      flow.seq = false;
      flow.steps.clear();
      flow.flat = y;
      if (cache != nullptr)
      {
        cache->entries.emplace_back(ForwardCache::Dense{std::move(input), std::move(z), std::move(y), steps});
      }
    }
    else if (auto const *rnn = std::get_if<SimpleRnnLayer>(&layer))
    {
      ForwardCache::Rnn   rec;
      std::vector<Matrix> outputs;
      outputs.reserve(flow.steps.size());
      Matrix y(batch, rnn->units());
      for (auto const &xt : flow.steps)
      {
        y = rnn_cell(*rnn, xt, y);
        outputs.push_back(y);
      }
      if (cache != nullptr)
      {
        rec.x = std::move(flow.steps);
        rec.y = outputs;
      }
      if (rnn->return_sequences)
      {
        flow.steps = std::move(outputs);
      }
      else
      {
        flow.seq  = false;
        flow.flat = std::move(outputs.back());
        flow.steps.clear();
      }
      if (cache != nullptr)
      {
        cache->entries.emplace_back(std::move(rec));
      }
    }
    else
    {
      auto const         &lstm = std::get<LstmLayer>(layer);
      PackedLstm const    p    = pack(lstm);
      std::size_t const   u    = lstm.units();
      ForwardCache::Lstm  rec;
      std::vector<Matrix> outputs;
      outputs.reserve(flow.steps.size());
      Matrix h(batch, u);
      Matrix c(batch, u);
      for (auto const &xt : flow.steps)
      {
        auto s = lstm_cell(p, lstm.cell_activation, xt, h, c);
        h      = s.h;
        c      = s.c;
        outputs.push_back(s.h);
        if (cache != nullptr)
        {
          rec.act.push_back(std::move(s.act));
          rec.c.push_back(std::move(s.c));
          rec.act_c.push_back(std::move(s.act_c));
          rec.h.push_back(std::move(s.h));
        }
      }
      if (cache != nullptr)
      {
        rec.x = std::move(flow.steps);
      }
      if (lstm.return_sequences)
      {
        flow.steps = std::move(outputs);
      }
      else
      {
        flow.seq  = false;
        flow.flat = std::move(outputs.back());
        flow.steps.clear();
      }
      if (cache != nullptr)
      {
        cache->entries.emplace_back(std::move(rec));
      }
    }
  }
  return flow;
}

// Gradient of the sequence flowing into a layer; an empty matrix is zero.
using StepGrads = std::vector<Matrix>;

StepGrads backward_rnn(SimpleRnnLayer const &layer, ForwardCache::Rnn const &rec,
                       StepGrads const &d_out, bool want_input_grad, Matrix &g_wx, Matrix &g_wy,
                       Matrix &g_b)
{
  std::size_t const T = rec.x.size();
  StepGrads         d_in(want_input_grad ? T : 0);
  Matrix            dh_next;
  for (std::size_t t = T; t-- > 0;)
  {
    Matrix dy = dh_next.empty() ? Matrix(rec.y[t].rows(), rec.y[t].cols()) : dh_next;
    if (!d_out[t].empty())
    {
      dy += d_out[t];
    }
    auto const ys  = rec.y[t].data();
    auto       dys = dy.data();
    for (std::size_t i = 0; i < dys.size(); ++i)
    {
      dys[i] *= derivative_from_output(layer.activation, ys[i]);
    }
    Matrix const &dz = dy;
    add_matmul_tn(g_wx, rec.x[t], dz);
    if (t > 0)
    {
      add_matmul_tn(g_wy, rec.y[t - 1], dz);
    }
    add_column_sums(g_b, dz);
    if (want_input_grad)
    {
      d_in[t] = matmul_nt(dz, layer.w_x);
    }
    if (t > 0)
    {
      dh_next = matmul_nt(dz, layer.w_y);
    }
  }
  return d_in;
}

StepGrads backward_lstm(LstmLayer const &layer, ForwardCache::Lstm const &rec,
                        StepGrads const &d_out, bool want_input_grad, GradientSet &grads,
                        std::size_t offset)
{
  PackedLstm const  p     = pack(layer);
  std::size_t const u     = p.units;
  std::size_t const T     = rec.x.size();
  std::size_t const batch = rec.h.front().rows();
  Activation const  act   = layer.cell_activation;

  Matrix    g_wx(p.w_x.rows(), p.w_x.cols());
  Matrix    g_wh(p.w_h.rows(), p.w_h.cols());
  Matrix    g_b(1, 4 * u);
  StepGrads d_in(want_input_grad ? T : 0);
  Matrix    dh_next(batch, u);
  Matrix    dc_next(batch, u);
  Matrix    dz(batch, 4 * u);

  for (std::size_t t = T; t-- > 0;)
  {
    Matrix const &a      = rec.act[t];
    Matrix const &ct     = rec.c[t];
    Matrix const &act_c  = rec.act_c[t];
    Matrix const *c_prev = t > 0 ? &rec.c[t - 1] : nullptr;
    bool const    has_up = !d_out[t].empty();
    for (std::size_t r = 0; r < batch; ++r)
    {
      auto const ar  = a.row(r);
      auto       dzr = dz.row(r);
      for (std::size_t j = 0; j < u; ++j)
      {
        double const g    = ar[j];
        double const f    = ar[u + j];
        double const i    = ar[2 * u + j];
        double const o    = ar[3 * u + j];
        double const ac   = act_c(r, j);
        double const dh   = dh_next(r, j) + (has_up ? d_out[t](r, j) : 0.0);
        double const dc   = dc_next(r, j) + dh * o * activation_derivative(act, ct(r, j), ac);
        double const cp   = c_prev != nullptr ? (*c_prev)(r, j) : 0.0;
        double const d_o  = dh * ac;
        double const d_f  = dc * cp;
        double const d_i  = dc * g;
        double const d_g  = dc * i;
        dc_next(r, j)     = dc * f;
        dzr[j]            = d_g * derivative_from_output(act, g);
        dzr[u + j]        = d_f * f * (1.0 - f);
        dzr[2 * u + j]    = d_i * i * (1.0 - i);
        dzr[3 * u + j]    = d_o * o * (1.0 - o);
      }
    }
    add_matmul_tn(g_wx, rec.x[t], dz);
    if (t > 0)
    {
      add_matmul_tn(g_wh, rec.h[t - 1], dz);
    }
    add_column_sums(g_b, dz);
    if (want_input_grad)
    {
      d_in[t] = matmul_nt(dz, p.w_x);
    }
    if (t > 0)
    {
      dh_next = matmul_nt(dz, p.w_h);
    }
  }

  // unpack into per-gate gradients: [w_x, w_h, b] for g, f, i, o
  std::size_t const in = layer.inputs();
  for (std::size_t k = 0; k < 4; ++k)
  {
    Matrix &gx = grads.grads[offset + 3 * k];
    Matrix &gh = grads.grads[offset + 3 * k + 1];
    Matrix &gb = grads.grads[offset + 3 * k + 2];
    for (std::size_t r = 0; r < in; ++r)
    {
      for (std::size_t j = 0; j < u; ++j)
      {
        gx(r, j) += g_wx(r, k * u + j);
      }
    }
    for (std::size_t r = 0; r < u; ++r)
    {
      for (std::size_t j = 0; j < u; ++j)
      {
        gh(r, j) += g_wh(r, k * u + j);
      }
    }
    for (std::size_t j = 0; j < u; ++j)
    {
      gb(0, j) += g_b(0, k * u + j);
    }
  }
  return d_in;
}

std::size_t layer_param_count(Layer const &layer)
{
  if (std::holds_alternative<DenseLayer>(layer))
  {
    return 2;
  }
  if (std::holds_alternative<SimpleRnnLayer>(layer))
  {
    return 3;
  }
  return 12;
}

}  // namespace

SequenceBatch::SequenceBatch(std::size_t batch, std::size_t time, std::size_t features)
  : batch_{batch}
  , time_{time}
  , features_{features}
  , data_(batch * time * features, 0.0)
{}

SequenceBatch::SequenceBatch(std::size_t batch, std::size_t time, std::size_t features,
                             std::vector<double> data)
  : batch_{batch}
  , time_{time}
  , features_{features}
  , data_(std::move(data))
{
  if (data_.size() != batch * time * features)
  {
    throw ShapeError("SequenceBatch: data length does not match shape");
  }
}

Matrix SequenceBatch::step(std::size_t t) const
{
  if (t >= time_)
  {
    throw ShapeError("SequenceBatch::step: timestep out of range");
  }
  std::vector<double> out(batch_ * features_);
  for (std::size_t b = 0; b < batch_; ++b)
  {
    auto const *src = data_.data() + (b * time_ + t) * features_;
    std::copy(src, src + features_, out.begin() + static_cast<std::ptrdiff_t>(b * features_));
  }
  return Matrix(batch_, features_, std::move(out));
}

DenseLayer DenseLayer::random_init(std::size_t in, std::size_t out, Activation a, Rng &rng)
{
  return {glorot_uniform(in, out, rng), Matrix(1, out), a};
}

SimpleRnnLayer SimpleRnnLayer::random_init(std::size_t in, std::size_t units, Activation a,
                                      bool return_sequences, Rng &rng)
{
  auto w_x = glorot_uniform(in, units, rng);
  auto w_y = orthogonal(units, units, rng);
  return {std::move(w_x), std::move(w_y), Matrix(1, units), a, return_sequences};
}

LstmLayer LstmLayer::random_init(std::size_t in, std::size_t units, Activation cell_activation,
                            bool return_sequences, Rng &rng)
{
  LstmLayer layer;
  layer.cell_activation  = cell_activation;
  layer.return_sequences = return_sequences;
  // Initialised as the packed in x 4u kernel and u x 4u recurrent kernel,
  // then split per gate.
  Matrix const kernel    = glorot_uniform(in, 4 * units, rng);
  Matrix const recurrent = orthogonal(units, 4 * units, rng);
  for (auto g : kAllGates)
  {
    auto const k = static_cast<std::size_t>(g);
    auto      &w = layer.gate(g);
    w.w_x        = Matrix(in, units);
    w.w_h        = Matrix(units, units);
    for (std::size_t r = 0; r < in; ++r)
    {
      for (std::size_t j = 0; j < units; ++j)
      {
        w.w_x(r, j) = kernel(r, k * units + j);
      }
    }
    for (std::size_t r = 0; r < units; ++r)
    {
      for (std::size_t j = 0; j < units; ++j)
      {
        w.w_h(r, j) = recurrent(r, k * units + j);
      }
    }
    w.b = Matrix(1, units, g == Gate::Forget ? 1.0 : 0.0);
  }
  return layer;
}

char gate_letter(Gate g)
{
  switch (g)
  {
  case Gate::Main:
    return 'g';
  case Gate::Forget:
    return 'f';
  case Gate::Input:
    return 'i';
  case Gate::Output:
    return 'o';
  }
  return '?';
}

Matrix rnn_step(SimpleRnnLayer const &layer, Matrix const &x_t, Matrix const &y_prev)
{
  check_step_shapes("rnn_step", layer.inputs(), layer.units(), x_t, y_prev);
  return rnn_cell(layer, x_t, y_prev);
}

LstmStepResult lstm_step(LstmLayer const &layer, Matrix const &x_t, LstmCellState const &state)
{
  check_step_shapes("lstm_step", layer.inputs(), layer.units(), x_t, state.h);
  if (!state.h.same_shape(state.c))
  {
    throw ShapeError("lstm_step: h is " + state.h.shape_string() + " but c is " +
                     state.c.shape_string());
  }
  auto s = lstm_cell(pack(layer), layer.cell_activation, x_t, state.h, state.c);
  return {s.h, {s.h, s.c}};
}

SequentialModel::SequentialModel(std::vector<Layer> layers)
  : layers_(std::move(layers))
{
  validate();
}

void SequentialModel::add(Layer layer)
{
  layers_.push_back(std::move(layer));
}

void SequentialModel::validate() const
{
  if (layers_.empty())
  {
    throw ShapeError("model has no layers");
  }
  bool        seq   = true;
  std::size_t width = input_width();
  for (std::size_t k = 0; k < layers_.size(); ++k)
  {
    auto const &layer = layers_[k];
    if (auto const *d = std::get_if<DenseLayer>(&layer))
    {
      if (d->inputs() != width)
      {
        layer_error(k, "dense expects width " + std::to_string(d->inputs()) + ", receives " +
                           std::to_string(width));
      }
      if (d->b.rows() != 1 || d->b.cols() != d->outputs())
      {
        layer_error(k, "dense bias must be 1x" + std::to_string(d->outputs()));
      }
      seq   = false;
      width = d->outputs();
    }
    else if (auto const *r = std::get_if<SimpleRnnLayer>(&layer))
    {
      if (!seq)
      {
        layer_error(k, "recurrent layer receives a non-sequence input");
      }
      if (r->inputs() != width)
      {
        layer_error(k, "rnn expects width " + std::to_string(r->inputs()) + ", receives " +
                           std::to_string(width));
      }
      if (r->w_y.rows() != r->units() || r->w_y.cols() != r->units() || r->b.rows() != 1 ||
          r->b.cols() != r->units())
      {
        layer_error(k, "rnn recurrent kernel or bias shape inconsistent");
      }
      if (r->activation == Activation::Softmax)
      {
        layer_error(k, "softmax is not a recurrent activation");
      }
      seq   = r->return_sequences;
      width = r->units();
    }
    else
    {
      auto const &l = std::get<LstmLayer>(layer);
      if (!seq)
      {
        layer_error(k, "recurrent layer receives a non-sequence input");
      }
      if (l.inputs() != width)
      {
        layer_error(k, "lstm expects width " + std::to_string(l.inputs()) + ", receives " +
                           std::to_string(width));
      }
      std::size_t const u = l.units();
      for (auto const &g : l.gates)
      {
        if (g.w_x.rows() != l.inputs() || g.w_x.cols() != u || g.w_h.rows() != u ||
            g.w_h.cols() != u || g.b.rows() != 1 || g.b.cols() != u)
        {
          layer_error(k, "lstm gate shapes inconsistent");
        }
      }
      if (l.cell_activation == Activation::Softmax)
      {
        layer_error(k, "softmax is not a recurrent activation");
      }
      seq   = l.return_sequences;
      width = u;
    }
  }
  if (seq)
  {
    throw ShapeError("model output is a sequence; end with a Dense layer or return_sequences off");
  }
}

std::size_t SequentialModel::input_width() const
{
  if (layers_.empty())
  {
    return 0;
  }
  return std::visit([](auto const &l) { return l.inputs(); }, layers_.front());
}

std::size_t SequentialModel::output_width() const
{
  if (layers_.empty())
  {
    return 0;
  }
  auto const &last = layers_.back();
  if (auto const *d = std::get_if<DenseLayer>(&last))
  {
    return d->outputs();
  }
  if (auto const *r = std::get_if<SimpleRnnLayer>(&last))
  {
    return r->units();
  }
  return std::get<LstmLayer>(last).units();
}

std::vector<ParameterRef> SequentialModel::parameters()
{
  std::vector<ParameterRef> out;
  for (std::size_t k = 0; k < layers_.size(); ++k)
  {
    auto &layer = layers_[k];
    if (auto *d = std::get_if<DenseLayer>(&layer))
    {
      append_matrix_params(out, k, "dense", "w", ParamGroup::Kernel, d->w);
      append_matrix_params(out, k, "dense", "b", ParamGroup::Bias, d->b);
    }
    else if (auto *r = std::get_if<SimpleRnnLayer>(&layer))
    {
      append_matrix_params(out, k, "rnn", "w_x", ParamGroup::Kernel, r->w_x);
      append_matrix_params(out, k, "rnn", "w_y", ParamGroup::Recurrent, r->w_y);
      append_matrix_params(out, k, "rnn", "b", ParamGroup::Bias, r->b);
    }
    else
    {
      auto &l = std::get<LstmLayer>(layer);
      for (auto g : kAllGates)
      {
        std::string const s(1, gate_letter(g));
        append_matrix_params(out, k, "lstm", "w_x_" + s, ParamGroup::Kernel, l.gate(g).w_x);
        append_matrix_params(out, k, "lstm", "w_h_" + s, ParamGroup::Recurrent, l.gate(g).w_h);
        append_matrix_params(out, k, "lstm", "b_" + s, ParamGroup::Bias, l.gate(g).b);
      }
    }
  }
  return out;
}

std::vector<ConstParameterRef> SequentialModel::parameters() const
{
  auto                           refs = const_cast<SequentialModel *>(this)->parameters();
  std::vector<ConstParameterRef> out;
  out.reserve(refs.size());
  for (auto &r : refs)
  {
    out.push_back({std::move(r.name), r.layer, r.group, r.value});
  }
  return out;
}

std::size_t SequentialModel::parameter_count() const
{
  std::size_t n = 0;
  for (auto const &p : parameters())
  {
    n += p.value->size();
  }
  return n;
}

GradientSet GradientSet::zeros_like(SequentialModel const &model)
{
  GradientSet g;
  for (auto const &p : model.parameters())
  {
    g.names.push_back(p.name);
    g.grads.emplace_back(p.value->rows(), p.value->cols());
  }
  return g;
}

GradientSet &GradientSet::operator+=(GradientSet const &other)
{
  if (other.grads.size() != grads.size())
  {
    throw ShapeError("GradientSet: size mismatch");
  }
  for (std::size_t i = 0; i < grads.size(); ++i)
  {
    grads[i] += other.grads[i];
  }
  return *this;
}

double GradientSet::squared_norm() const noexcept
{
  double acc = 0.0;
  for (auto const &g : grads)
  {
    acc += sum_squares(g);
  }
  return acc;
}

void GradientSet::scale(double s)
{
  for (auto &g : grads)
  {
    g *= s;
  }
}

Matrix forward_sequence(SequentialModel const &model, SequenceBatch const &x)
{
  return forward_impl(model, x, nullptr).flat;
}

Matrix forward_sequence(SequentialModel const &model, SequenceBatch const &x, ForwardCache &cache)
{
  return forward_impl(model, x, &cache).flat;
}

GradientSet backward_sequence(SequentialModel const &model, ForwardCache const &cache,
                              Matrix const &d_output)
{
  auto grads = GradientSet::zeros_like(model);
  backward_sequence_accumulate(model, cache, d_output, grads);
  return grads;
}

void backward_sequence_accumulate(SequentialModel const &model, ForwardCache const &cache,
                                  Matrix const &d_output, GradientSet &into)
{
  if (cache.empty() || cache.entries.size() != model.layers().size())
  {
    throw std::logic_error("backward_sequence: no cached forward pass for this model");
  }
  if (d_output.rows() != cache.batch || d_output.cols() != model.output_width())
  {
    throw ShapeError("backward_sequence: upstream gradient is " + d_output.shape_string() +
                     ", expected " + std::to_string(cache.batch) + "x" +
                     std::to_string(model.output_width()));
  }
  if (into.grads.size() != model.parameters().size())
  {
    throw ShapeError("backward_sequence: gradient set does not match model parameters");
  }

  std::vector<std::size_t> offsets(model.layers().size());
  std::size_t              total = 0;
  for (std::size_t k = 0; k < model.layers().size(); ++k)
  {
    offsets[k] = total;
    total += layer_param_count(model.layers()[k]);
  }

  bool      seq = false;
  Matrix    d_flat = d_output;
  StepGrads d_steps;

  for (std::size_t k = model.layers().size(); k-- > 0;)
  {
    auto const &layer      = model.layers()[k];
    auto const &entry      = cache.entries[k];
    bool const  want_input = k > 0;
    std::size_t const off  = offsets[k];

    if (auto const *dense = std::get_if<DenseLayer>(&layer))
    {
      auto const &rec = std::get<ForwardCache::Dense>(entry);
      Matrix const dz = activation_backward(rec.z, rec.y, d_flat, dense->activation);
      add_matmul_tn(into.grads[off], rec.input, dz);
      add_column_sums(into.grads[off + 1], dz);
      if (!want_input)
      {
        break;
      }
      Matrix d_in = matmul_nt(dz, dense->w);
      if (rec.input_steps > 0)
      {
        seq = true;
        d_steps.assign(rec.input_steps, Matrix());
        d_steps.back() = std::move(d_in);
      }
      else
      {
        d_flat = std::move(d_in);
      }
      continue;
    }

    std::size_t const steps =
      std::visit([](auto const &r) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(r)>, ForwardCache::Dense>)
        {
          return 0;
        }
        else
        {
          return r.x.size();
        }
      },
                 entry);
    if (!seq)
    {
      d_steps.assign(steps, Matrix());
      d_steps.back() = std::move(d_flat);
      seq            = true;
    }

    if (auto const *rnn = std::get_if<SimpleRnnLayer>(&layer))
    {
      auto const &rec = std::get<ForwardCache::Rnn>(entry);
      d_steps = backward_rnn(*rnn, rec, d_steps, want_input, into.grads[off], into.grads[off + 1],
                             into.grads[off + 2]);
    }
    else
    {
      auto const &rec = std::get<ForwardCache::Lstm>(entry);
      d_steps = backward_lstm(std::get<LstmLayer>(layer), rec, d_steps, want_input, into, off);
    }
  }
}

SequentialModel build_stack(StackSpec const &spec, Rng &rng)
{
  if (spec.units.empty() || spec.units.size() != spec.activations.size())
  {
    throw std::invalid_argument("build_stack: need one activation per recurrent layer");
  }
  if (spec.input_width == 0 || spec.n_output == 0)
  {
    throw std::invalid_argument("build_stack: input width and n_output must be positive");
  }
  SequentialModel model;
  std::size_t     width = spec.input_width;
  for (std::size_t k = 0; k < spec.units.size(); ++k)
  {
    bool const last = k + 1 == spec.units.size();
    if (spec.cell == StackSpec::Cell::Lstm)
    {
      model.add(LstmLayer::random_init(width, spec.units[k], spec.activations[k], !last, rng));
    }
    else
    {
      model.add(SimpleRnnLayer::random_init(width, spec.units[k], spec.activations[k], !last, rng));
    }
    width = spec.units[k];
  }
  model.add(DenseLayer::random_init(width, spec.n_output, spec.head_activation, rng));
  model.validate();
  return model;
}

}  // namespace tempora
