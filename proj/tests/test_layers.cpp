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

#include "tempora/layers.hpp"
#include "tempora/oracle.hpp"

using namespace tempora;
using tempora::testing::max_abs_diff;
using tempora::testing::random_matrix;

namespace {

LstmLayer constant_lstm(std::size_t in, std::size_t units, double w, double b)
{
  LstmLayer l;
  for (auto &g : l.gates)
  {
    g = {Matrix(in, units, w), Matrix(units, units, w), Matrix(1, units, b)};
  }
  return l;
}

SequenceBatch random_batch(std::size_t b, std::size_t t, std::size_t f, Rng &rng)
{
  SequenceBatch x(b, t, f);
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t s = 0; s < t; ++s)
      for (std::size_t k = 0; k < f; ++k)
        x.at(i, s, k) = rng.uniform(-2.0, 2.0);
  return x;
}

}  // namespace

TEST_CASE("simple recurrent step")
{
  // y = phi(x Wx + y_prev Wy + b) = 2*1 + 3*1 + 0 = 5 under a linear activation
  SimpleRnnLayer l{Matrix{{2}}, Matrix{{3}}, Matrix{{0}}, Activation::Linear, false};
  CHECK(rnn_step(l, Matrix{{1}}, Matrix{{1}}) == Matrix{{5}});
}

TEST_CASE("simple recurrent layer unrolls over time")
{
  SimpleRnnLayer  l{Matrix{{0.8}}, Matrix{{0.5}}, Matrix{{0.1}}, Activation::Tanh, true};
  SequentialModel m;
  m.add(l);
  m.add(DenseLayer{Matrix{{1}}, Matrix{{0}}, Activation::Linear});
  // Values from an independent high-precision evaluation.
  SequenceBatch x(1, 2, 1, {1.0, -1.0});
  CHECK(forward_sequence(m, x)(0, 0) == doctest::Approx(-0.32912894580946632056).epsilon(1e-14));
  auto const ys = oracle::scalar_rnn_oracle({0.8, 0.5, 0.1, Activation::Tanh}, {1.0, -1.0});
  CHECK(ys[0] == doctest::Approx(0.71629787019902442081).epsilon(1e-14));
}

TEST_CASE("all-zero LSTM weights give zero outputs")
{
  LstmLayer const l     = constant_lstm(3, 4, 0.0, 0.0);
  LstmCellState   state = LstmCellState::zeros(2, 4);
  Rng             rng(1);
  for (int t = 0; t < 5; ++t)
  {
    auto r = lstm_step(l, random_matrix(2, 3, rng), state);
    CHECK(r.output == Matrix(2, 4));
    CHECK(r.state.c == Matrix(2, 4));
    state = r.state;
  }
}

TEST_CASE("a saturated-closed forget gate drops the long-term state")
{
  LstmLayer l                  = constant_lstm(1, 1, 0.3, 0.2);
  l.gate(Gate::Forget).b       = Matrix{{-1e3}};
  LstmCellState state{Matrix{{0.0}}, Matrix{{5.0}}};
  auto const    r = lstm_step(l, Matrix{{0.7}}, state);
  double const  i = sigmoid(0.3 * 0.7 + 0.2);
  double const  g = std::tanh(0.3 * 0.7 + 0.2);
  CHECK(r.state.c(0, 0) == doctest::Approx(i * g).epsilon(1e-14));
}

TEST_CASE("open forget gate with closed input gate preserves memory")
{
  LstmLayer l            = constant_lstm(1, 1, 0.4, 0.0);
  l.gate(Gate::Forget).b = Matrix{{60.0}};
  l.gate(Gate::Input).b  = Matrix{{-60.0}};
  LstmCellState state{Matrix{{0.1}}, Matrix{{0.7}}};
  for (int t = 0; t < 20; ++t)
  {
    state = lstm_step(l, Matrix{{0.5}}, state).state;
  }
  CHECK(state.c(0, 0) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("tanh LSTM outputs stay inside (-1, 1)")
{
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial)
  {
    LstmLayer     l     = LstmLayer::random_init(3, 5, Activation::Tanh, true, rng);
    LstmCellState state = LstmCellState::zeros(4, 5);
    for (auto &g : l.gates)
    {
      g.w_x *= 10.0;
      g.w_h *= 10.0;
    }
    for (int t = 0; t < 10; ++t)
    {
      state = lstm_step(l, random_matrix(4, 3, rng, -5, 5), state).state;
      for (double h : state.h.data())
      {
        CHECK(std::abs(h) < 1.0);
      }
    }
  }
}

TEST_CASE("matrix LSTM agrees with the scalar oracle")
{
  auto const r = oracle::lstm_oracle_equivalence(100, 2024, 1e-12);
  CHECK(r.configs == 100);
  CHECK(r.passed);
  CHECK(r.max_abs_diff <= 1e-12);
}

TEST_CASE("stack builder wires shapes and sequence flags")
{
  Rng             rng(4);
  SequentialModel m = build_stack({6, StackSpec::Cell::Lstm, {32, 16}, {Activation::Tanh, Activation::ReLU}, 24},
                                  rng);
  REQUIRE(m.layers().size() == 3);
  auto const &first  = std::get<LstmLayer>(m.layers()[0]);
  auto const &second = std::get<LstmLayer>(m.layers()[1]);
  auto const &head   = std::get<DenseLayer>(m.layers()[2]);
  CHECK(first.return_sequences);
  CHECK_FALSE(second.return_sequences);
  CHECK(first.cell_activation == Activation::Tanh);
  CHECK(second.cell_activation == Activation::ReLU);
  CHECK(first.inputs() == 6);
  CHECK(second.inputs() == 32);
  CHECK(head.inputs() == 16);
  CHECK(m.output_width() == 24);
  CHECK(first.gate(Gate::Forget).b == Matrix(1, 32, 1.0));
  // 4 * (in*u + u*u + u) per LSTM layer plus the head
  CHECK(m.parameter_count() == 4 * (6 * 32 + 32 * 32 + 32) + 4 * (32 * 16 + 16 * 16 + 16) + 16 * 24 + 24);

  SequenceBatch x = random_batch(3, 7, 6, rng);
  CHECK(forward_sequence(m, x).rows() == 3);
  CHECK(forward_sequence(m, x).cols() == 24);
}

TEST_CASE("stack composition equals manual layer-by-layer stepping")
{
  Rng             rng(8);
  SequentialModel m = build_stack({2, StackSpec::Cell::Lstm, {3, 2}, {Activation::Tanh, Activation::ReLU}, 4}, rng);
  SequenceBatch const x = random_batch(2, 5, 2, rng);

  auto const &l0 = std::get<LstmLayer>(m.layers()[0]);
  auto const &l1 = std::get<LstmLayer>(m.layers()[1]);
  auto const &hd = std::get<DenseLayer>(m.layers()[2]);
  auto        s0 = LstmCellState::zeros(2, 3);
  auto        s1 = LstmCellState::zeros(2, 2);
  for (std::size_t t = 0; t < 5; ++t)
  {
    s0 = lstm_step(l0, x.step(t), s0).state;
    s1 = lstm_step(l1, s0.h, s1).state;
  }
  Matrix const manual = dense_forward(s1.h, hd.w, hd.b, hd.activation);
  CHECK(max_abs_diff(manual, forward_sequence(m, x)) < 1e-14);
}

TEST_CASE("initialization is deterministic per seed")
{
  StackSpec const spec{5, StackSpec::Cell::Lstm, {8, 4}, {Activation::Tanh, Activation::ReLU}, 12};
  Rng             a(99), b(99), c(100);
  auto const      ma = build_stack(spec, a), mb = build_stack(spec, b), mc = build_stack(spec, c);
  auto const      pa = ma.parameters(), pb = mb.parameters(), pc = mc.parameters();
  bool            differs = false;
  for (std::size_t k = 0; k < pa.size(); ++k)
  {
    CHECK(*pa[k].value == *pb[k].value);
    differs = differs || !(*pa[k].value == *pc[k].value);
  }
  CHECK(differs);
}

TEST_CASE("orthogonal recurrent kernel")
{
  Rng        rng(6);
  auto const l = LstmLayer::random_init(3, 4, Activation::Tanh, false, rng);
  // Packed recurrent kernel U = [W_hg W_hf W_hi W_ho] is 4 x 16 with orthonormal rows.
  Matrix packed(4, 16);
  for (std::size_t g = 0; g < 4; ++g)
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 4; ++c)
        packed(r, g * 4 + c) = l.gates[g].w_h(r, c);
  CHECK(max_abs_diff(matmul_nt(packed, packed), Matrix::identity(4)) < 1e-12);
}

TEST_CASE("dense gradient equals x^T delta")
{
  Rng             rng(12);
  DenseLayer      d{random_matrix(3, 2, rng), random_matrix(1, 2, rng), Activation::Linear};
  SequentialModel m;
  m.add(d);
  SequenceBatch x(4, 1, 3);
  Matrix        xm = random_matrix(4, 3, rng);
  for (std::size_t b = 0; b < 4; ++b)
    for (std::size_t f = 0; f < 3; ++f)
      x.at(b, 0, f) = xm(b, f);
  Matrix const delta = random_matrix(4, 2, rng);

  ForwardCache cache;
  forward_sequence(m, x, cache);
  GradientSet const g = backward_sequence(m, cache, delta);
  REQUIRE(g.size() == 2);
  CHECK(g.names[0] == "layer0.dense.w");
  CHECK(max_abs_diff(g.grads[0], matmul_tn(xm, delta)) < 1e-14);
  CHECK(max_abs_diff(g.grads[1], column_sums(delta)) < 1e-14);
}

TEST_CASE("zero upstream gradient gives zero parameter gradients")
{
  Rng             rng(13);
  SequentialModel m = build_stack({2, StackSpec::Cell::SimpleRnn, {3, 3}, {Activation::Tanh, Activation::Tanh}, 2}, rng);
  ForwardCache    cache;
  forward_sequence(m, random_batch(2, 4, 2, rng), cache);
  GradientSet const g = backward_sequence(m, cache, Matrix(2, 2));
  CHECK(g.squared_norm() == 0.0);
}

TEST_CASE("backward without a forward cache is an error")
{
  Rng             rng(14);
  SequentialModel m = build_stack({2, StackSpec::Cell::Lstm, {2}, {Activation::Tanh}, 1}, rng);
  CHECK_THROWS_AS(backward_sequence(m, ForwardCache{}, Matrix(1, 1)), std::logic_error);
}

TEST_CASE("model validation")
{
  SequentialModel bad;
  bad.add(DenseLayer{Matrix(2, 2), Matrix(1, 2), Activation::Linear});
  bad.add(SimpleRnnLayer{Matrix(2, 2), Matrix(2, 2), Matrix(1, 2), Activation::Tanh, false});
  CHECK_THROWS(bad.validate());

  Rng rng(1);
  CHECK_THROWS(build_stack({2, StackSpec::Cell::Lstm, {2}, {Activation::Softmax}, 1}, rng));
}
