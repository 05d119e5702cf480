// Copyright 2026 The hiertype Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "hiertype/errors.h"
#include "hiertype/numcore/checkpoint.h"
#include "hiertype/numcore/gradcheck.h"
#include "hiertype/numcore/kernels.h"
#include "hiertype/numcore/tape.h"
#include "hiertype/numcore/tensor.h"
#include "test_util.h"

namespace hiertype::numcore {
namespace {

using hiertype::testing::random_tensor;
using hiertype::testing::TempDir;

TEST(TensorTest, ShapesAndAccess) {
  Tensor m = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(m.rank(), 2u);
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m.at(1, 2), 6.0);
  EXPECT_EQ(m.row(1)[0], 4.0);
  EXPECT_EQ(shape_string(m.shape()), "[2x3]");
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
  EXPECT_THROW(m.reshape({4}), ShapeError);
  m.reshape({3, 2});
  EXPECT_EQ(m.at(2, 1), 6.0);
}

TEST(TensorTest, FiniteCheck) {
  Tensor t = Tensor::vector({1.0, 2.0});
  EXPECT_TRUE(t.all_finite());
  t[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(t.all_finite());
}

class KernelEquivalenceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!kernels::backend_available(kernels::Backend::kAvx2)) {
      GTEST_SKIP() << "AVX2 kernels unavailable on this machine";
    }
  }
};

TEST_F(KernelEquivalenceTest, MatchScalarReference) {
  const auto &ref = kernels::scalar_table();
  const auto &simd = *kernels::avx2_table();
  std::mt19937_64 rng(7);
  for (size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 33u, 301u}) {
    Tensor x = random_tensor({n == 0 ? 1 : n}, rng), y = random_tensor({n == 0 ? 1 : n}, rng);
    EXPECT_NEAR(ref.dot(x.data(), y.data(), n), simd.dot(x.data(), y.data(), n), 1e-12) << n;

    Tensor y1 = y, y2 = y;
    ref.axpy(0.37, x.data(), y1.data(), n);
    simd.axpy(0.37, x.data(), y2.data(), n);
    for (size_t i = 0; i < n; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-14);

    for (size_t rows : {1u, 2u, 5u, 9u}) {
      const size_t cols = n == 0 ? 1 : n;
      Tensor a = random_tensor({rows, cols}, rng);
      Tensor xv = random_tensor({cols}, rng), xr = random_tensor({rows}, rng);
      Tensor out1({rows}, 0.5), out2({rows}, 0.5);
      ref.gemv_acc(a.data(), xv.data(), out1.data(), rows, cols);
      simd.gemv_acc(a.data(), xv.data(), out2.data(), rows, cols);
      for (size_t i = 0; i < rows; ++i) EXPECT_NEAR(out1[i], out2[i], 1e-12);

      Tensor t1({cols}, -0.25), t2({cols}, -0.25);
      ref.gemv_t_acc(a.data(), xr.data(), t1.data(), rows, cols);
      simd.gemv_t_acc(a.data(), xr.data(), t2.data(), rows, cols);
      for (size_t i = 0; i < cols; ++i) EXPECT_NEAR(t1[i], t2[i], 1e-12);

      Tensor a1 = a, a2 = a;
      ref.ger(-1.5, xr.data(), xv.data(), a1.data(), rows, cols);
      simd.ger(-1.5, xr.data(), xv.data(), a2.data(), rows, cols);
      for (size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a1[i], a2[i], 1e-12);
    }
  }
}

TEST(KernelTest, ScalarReferenceValues) {
  const auto &k = kernels::scalar_table();
  double x[] = {1, 2, 3}, y[] = {4, 5, 6};
  EXPECT_EQ(k.dot(x, y, 3), 32.0);
  double a[] = {1, 2, 3, 4, 5, 6};  // 2 x 3
  double out[] = {0, 0};
  k.gemv_acc(a, x, out, 2, 3);
  EXPECT_EQ(out[0], 14.0);
  EXPECT_EQ(out[1], 32.0);
  double r[] = {1, -1}, t[] = {0, 0, 0};
  k.gemv_t_acc(a, r, t, 2, 3);
  EXPECT_EQ(t[0], -3.0);
  EXPECT_EQ(t[2], -3.0);
}

TEST(KernelTest, BackendSwitching) {
  const auto initial = kernels::active_backend();
  kernels::set_backend(kernels::Backend::kScalar);
  EXPECT_EQ(kernels::active_backend(), kernels::Backend::kScalar);
  if (!kernels::backend_available(kernels::Backend::kAvx2)) {
    EXPECT_THROW(kernels::set_backend(kernels::Backend::kAvx2), UsageError);
  }
  kernels::set_backend(initial);
}

// Loss over a deterministic projection so that every output element gets a
// distinct upstream gradient.
Var weighted_sum(Tape &tape, Var v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Tensor w = random_tensor(v.shape(), rng);
  w.reshape({w.size()});
  Var flat = ops::concat(std::span<const Var>(&v, 1));
  return ops::dot(flat, tape.constant(w));
}

void expect_gradients(const LossFn &fn, const std::vector<Parameter *> &params) {
  GradCheckResult r = grad_check(fn, params);
  EXPECT_LT(r.max_relative_error, 1e-6)
      << r.worst_param << "[" << r.worst_index << "] analytic " << r.analytic
      << " numeric " << r.numeric;
  EXPECT_GT(r.coordinates, 0u);
}

class OpGradientTest : public ::testing::Test {
 protected:
  std::mt19937_64 rng{42};
  Parameter make(const std::string &name, const Shape &shape, double scale = 1.0) {
    return Parameter(name, random_tensor(shape, rng, scale));
  }
};

TEST_F(OpGradientTest, Elementwise) {
  Parameter a = make("a", {2, 3}), b = make("b", {2, 3});
  expect_gradients([&](Tape &t) {
    Var x = t.param(a), y = t.param(b);
    Var e = ops::add(ops::mul(ops::tanh(x), ops::sigmoid(y)), ops::sub(ops::scale(x, 0.5), y));
    return weighted_sum(t, e, 1);
  }, {&a, &b});
}

TEST_F(OpGradientTest, ScaleByScalar) {
  Parameter s = make("s", {1}), a = make("a", {4});
  expect_gradients([&](Tape &t) { return weighted_sum(t, ops::scale_by(t.param(s), t.param(a)), 2); },
                   {&s, &a});
}

TEST_F(OpGradientTest, MatrixProducts) {
  Parameter a = make("a", {3, 4}), b = make("b", {4, 2}), c = make("c", {5, 4});
  Parameter x = make("x", {4}), y = make("y", {3});
  expect_gradients([&](Tape &t) {
    Var terms[] = {weighted_sum(t, ops::matmul(t.param(a), t.param(b)), 3),
                   weighted_sum(t, ops::matmul_bt(t.param(a), t.param(c)), 4),
                   weighted_sum(t, ops::matvec(t.param(a), t.param(x)), 5),
                   weighted_sum(t, ops::matvec_t(t.param(a), t.param(y)), 6),
                   ops::dot(t.param(x), t.param(x))};
    return ops::sum(ops::concat(terms));
  }, {&a, &b, &c, &x, &y});
}

TEST_F(OpGradientTest, Structural) {
  Parameter a = make("a", {3, 2}), b = make("b", {3, 4}), v = make("v", {2});
  expect_gradients([&](Tape &t) {
    Var ta = t.param(a);
    Var rows[] = {t.param(v), ops::scale(t.param(v), -2.0)};
    size_t idx[] = {2, 0, 2};
    Var terms[] = {weighted_sum(t, ops::concat_cols(ta, t.param(b)), 7),
                   weighted_sum(t, ops::stack_rows(rows), 8),
                   weighted_sum(t, ops::gather_rows(ta, idx), 9)};
    return ops::sum(ops::concat(terms));
  }, {&a, &b, &v});
}

TEST_F(OpGradientTest, ConvolutionAndPooling) {
  Parameter m = make("m", {6, 3}), w = make("w", {3, 4, 3}), bias = make("bias", {4});
  expect_gradients([&](Tape &t) {
    Var c = ops::conv1d_samepad(t.param(m), t.param(w), t.param(bias));
    return weighted_sum(t, ops::maxpool_time(c), 10);
  }, {&m, &w, &bias});
}

TEST_F(OpGradientTest, Reductions) {
  Parameter v = make("v", {5}, 3.0), x = make("x", {4, 3}, 3.0);
  expect_gradients([&](Tape &t) {
    Var terms[] = {ops::logsumexp(t.param(v)), weighted_sum(t, ops::logsumexp_cols(t.param(x)), 11)};
    return ops::sum(ops::concat(terms));
  }, {&v, &x});
}

TEST_F(OpGradientTest, Losses) {
  Parameter y = make("y", {4}, 4.0);
  Tensor target = Tensor::vector({1, 0, 1, 0});
  expect_gradients([&](Tape &t) { return ops::bce_with_logits(t.param(y), target); }, {&y});
  expect_gradients([&](Tape &t) { return ops::softmax_xent(t.param(y), 2); }, {&y});
}

TEST_F(OpGradientTest, ComplexTrilinear) {
  Parameter ar = make("ar", {4}), ai = make("ai", {4}), rr = make("rr", {4}),
            ri = make("ri", {4}), br = make("br", {4}), bi = make("bi", {4});
  expect_gradients([&](Tape &t) {
    return ops::complex_trilinear(t.param(ar), t.param(ai), t.param(rr), t.param(ri),
                                  t.param(br), t.param(bi));
  }, {&ar, &ai, &rr, &ri, &br, &bi});
}

TEST_F(OpGradientTest, DropoutUsesMaskOverKeep) {
  Parameter a = make("a", {6});
  Tensor mask = Tensor::vector({1, 0, 1, 1, 0, 1});
  Tape tape;
  Var out = ops::dropout(tape.param(a), mask, 0.5);
  for (size_t i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(out.value()[i], a.value[i] * mask[i] / 0.5);
  expect_gradients([&](Tape &t) { return weighted_sum(t, ops::dropout(t.param(a), mask, 0.5), 12); },
                   {&a});
}

TEST(ConvolutionTest, MatchesNaiveSamePadding) {
  std::mt19937_64 rng(3);
  const size_t s = 7, d_in = 3, d = 4, w = 5;
  Tensor m = random_tensor({s, d_in}, rng), filters = random_tensor({w, d, d_in}, rng),
         bias = random_tensor({d}, rng);
  Tape tape;
  Var c = ops::conv1d_samepad(tape.constant(m), tape.constant(filters), tape.constant(bias));
  ASSERT_EQ(c.shape(), (Shape{s, d}));
  for (size_t i = 0; i < s; ++i) {
    for (size_t o = 0; o < d; ++o) {
      double acc = bias[o];
      for (size_t j = 0; j < w; ++j) {
        long row = static_cast<long>(i) - static_cast<long>(w / 2) + static_cast<long>(j);
        if (row < 0 || row >= static_cast<long>(s)) continue;
        for (size_t k = 0; k < d_in; ++k) {
          acc += filters[(j * d + o) * d_in + k] * m.at(static_cast<size_t>(row), k);
        }
      }
      EXPECT_NEAR(c.value().at(i, o), std::tanh(acc), 1e-12);
    }
  }
}

TEST(MaxPoolTest, GradientGoesToFirstArgmax) {
  Parameter c("c", Tensor::matrix(3, 2, {1, 5, 4, 5, 4, 0}));
  Tape tape;
  Var pooled = ops::maxpool_time(tape.param(c));
  EXPECT_EQ(pooled.value().values(), (std::vector<double>{4, 5}));
  tape.backward(ops::sum(pooled));
  EXPECT_EQ(c.grad.values(), (std::vector<double>{0, 1, 1, 0, 0, 0}));
}

TEST(LossTest, BceIsStableForLargeLogits) {
  Tape tape;
  Var y = tape.constant(Tensor::vector({800.0, -800.0}));
  Var loss = ops::bce_with_logits(y, Tensor::vector({1, 0}));
  EXPECT_NEAR(loss.item(), 0.0, 1e-12);
  Var bad = ops::bce_with_logits(y, Tensor::vector({0, 1}));
  EXPECT_NEAR(bad.item(), 1600.0, 1e-9);
}

TEST(LossTest, BceMatchesDefinition) {
  Tape tape;
  Var y = tape.constant(Tensor::vector({0.3, -1.2}));
  Var loss = ops::bce_with_logits(y, Tensor::vector({1, 0}));
  const double expected = -std::log(1 / (1 + std::exp(-0.3))) - std::log(1 - 1 / (1 + std::exp(1.2)));
  EXPECT_NEAR(loss.item(), expected, 1e-12);
}

TEST(LossTest, SoftmaxCrossEntropy) {
  Tape tape;
  Var s = tape.constant(Tensor::vector({1.0, 2.0, 0.5}));
  const double lse = std::log(std::exp(1.0) + std::exp(2.0) + std::exp(0.5));
  EXPECT_NEAR(ops::softmax_xent(s, 0).item(), lse - 1.0, 1e-12);
  EXPECT_THROW(ops::softmax_xent(s, 3), ShapeError);
}

TEST(LogSumExpTest, LargeValuesDoNotOverflow) {
  std::vector<double> v = {1000, 1000};
  EXPECT_DOUBLE_EQ(logsumexp(v), 1000 + std::log(2.0));
  std::vector<double> w = {-1000, -1000, -1000};
  EXPECT_DOUBLE_EQ(logsumexp(w), -1000 + std::log(3.0));
}

TEST(LogSumExpTest, BoundsOnRandomMatrices) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<size_t> dim(1, 8);
  for (int trial = 0; trial < 2000; ++trial) {
    const size_t k = dim(rng), n = dim(rng);
    Tensor x = random_tensor({k, n}, rng, 50.0);
    Tape tape;
    Var pooled = ops::logsumexp_cols(tape.constant(x));
    for (size_t j = 0; j < n; ++j) {
      double mx = -std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < k; ++i) mx = std::max(mx, x.at(i, j));
      EXPECT_LE(mx, pooled.value()[j]);
      EXPECT_LE(pooled.value()[j], mx + std::log(static_cast<double>(k)) + 1e-12);
      if (k == 1) EXPECT_EQ(pooled.value()[j], x.at(0, j));
    }
  }
}

TEST(TapeTest, BackwardVisitsNodesInReverseOrder) {
  Parameter a("a", Tensor::vector({1, 2}));
  Tape tape;
  Var x = tape.param(a);
  Var y = ops::tanh(x);
  Var z = ops::sum(ops::mul(y, y));
  tape.backward(z);
  const auto &order = tape.backward_order();
  ASSERT_FALSE(order.empty());
  EXPECT_EQ(order.front(), z.index());
  for (size_t i = 1; i < order.size(); ++i) EXPECT_LT(order[i], order[i - 1]);
}

TEST(TapeTest, ConstantsReceiveNoParameterGradient) {
  Parameter a("a", Tensor::vector({1, 2}));
  Tape tape;
  Var c = tape.constant(Tensor::vector({3, 4}));
  tape.backward(ops::dot(tape.param(a), c));
  EXPECT_EQ(a.grad.values(), (std::vector<double>{3, 4}));
  EXPECT_FALSE(tape.needs_grad(c.index()));
}

TEST(TapeTest, ShapeErrorsAreReported) {
  Tape tape;
  Var a = tape.constant(Tensor({2, 3}));
  Var b = tape.constant(Tensor({2, 3}));
  EXPECT_THROW(ops::matmul(a, b), ShapeError);
  EXPECT_THROW(ops::add(a, tape.constant(Tensor({3}))), ShapeError);
  EXPECT_THROW(tape.backward(a), ShapeError);
}

TEST(GradCheckTest, DetectsWrongGradient) {
  Parameter a("a", Tensor::vector({0.5, -0.3}));
  // A rule that doubles the true gradient of sum(a).
  auto wrong = [&](Tape &t) {
    Var x = t.param(a);
    Var inputs[] = {x};
    Tensor value = Tensor::scalar(a.value[0] + a.value[1]);
    return t.record(std::move(value), inputs, [x](Tape &tp, size_t self) {
      const double g = tp.grad(self)[0];
      Tensor &gx = tp.grad(x.index());
      gx[0] += 2 * g;
      gx[1] += 2 * g;
    });
  };
  GradCheckResult r = grad_check(wrong, {&a});
  EXPECT_NEAR(r.max_relative_error, 0.5, 1e-6);
  EXPECT_EQ(a.value.values(), (std::vector<double>{0.5, -0.3}));
}

TEST(CheckpointTest, RoundTripIsExact) {
  std::mt19937_64 rng(5);
  TensorArchive ar;
  ar.metadata["task"] = "entity-typing";
  ar.metadata["note"] = "tab\tand\nnewline";
  ar.tensors["w"] = random_tensor({3, 4}, rng);
  ar.tensors["b"] = Tensor::vector({1e-300, -0.0, 1.0 / 3.0});
  ar.tensors["cube"] = random_tensor({2, 2, 2}, rng);
  TempDir dir;
  ar.save(dir.file("ck.bin"));
  TensorArchive back = TensorArchive::load(dir.file("ck.bin"));
  EXPECT_EQ(ar, back);
  EXPECT_EQ(ar.serialize(), back.serialize());
}

TEST(CheckpointTest, RejectsCorruptFiles) {
  TensorArchive ar;
  ar.tensors["w"] = Tensor::vector({1, 2, 3});
  std::string bytes = ar.serialize();
  EXPECT_THROW(TensorArchive::deserialize(bytes.substr(0, bytes.size() - 3)), DataError);
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(TensorArchive::deserialize(bad_magic), DataError);
  std::string bad_version = bytes;
  bad_version[8] = 9;
  EXPECT_THROW(TensorArchive::deserialize(bad_version), DataError);
  EXPECT_THROW(TensorArchive::load("/nonexistent/ck.bin"), IOError);
}

}  // namespace
}  // namespace hiertype::numcore
