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

#ifndef HIERTYPE_NUMCORE_TAPE_H_
#define HIERTYPE_NUMCORE_TAPE_H_

#include <deque>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hiertype/numcore/tensor.h"

namespace hiertype::numcore {

// A learnable tensor with its accumulated gradient.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor value);

  void zero_grad() { grad.fill(0.0); }

  std::string name;
  Tensor value;
  Tensor grad;
};

class Tape;

// Handle to a node recorded on a tape.
class Var {
 public:
  Var() = default;

  const Tensor &value() const;
  const Shape &shape() const { return value().shape(); }
  size_t size() const { return value().size(); }
  // Scalar value of a one-element node.
  double item() const;

  Tape *tape() const { return tape_; }
  size_t index() const { return index_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape *tape, size_t index) : tape_(tape), index_(index) {}

  Tape *tape_ = nullptr;
  size_t index_ = 0;
};

// Records forward operations and replays their gradient rules in exact
// reverse order. Leaves created by param() read the parameter value in place
// and accumulate straight into Parameter::grad, so a tape must not outlive
// the parameters it references. Single-threaded; use one tape per worker.
class Tape {
 public:
  using Backward = std::function<void(Tape &, size_t self)>;

  Tape() = default;
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  Var constant(Tensor value);
  Var param(Parameter &p);

  // Appends a node computed from inputs. The rule runs during backward() and
  // must add the node's gradient contribution to each input that needs it.
  Var record(Tensor value, std::span<const Var> inputs, Backward rule);

  // Seeds d(loss)/d(loss) = 1 and propagates to every node; loss must hold a
  // single value.
  void backward(Var loss);

  const Tensor &value(size_t index) const { return *nodes_[index].value; }
  bool needs_grad(size_t index) const { return nodes_[index].needs_grad; }
  // Gradient buffer of a node, allocated as zeros on first access.
  Tensor &grad(size_t index);
  const Tensor &grad(Var v) { return grad(v.index()); }

  size_t size() const { return nodes_.size(); }
  // Indices in the order backward() visited them during the last call.
  const std::vector<size_t> &backward_order() const { return visited_; }

 private:
  struct Node {
    Tensor own_value;
    Tensor own_grad;
    const Tensor *value = nullptr;
    Tensor *grad = nullptr;
    bool needs_grad = false;
    Backward rule;
  };

  std::deque<Node> nodes_;
  std::vector<size_t> visited_;
};

// Differentiable operations. Shapes are validated and mismatches raise
// ShapeError. "Scalar" means a tensor of shape {1}.
namespace ops {

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
// s (scalar node) times every element of a.
Var scale_by(Var s, Var a);
Var tanh(Var a);
Var sigmoid(Var a);
// Inverted dropout: multiplies by mask / keep where mask holds 0 or 1.
Var dropout(Var a, const Tensor &mask, double keep);

// (m x k) * (k x n)
Var matmul(Var a, Var b);
// (m x k) * (n x k)^T
Var matmul_bt(Var a, Var b);
// (m x n) * n-vector
Var matvec(Var a, Var x);
// (m x n)^T * m-vector
Var matvec_t(Var a, Var x);
Var dot(Var a, Var b);
Var sum(Var a);

// Flattened concatenation into a rank-1 node.
Var concat(std::span<const Var> parts);
// Row-wise concatenation of (s x p) and (s x q) into (s x (p + q)).
Var concat_cols(Var a, Var b);
// Stacks equally sized rank-1 nodes into a (k x n) matrix.
Var stack_rows(std::span<const Var> rows);
// Selects rows of a matrix; repeated indices accumulate gradient.
Var gather_rows(Var table, std::span<const size_t> indices);

// c_i = tanh(b + sum_{j<w} W[j] M[i - w/2 + j]) with zero padding outside
// [0, s). m: (s x d_in), filters: (w x d x d_in), bias: d. Returns (s x d).
Var conv1d_samepad(Var m, Var filters, Var bias);
// Pointwise max over rows; gradient flows to the first argmax row.
Var maxpool_time(Var c);
Var logsumexp(Var v);
// Column-wise logsumexp of (k x n) into an n-vector.
Var logsumexp_cols(Var x);

// -sum_j [t_j log sigmoid(y_j) + (1 - t_j) log(1 - sigmoid(y_j))], stable form.
Var bce_with_logits(Var logits, const Tensor &targets);
// -scores[gold] + logsumexp(scores)
Var softmax_xent(Var scores, size_t gold);

// Re(sum_k a_k r_k conj(b_k)) for complex vectors given as real/imag parts.
Var complex_trilinear(Var a_re, Var a_im, Var r_re, Var r_im, Var b_re,
                      Var b_im);

}  // namespace ops

// Plain-value helpers shared by the ops.
double logsumexp(std::span<const double> v);
double log_sigmoid(double x);
double sigmoid(double x);
double complex_trilinear(std::span<const double> a_re,
                         std::span<const double> a_im,
                         std::span<const double> r_re,
                         std::span<const double> r_im,
                         std::span<const double> b_re,
                         std::span<const double> b_im);

// Binary mask with P(1) = keep.
Tensor dropout_mask(const Shape &shape, double keep, std::mt19937_64 &rng);

}  // namespace hiertype::numcore

#endif  // HIERTYPE_NUMCORE_TAPE_H_
