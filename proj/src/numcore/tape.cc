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

#include "hiertype/numcore/tape.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hiertype/errors.h"
#include "hiertype/numcore/kernels.h"

namespace hiertype::numcore {

Parameter::Parameter(std::string n, Tensor v)
    : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

const Tensor &Var::value() const { return tape_->value(index_); }

double Var::item() const {
  const Tensor &v = value();
  if (v.size() != 1) {
    throw ShapeError("item() on tensor of shape " + shape_string(v.shape()));
  }
  return v[0];
}

Var Tape::constant(Tensor value) {
  Node &node = nodes_.emplace_back();
  node.own_value = std::move(value);
  node.value = &node.own_value;
  node.grad = &node.own_grad;
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(Parameter &p) {
  if (p.grad.shape() != p.value.shape()) p.grad = Tensor(p.value.shape());
  Node &node = nodes_.emplace_back();
  node.value = &p.value;
  node.grad = &p.grad;
  node.needs_grad = true;
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::span<const Var> inputs, Backward rule) {
  bool needs = false;
  for (const Var &in : inputs) {
    if (in.tape() != this) throw InternalError("operand recorded on another tape");
    needs = needs || nodes_[in.index()].needs_grad;
  }
  Node &node = nodes_.emplace_back();
  node.own_value = std::move(value);
  node.value = &node.own_value;
  node.grad = &node.own_grad;
  node.needs_grad = needs;
  if (needs) node.rule = std::move(rule);
  return Var(this, nodes_.size() - 1);
}

Tensor &Tape::grad(size_t index) {
  Node &node = nodes_[index];
  if (node.grad->shape() != node.value->shape()) {
    *node.grad = Tensor(node.value->shape());
  }
  return *node.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) throw InternalError("loss recorded on another tape");
  if (loss.size() != 1) {
    throw ShapeError("backward() needs a single-valued loss, got " +
                     shape_string(loss.shape()));
  }
  visited_.clear();
  grad(loss.index())[0] += 1.0;
  for (size_t i = loss.index() + 1; i-- > 0;) {
    Node &node = nodes_[i];
    if (!node.needs_grad || !node.rule) continue;
    if (node.own_grad.shape() != node.own_value.shape()) continue;  // no grad
    visited_.push_back(i);
    node.rule(*this, i);
  }
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  // log sigmoid(x) = -softplus(-x)
  return -(std::max(-x, 0.0) + std::log1p(std::exp(-std::abs(x))));
}

double logsumexp(std::span<const double> v) {
  if (v.empty()) throw ShapeError("logsumexp of empty vector");
  double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

double complex_trilinear(std::span<const double> a_re,
                         std::span<const double> a_im,
                         std::span<const double> r_re,
                         std::span<const double> r_im,
                         std::span<const double> b_re,
                         std::span<const double> b_im) {
  const size_t d = a_re.size();
  if (a_im.size() != d || r_re.size() != d || r_im.size() != d ||
      b_re.size() != d || b_im.size() != d) {
    throw ShapeError("complex_trilinear: dimension mismatch");
  }
  double s = 0.0;
  for (size_t k = 0; k < d; ++k) {
    s += a_re[k] * r_re[k] * b_re[k];
    s += a_re[k] * r_im[k] * b_im[k];
    s += a_im[k] * r_re[k] * b_im[k];
    s -= a_im[k] * r_im[k] * b_re[k];
  }
  return s;
}

Tensor dropout_mask(const Shape &shape, double keep, std::mt19937_64 &rng) {
  Tensor mask(shape);
  std::bernoulli_distribution coin(keep);
  for (double &m : mask.values()) m = coin(rng) ? 1.0 : 0.0;
  return mask;
}

namespace ops {
namespace {

void require_rank(const Tensor &t, size_t rank, const char *op) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " +
                     std::to_string(rank) + ", got " + shape_string(t.shape()));
  }
}

void require_scalar(const Tensor &t, const char *op) {
  if (t.size() != 1) {
    throw ShapeError(std::string(op) + ": expected a scalar, got " +
                     shape_string(t.shape()));
  }
}

template <typename F>
Var unary(Var a, Tensor out, F rule) {
  Var inputs[] = {a};
  return a.tape()->record(std::move(out), inputs, rule);
}

}  // namespace

Var add(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  kernels::axpy(1.0, b.value().data(), out.data(), out.size());
  const size_t ia = a.index(), ib = b.index();
  Var inputs[] = {a, b};
  return a.tape()->record(std::move(out), inputs, [ia, ib](Tape &t, size_t self) {
    const Tensor &g = t.grad(self);
    if (t.needs_grad(ia)) kernels::axpy(1.0, g.data(), t.grad(ia).data(), g.size());
    if (t.needs_grad(ib)) kernels::axpy(1.0, g.data(), t.grad(ib).data(), g.size());
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  kernels::axpy(-1.0, b.value().data(), out.data(), out.size());
  const size_t ia = a.index(), ib = b.index();
  Var inputs[] = {a, b};
  return a.tape()->record(std::move(out), inputs, [ia, ib](Tape &t, size_t self) {
    const Tensor &g = t.grad(self);
    if (t.needs_grad(ia)) kernels::axpy(1.0, g.data(), t.grad(ia).data(), g.size());
    if (t.needs_grad(ib)) kernels::axpy(-1.0, g.data(), t.grad(ib).data(), g.size());
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  const Tensor &bv = b.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const size_t ia = a.index(), ib = b.index();
  Var inputs[] = {a, b};
  return a.tape()->record(std::move(out), inputs, [ia, ib](Tape &t, size_t self) {
    const Tensor &g = t.grad(self);
    const Tensor &av = t.value(ia);
    const Tensor &bv = t.value(ib);
    if (t.needs_grad(ia)) {
      Tensor &ga = t.grad(ia);
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.needs_grad(ib)) {
      Tensor &gb = t.grad(ib);
      for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var scale(Var a, double factor) {
  Tensor out = a.value();
  for (double &v : out.values()) v *= factor;
  const size_t ia = a.index();
  return unary(a, std::move(out), [ia, factor](Tape &t, size_t self) {
    const Tensor &g = t.grad(self);
    kernels::axpy(factor, g.data(), t.grad(ia).data(), g.size());
  });
}

Var scale_by(Var s, Var a) {
  require_scalar(s.value(), "scale_by");
  const double factor = s.value()[0];
  Tensor out = a.value();
  for (double &v : out.values()) v *= factor;
  const size_t is = s.index(), ia = a.index();
  Var inputs[] = {s, a};
  return a.tape()->record(std::move(out), inputs, [is, ia](Tape &t, size_t self) {
    const Tensor &g = t.grad(self);
    const Tensor &av = t.value(ia);
    const double factor = t.value(is)[0];
    if (t.needs_grad(is)) {
      t.grad(is)[0] += kernels::dot(g.data(), av.data(), g.size());
    }
    if (t.needs_grad(ia)) {
      kernels::axpy(factor, g.data(), t.grad(ia).data(), g.size());
    }
  });
}

Var tanh(Var a) {
  Tensor out = a.value();
  for (double &v : out.values()) v = std::tanh(v);
  const size_t ia = a.index();
  return unary(a, std::move(out), [ia](Tape &t, size_t self) {
    const Tensor &g = t.grad(self);
    const Tensor &y = t.value(self);
    Tensor &ga = t.grad(ia);
    for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Var sigmoid(Var a) {
  Tensor out = a.value();
  for (double &v : out.values()) v = numcore::sigmoid(v);
  const size_t ia = a.index();
  return unary(a, std::move(out), [ia](Tape &t, size_t self) {
    const Tensor &g = t.grad(self);
    const Tensor &y = t.value(self);
    Tensor &ga = t.grad(ia);
    for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var dropout(Var a, const Tensor &mask, double keep) {
  require_same_shape(a.value(), mask, "dropout");
  if (!(keep > 0.0 && keep <= 1.0)) {
    throw ShapeError("dropout keep probability must be in (0, 1]");
  }
  Tensor scaled = mask;
  for (double &m : scaled.values()) m /= keep;
  Tensor out = a.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] *= scaled[i];
  const size_t ia = a.index();
  return unary(a, std::move(out),
               [ia, scaled = std::move(scaled)](Tape &t, size_t self) {
                 const Tensor &g = t.grad(self);
                 Tensor &ga = t.grad(ia);
                 for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * scaled[i];
               });
}

Var matmul(Var a, Var b) {
  const Tensor &av = a.value();
  const Tensor &bv = b.value();
  require_rank(av, 2, "matmul");
  require_rank(bv, 2, "matmul");
  const size_t m = av.dim(0), k = av.dim(1), n = bv.dim(1);
  if (bv.dim(0) != k) {
    throw ShapeError("matmul: " + shape_string(av.shape()) + " * " +
                     shape_string(bv.shape()));
  }
  Tensor out({m, n});
  for (size_t i = 0; i < m; ++i) {
    for (size_t l = 0; l < k; ++l) {
      kernels::axpy(av.at(i, l), bv.data() + l * n, out.data() + i * n, n);
    }
  }
  const size_t ia = a.index(), ib = b.index();
  Var inputs[] = {a, b};
  return a.tape()->record(std::move(out), inputs,
                          [ia, ib, m, k, n](Tape &t, size_t self) {
    const Tensor &g = t.grad(self);
    const Tensor &av = t.value(ia);
    const Tensor &bv = t.value(ib);
    if (t.needs_grad(ia)) {
      Tensor &ga = t.grad(ia);
      // ga = g * b^T
      for (size_t i = 0; i < m; ++i) {
        kernels::gemv_acc(bv.data(), g.data() + i * n, ga.data() + i * k, k, n);
      }
    }
    if (t.needs_grad(ib)) {
      Tensor &gb = t.grad(ib);
      // gb = a^T * g
      for (size_t i = 0; i < m; ++i) {
        kernels::ger(1.0, av.data() + i * k, g.data() + i * n, gb.data(), k, n);
      }
    }
  });
}

Var matmul_bt(Var a, Var b) {
  const Tensor &av = a.value();
  const Tensor &bv = b.value();
  require_rank(av, 2, "matmul_bt");
  require_rank(bv, 2, "matmul_bt");
  const size_t m = av.dim(0), k = av.dim(1), n = bv.dim(0);
  if (bv.dim(1) != k) {
    throw ShapeError("matmul_bt: " + shape_string(av.shape()) + " * " +
                     shape_string(bv.shape()) + "^T");
  }
  Tensor out({m, n});
  for (size_t i = 0; i < m; ++i) {
    kernels::gemv_acc(bv.data(), av.data() + i * k, out.data() + i * n, n, k);
  }
  const size_t ia = a.index(), ib = b.index();
  Var inputs[] = {a, b};
  return a.tape()->record(std::move(out), inputs,
                          [ia, ib, m, k, n](Tape &t, size_t self) {
    const Tensor &g = t.grad(self);
    const Tensor &av = t.value(ia);
    const Tensor &bv = t.value(ib);
    if (t.needs_grad(ia)) {
      Tensor &ga = t.grad(ia);
      for (size_t i = 0; i < m; ++i) {
        kernels::gemv_t_acc(bv.data(), g.data() + i * n, ga.data() + i * k, n, k);
      }
    }
    if (t.needs_grad(ib)) {
      Tensor &gb = t.grad(ib);
      for (size_t i = 0; i < m; ++i) {
        kernels::ger(1.0, g.data() + i * n, av.data() + i * k, gb.data(), n, k);
      }
    }
  });
}

Var matvec(Var a, Var x) {
  const Tensor &av = a.value();
  const Tensor &xv = x.value();
  require_rank(av, 2, "matvec");
  require_rank(xv, 1, "matvec");
  const size_t m = av.dim(0), n = av.dim(1);
  if (xv.size() != n) {
    throw ShapeError("matvec: " + shape_string(av.shape()) + " * " +
                     shape_string(xv.shape()));
  }
  Tensor out({m});
  kernels::gemv_acc(av.data(), xv.data(), out.data(), m, n);
  const size_t ia = a.index(), ix = x.index();
  Var inputs[] = {a, x};
  return a.tape()->record(std::move(out), inputs, [ia, ix, m, n](Tape &t, size_t self) {
    const Tensor &g = t.grad(self);
    if (t.needs_grad(ia)) {
      kernels::ger(1.0, g.data(), t.value(ix).data(), t.grad(ia).data(), m, n);
    }
    if (t.needs_grad(ix)) {
      kernels::gemv_t_acc(t.value(ia).data(), g.data(), t.grad(ix).data(), m, n);
    }
  });
}

Var matvec_t(Var a, Var x) {
  const Tensor &av = a.value();
  const Tensor &xv = x.value();
  require_rank(av, 2, "matvec_t");
  require_rank(xv, 1, "matvec_t");
  const size_t m = av.dim(0), n = av.dim(1);
  if (xv.size() != m) {
    throw ShapeError("matvec_t: " + shape_string(av.shape()) + "^T * " +
                     shape_string(xv.shape()));
  }
  Tensor out({n});
  kernels::gemv_t_acc(av.data(), xv.data(), out.data(), m, n);
  const size_t ia = a.index(), ix = x.index();
  Var inputs[] = {a, x};
  return a.tape()->record(std::move(out), inputs, [ia, ix, m, n](Tape &t, size_t self) {
    const Tensor &g = t.grad(self);
    if (t.needs_grad(ia)) {
      kernels::ger(1.0, t.value(ix).data(), g.data(), t.grad(ia).data(), m, n);
    }
    if (t.needs_grad(ix)) {
      kernels::gemv_acc(t.value(ia).data(), g.data(), t.grad(ix).data(), m, n);
    }
  });
}

Var dot(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "dot");
  Tensor out({1});
  out[0] = kernels::dot(a.value().data(), b.value().data(), a.size());
  const size_t ia = a.index(), ib = b.index();
  Var inputs[] = {a, b};
  return a.tape()->record(std::move(out), inputs, [ia, ib](Tape &t, size_t self) {
    const double g = t.grad(self)[0];
    const Tensor &av = t.value(ia);
    const Tensor &bv = t.value(ib);
    if (t.needs_grad(ia)) kernels::axpy(g, bv.data(), t.grad(ia).data(), bv.size());
    if (t.needs_grad(ib)) kernels::axpy(g, av.data(), t.grad(ib).data(), av.size());
  });
}

Var sum(Var a) {
  Tensor out({1});
  for (double v : a.value().values()) out[0] += v;
  const size_t ia = a.index();
  return unary(a, std::move(out), [ia](Tape &t, size_t self) {
    const double g = t.grad(self)[0];
    for (double &v : t.grad(ia).values()) v += g;
  });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat of nothing");
  size_t total = 0;
  for (const Var &p : parts) total += p.size();
  Tensor out({total});
  std::vector<size_t> indices;
  size_t offset = 0;
  for (const Var &p : parts) {
    const Tensor &v = p.value();
    std::copy(v.values().begin(), v.values().end(), out.data() + offset);
    offset += v.size();
    indices.push_back(p.index());
  }
  return parts[0].tape()->record(std::move(out), parts,
                                 [indices](Tape &t, size_t self) {
    const Tensor &g = t.grad(self);
    size_t offset = 0;
    for (size_t idx : indices) {
      const size_t n = t.value(idx).size();
      if (t.needs_grad(idx)) {
        kernels::axpy(1.0, g.data() + offset, t.grad(idx).data(), n);
      }
      offset += n;
    }
  });
}

Var concat_cols(Var a, Var b) {
  const Tensor &av = a.value();
  const Tensor &bv = b.value();
  require_rank(av, 2, "concat_cols");
  require_rank(bv, 2, "concat_cols");
  const size_t s = av.dim(0), p = av.dim(1), q = bv.dim(1);
  if (bv.dim(0) != s) {
    throw ShapeError("concat_cols: row mismatch " + shape_string(av.shape()) +
                     " vs " + shape_string(bv.shape()));
  }
  Tensor out({s, p + q});
  for (size_t i = 0; i < s; ++i) {
    std::copy_n(av.data() + i * p, p, out.data() + i * (p + q));
    std::copy_n(bv.data() + i * q, q, out.data() + i * (p + q) + p);
  }
  const size_t ia = a.index(), ib = b.index();
  Var inputs[] = {a, b};
  return a.tape()->record(std::move(out), inputs, [ia, ib, s, p, q](Tape &t, size_t self) {
    const Tensor &g = t.grad(self);
    for (size_t i = 0; i < s; ++i) {
      if (t.needs_grad(ia)) {
        kernels::axpy(1.0, g.data() + i * (p + q), t.grad(ia).data() + i * p, p);
      }
      if (t.needs_grad(ib)) {
        kernels::axpy(1.0, g.data() + i * (p + q) + p, t.grad(ib).data() + i * q, q);
      }
    }
  });
}

Var stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw ShapeError("stack_rows of nothing");
  const size_t n = rows[0].size();
  Tensor out({rows.size(), n});
  std::vector<size_t> indices;
  for (size_t r = 0; r < rows.size(); ++r) {
    const Tensor &v = rows[r].value();
    if (v.size() != n) throw ShapeError("stack_rows: ragged rows");
    std::copy(v.values().begin(), v.values().end(), out.data() + r * n);
    indices.push_back(rows[r].index());
  }
  return rows[0].tape()->record(std::move(out), rows,
                                [indices, n](Tape &t, size_t self) {
    const Tensor &g = t.grad(self);
    for (size_t r = 0; r < indices.size(); ++r) {
      if (t.needs_grad(indices[r])) {
        kernels::axpy(1.0, g.data() + r * n, t.grad(indices[r]).data(), n);
      }
    }
  });
}

Var gather_rows(Var table, std::span<const size_t> indices) {
  const Tensor &tv = table.value();
  require_rank(tv, 2, "gather_rows");
  const size_t d = tv.dim(1);
  Tensor out({indices.size(), d});
  for (size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= tv.dim(0)) {
      throw ShapeError("gather_rows: row " + std::to_string(indices[r]) +
                       " out of range for " + shape_string(tv.shape()));
    }
    std::copy_n(tv.data() + indices[r] * d, d, out.data() + r * d);
  }
  const size_t it = table.index();
  std::vector<size_t> rows(indices.begin(), indices.end());
  return unary(table, std::move(out), [it, rows, d](Tape &t, size_t self) {
    const Tensor &g = t.grad(self);
    Tensor &gt = t.grad(it);
    for (size_t r = 0; r < rows.size(); ++r) {
      kernels::axpy(1.0, g.data() + r * d, gt.data() + rows[r] * d, d);
    }
  });
}

Var conv1d_samepad(Var m, Var filters, Var bias) {
  const Tensor &mv = m.value();
  const Tensor &wv = filters.value();
  const Tensor &bv = bias.value();
  require_rank(mv, 2, "conv1d_samepad");
  require_rank(wv, 3, "conv1d_samepad");
  require_rank(bv, 1, "conv1d_samepad");
  const size_t s = mv.dim(0), d_in = mv.dim(1);
  const size_t w = wv.dim(0), d = wv.dim(1);
  if (w % 2 == 0) throw ShapeError("conv1d_samepad: filter width must be odd");
  if (wv.dim(2) != d_in || bv.size() != d || s == 0) {
    throw ShapeError("conv1d_samepad: input " + shape_string(mv.shape()) +
                     ", filters " + shape_string(wv.shape()) + ", bias " +
                     shape_string(bv.shape()));
  }
  const long half = static_cast<long>(w / 2);
  Tensor out({s, d});
  for (size_t i = 0; i < s; ++i) {
    double *ci = out.data() + i * d;
    std::copy_n(bv.data(), d, ci);
    for (size_t j = 0; j < w; ++j) {
      long src = static_cast<long>(i) - half + static_cast<long>(j);
      if (src < 0 || src >= static_cast<long>(s)) continue;
      kernels::gemv_acc(wv.data() + j * d * d_in, mv.data() + src * d_in, ci, d,
                        d_in);
    }
    for (size_t k = 0; k < d; ++k) ci[k] = std::tanh(ci[k]);
  }
  const size_t im = m.index(), iw = filters.index(), ib = bias.index();
  Var inputs[] = {m, filters, bias};
  return m.tape()->record(std::move(out), inputs,
                          [im, iw, ib, s, d_in, w, d, half](Tape &t, size_t self) {
    const Tensor &g = t.grad(self);
    const Tensor &c = t.value(self);
    const Tensor &mv = t.value(im);
    const Tensor &wv = t.value(iw);
    std::vector<double> gz(d);
    for (size_t i = 0; i < s; ++i) {
      for (size_t k = 0; k < d; ++k) {
        const double ck = c[i * d + k];
        gz[k] = g[i * d + k] * (1.0 - ck * ck);
      }
      if (t.needs_grad(ib)) kernels::axpy(1.0, gz.data(), t.grad(ib).data(), d);
      for (size_t j = 0; j < w; ++j) {
        long src = static_cast<long>(i) - half + static_cast<long>(j);
        if (src < 0 || src >= static_cast<long>(s)) continue;
        if (t.needs_grad(iw)) {
          kernels::ger(1.0, gz.data(), mv.data() + src * d_in,
                       t.grad(iw).data() + j * d * d_in, d, d_in);
        }
        if (t.needs_grad(im)) {
          kernels::gemv_t_acc(wv.data() + j * d * d_in, gz.data(),
                              t.grad(im).data() + src * d_in, d, d_in);
        }
      }
    }
  });
}

Var maxpool_time(Var c) {
  const Tensor &cv = c.value();
  require_rank(cv, 2, "maxpool_time");
  const size_t s = cv.dim(0), d = cv.dim(1);
  if (s == 0) throw ShapeError("maxpool_time over zero rows");
  Tensor out({d});
  std::vector<size_t> argmax(d, 0);
  for (size_t k = 0; k < d; ++k) {
    double best = cv.at(0, k);
    for (size_t i = 1; i < s; ++i) {
      if (cv.at(i, k) > best) {
        best = cv.at(i, k);
        argmax[k] = i;
      }
    }
    out[k] = best;
  }
  const size_t ic = c.index();
  return unary(c, std::move(out), [ic, argmax, d](Tape &t, size_t self) {
    const Tensor &g = t.grad(self);
    Tensor &gc = t.grad(ic);
    for (size_t k = 0; k < d; ++k) gc[argmax[k] * d + k] += g[k];
  });
}

Var logsumexp(Var v) {
  Tensor out({1});
  out[0] = numcore::logsumexp(v.value().span());
  const size_t iv = v.index();
  return unary(v, std::move(out), [iv](Tape &t, size_t self) {
    const double g = t.grad(self)[0];
    const double lse = t.value(self)[0];
    const Tensor &vv = t.value(iv);
    Tensor &gv = t.grad(iv);
    for (size_t i = 0; i < vv.size(); ++i) gv[i] += g * std::exp(vv[i] - lse);
  });
}

Var logsumexp_cols(Var x) {
  const Tensor &xv = x.value();
  require_rank(xv, 2, "logsumexp_cols");
  const size_t k = xv.dim(0), n = xv.dim(1);
  if (k == 0) throw ShapeError("logsumexp_cols over zero rows");
  Tensor out({n});
  std::vector<double> col(k);
  for (size_t c = 0; c < n; ++c) {
    for (size_t r = 0; r < k; ++r) col[r] = xv.at(r, c);
    out[c] = numcore::logsumexp(col);
  }
  const size_t ix = x.index();
  return unary(x, std::move(out), [ix, k, n](Tape &t, size_t self) {
    const Tensor &g = t.grad(self);
    const Tensor &y = t.value(self);
    const Tensor &xv = t.value(ix);
    Tensor &gx = t.grad(ix);
    for (size_t r = 0; r < k; ++r) {
      for (size_t c = 0; c < n; ++c) {
        gx[r * n + c] += g[c] * std::exp(xv[r * n + c] - y[c]);
      }
    }
  });
}

Var bce_with_logits(Var logits, const Tensor &targets) {
  const Tensor &y = logits.value();
  if (y.size() != targets.size()) {
    throw ShapeError("bce_with_logits: " + std::to_string(y.size()) +
                     " logits vs " + std::to_string(targets.size()) + " targets");
  }
  Tensor out({1});
  for (size_t j = 0; j < y.size(); ++j) {
    // -[t log s(y) + (1 - t) log(1 - s(y))] = max(y, 0) - y t + log(1 + e^-|y|)
    out[0] += std::max(y[j], 0.0) - y[j] * targets[j] +
              std::log1p(std::exp(-std::abs(y[j])));
  }
  const size_t il = logits.index();
  return unary(logits, std::move(out), [il, targets](Tape &t, size_t self) {
    const double g = t.grad(self)[0];
    const Tensor &y = t.value(il);
    Tensor &gl = t.grad(il);
    for (size_t j = 0; j < y.size(); ++j) {
      gl[j] += g * (numcore::sigmoid(y[j]) - targets[j]);
    }
  });
}

Var softmax_xent(Var scores, size_t gold) {
  const Tensor &sv = scores.value();
  if (gold >= sv.size()) {
    throw ShapeError("softmax_xent: gold index " + std::to_string(gold) +
                     " out of range " + std::to_string(sv.size()));
  }
  Tensor out({1});
  const double lse = numcore::logsumexp(sv.span());
  out[0] = lse - sv[gold];
  const size_t is = scores.index();
  return unary(scores, std::move(out), [is, gold, lse](Tape &t, size_t self) {
    const double g = t.grad(self)[0];
    const Tensor &sv = t.value(is);
    Tensor &gs = t.grad(is);
    for (size_t i = 0; i < sv.size(); ++i) gs[i] += g * std::exp(sv[i] - lse);
    gs[gold] -= g;
  });
}

Var complex_trilinear(Var a_re, Var a_im, Var r_re, Var r_im, Var b_re,
                      Var b_im) {
  Tensor out({1});
  out[0] = numcore::complex_trilinear(a_re.value().span(), a_im.value().span(),
                                      r_re.value().span(), r_im.value().span(),
                                      b_re.value().span(), b_im.value().span());
  const size_t ids[6] = {a_re.index(), a_im.index(), r_re.index(),
                         r_im.index(), b_re.index(), b_im.index()};
  Var inputs[] = {a_re, a_im, r_re, r_im, b_re, b_im};
  return a_re.tape()->record(std::move(out), inputs,
                             [ids = std::to_array(ids)](Tape &t, size_t self) {
    const double g = t.grad(self)[0];
    const Tensor &ar = t.value(ids[0]), &ai = t.value(ids[1]);
    const Tensor &rr = t.value(ids[2]), &ri = t.value(ids[3]);
    const Tensor &br = t.value(ids[4]), &bi = t.value(ids[5]);
    const size_t d = ar.size();
    auto accumulate = [&](size_t which, auto partial) {
      if (!t.needs_grad(ids[which])) return;
      Tensor &gx = t.grad(ids[which]);
      for (size_t k = 0; k < d; ++k) gx[k] += g * partial(k);
    };
    accumulate(0, [&](size_t k) { return rr[k] * br[k] + ri[k] * bi[k]; });
    accumulate(1, [&](size_t k) { return rr[k] * bi[k] - ri[k] * br[k]; });
    accumulate(2, [&](size_t k) { return ar[k] * br[k] + ai[k] * bi[k]; });
    accumulate(3, [&](size_t k) { return ar[k] * bi[k] - ai[k] * br[k]; });
    accumulate(4, [&](size_t k) { return ar[k] * rr[k] - ai[k] * ri[k]; });
    accumulate(5, [&](size_t k) { return ar[k] * ri[k] + ai[k] * rr[k]; });
  });
}

}  // namespace ops
}  // namespace hiertype::numcore
